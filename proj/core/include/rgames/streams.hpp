#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "rgames/errors.hpp"

namespace rgames {

using Digit = std::uint64_t;
using FinSeq = std::vector<Digit>;

/// pair(n,m) = 2^n * (2m + 1) - 1. Bijection between omega^2 and omega;
/// row n occupies the arithmetic progression 2^n - 1, step 2^(n+1).
Digit pair_nm(std::uint64_t n, std::uint64_t m);

/// Inverse of pair_nm: n is the 2-adic valuation of k+1.
std::pair<std::uint64_t, std::uint64_t> unpair(Digit k);

/// 2^n mod m (m >= 1); works for any n without overflow.
std::uint64_t pow2_mod(std::uint64_t n, std::uint64_t m);

/// Orbit shape of n |-> 2^n mod m: smallest (tail, cycle) with
/// 2^(n+cycle) == 2^n (mod m) for all n >= tail. cycle >= 1.
struct OrbitShape {
  std::uint64_t tail = 0;
  std::uint64_t cycle = 1;
};
OrbitShape pow2_orbit(std::uint64_t m);

/// Ultimately periodic stream over the naturals, held in canonical form:
/// the period is the shortest possible, then the prefix is the shortest.
/// Two UPStreams denote the same element of Baire space iff they compare equal.
class UPStream {
 public:
  UPStream() : prefix_(), period_{0} {}
  UPStream(FinSeq prefix, FinSeq period);

  static UPStream constant(Digit d) { return UPStream({}, {d}); }

  Digit at(std::uint64_t i) const;
  const FinSeq& prefix() const { return prefix_; }
  const FinSeq& period() const { return period_; }

  /// First n digits, unrolled.
  FinSeq take(std::uint64_t n) const;

  /// Digitwise image under f (prefix and period mapped in place).
  UPStream map(const std::function<Digit(Digit)>& f) const;

  /// Stream from position n on.
  UPStream drop(std::uint64_t n) const;

  friend bool operator==(const UPStream& a, const UPStream& b) {
    return a.prefix_ == b.prefix_ && a.period_ == b.period_;
  }
  friend bool operator!=(const UPStream& a, const UPStream& b) { return !(a == b); }
  friend bool operator<(const UPStream& a, const UPStream& b) {
    if (a.prefix_ != b.prefix_) return a.prefix_ < b.prefix_;
    return a.period_ < b.period_;
  }

 private:
  FinSeq prefix_;
  FinSeq period_;  // nonempty
};

/// Read-only view of an infinite stream. Reads must be idempotent, so views
/// wrap pure functions; nothing here may advance hidden state.
class StreamView {
 public:
  StreamView() = default;
  explicit StreamView(std::function<Digit(std::uint64_t)> f) : f_(std::move(f)) {}

  static StreamView of(const UPStream& x) {
    auto p = std::make_shared<UPStream>(x);
    return StreamView([p](std::uint64_t i) { return p->at(i); });
  }
  static StreamView constant(Digit d) {
    return StreamView([d](std::uint64_t) { return d; });
  }

  Digit at(std::uint64_t i) const { return f_(i); }
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::function<Digit(std::uint64_t)> f_;
};

/// Row n of an eventually periodic sequence (prefix, period^omega): the
/// subsequence at positions pair(n, m), itself eventually periodic. Element
/// type is generic so move transcripts project the same way digit streams do.
template <class T>
std::pair<std::vector<T>, std::vector<T>> project_row(const std::vector<T>& prefix,
                                                      const std::vector<T>& period,
                                                      std::uint64_t n) {
  if (period.empty()) throw GameError(ErrKind::InvalidArgument, "empty period");
  const std::uint64_t P = prefix.size();
  const std::uint64_t L = period.size();
  std::vector<T> out_prefix;
  std::uint64_t m0 = 0;
  if (n < 63) {
    const std::uint64_t start = (std::uint64_t{1} << n) - 1;
    const std::uint64_t step = std::uint64_t{1} << (n + 1);
    for (std::uint64_t pos = start; pos < P; pos += step) {
      out_prefix.push_back(prefix[pos]);
      ++m0;
    }
  }
  // Tail positions land in the periodic zone; index them mod L.
  const std::uint64_t a = pow2_mod(n, L);
  const std::uint64_t b = (2 * (m0 % L) + 1) % L;
  const std::uint64_t q0 = (a * b % L + L - (1 + P) % L) % L;
  const std::uint64_t s = (2 * a) % L;
  const std::uint64_t cyc = L / std::gcd(L, s);  // gcd(L,0) == L, so s==0 gives cyc==1
  std::vector<T> out_period;
  out_period.reserve(cyc);
  std::uint64_t q = q0;
  for (std::uint64_t j = 0; j < cyc; ++j) {
    out_period.push_back(period[q]);
    q = (q + s) % L;
  }
  return {std::move(out_prefix), std::move(out_period)};
}

/// project(x, n): the single projection as a canonical UPStream.
UPStream project(const UPStream& x, std::uint64_t n);

/// Row recurrence for an eventually periodic sequence with the given prefix
/// and period lengths: rows r and r + cycle are digitwise identical for all
/// r >= stem. Lets callers quantify over all rows by checking finitely many.
OrbitShape row_recurrence(std::uint64_t prefix_len, std::uint64_t period_len);

/// All projections of x at once: entries for rows < stem + cycle, with
/// row(n) == entry[recurrence(n)] for every n. Entries are deduplicated;
/// `index_of` maps a row to its entry slot.
class ProjectionSpectrum {
 public:
  ProjectionSpectrum(const UPStream& x);

  std::uint64_t stem() const { return shape_.tail; }
  std::uint64_t cycle() const { return shape_.cycle; }
  const UPStream& row(std::uint64_t n) const { return entries_[index_of(n)]; }
  std::size_t index_of(std::uint64_t n) const {
    const std::uint64_t cls = n < shape_.tail ? n : shape_.tail + (n - shape_.tail) % shape_.cycle;
    return slot_[cls];
  }
  const std::vector<UPStream>& entries() const { return entries_; }

 private:
  OrbitShape shape_;
  std::vector<UPStream> entries_;      // distinct streams
  std::vector<std::size_t> slot_;      // class -> entry index
};

/// Interleave a family of rows into one stream: digit k of the result is
/// row nu(k) at position mu(k), where (nu, mu) = unpair(k). The result is in
/// general not ultimately periodic even when every row is, so only a view is
/// exposed; exact machinery works row-wise instead.
StreamView tensor_view(std::function<StreamView(std::uint64_t)> rows);
StreamView tensor_view_up(std::vector<UPStream> explicit_rows, UPStream tail_row);

/// Longest common prefix length; nullopt means the streams are equal.
std::optional<std::uint64_t> lcp(const UPStream& a, const UPStream& b);

/// Value in {0} union {2^-n : n natural}, kept as an exponent.
struct DyadicDistance {
  bool zero = true;
  std::uint64_t exponent = 0;  // meaningful iff !zero

  static DyadicDistance none() { return {true, 0}; }
  static DyadicDistance inv_pow2(std::uint64_t n) { return {false, n}; }

  friend bool operator==(const DyadicDistance& a, const DyadicDistance& b) {
    return a.zero == b.zero && (a.zero || a.exponent == b.exponent);
  }
  /// a <= b as reals.
  friend bool operator<=(const DyadicDistance& a, const DyadicDistance& b) {
    if (a.zero) return true;
    if (b.zero) return false;
    return a.exponent >= b.exponent;
  }
  /// this <= 2^k * rhs, exactly.
  bool leq_scaled(std::uint64_t k, const DyadicDistance& rhs) const {
    if (zero) return true;
    if (rhs.zero) return false;
    return exponent + k >= rhs.exponent;
  }
  static DyadicDistance max(const DyadicDistance& a, const DyadicDistance& b) {
    return (a <= b) ? b : a;
  }
};

DyadicDistance distance(const UPStream& a, const UPStream& b);

}  // namespace rgames
