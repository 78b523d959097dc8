#include "rgames/streams.hpp"

#include <algorithm>
#include <map>

namespace rgames {

const char* to_string(ErrKind k) {
  switch (k) {
    case ErrKind::InvalidArgument: return "invalid argument";
    case ErrKind::Overflow: return "overflow";
    case ErrKind::Parse: return "parse error";
    case ErrKind::NotDelayable: return "inner game not delayable";
    case ErrKind::RuleViolation: return "rule violation";
    case ErrKind::DomainViolation: return "domain violation";
    case ErrKind::NoActivationWithinBound: return "no activation within row bound";
    case ErrKind::NoWitnessWithinBound: return "no witness within bound";
    case ErrKind::WitnessFailure: return "witness failure";
    case ErrKind::BudgetViolation: return "delay budget violation";
    case ErrKind::UnsupportedRegionShape: return "unsupported region shape";
    case ErrKind::UnsupportedGame: return "unsupported game";
    case ErrKind::IncoherentSpec: return "incoherent spec";
    case ErrKind::BadAnchor: return "bad anchor";
    case ErrKind::LimitUndetermined: return "limit undetermined";
    case ErrKind::Undetermined: return "undetermined";
  }
  return "unknown error";
}

Digit pair_nm(std::uint64_t n, std::uint64_t m) {
  // Valid codomain is [0, 2^64-1): the maximal word is reserved since unpair
  // inverts through k+1.
  if (n > 63 || m > (~std::uint64_t{0} - 1) / 2)
    throw GameError(ErrKind::Overflow, "pair: value does not fit 64 bits");
  const std::uint64_t odd = 2 * m + 1;
  if (odd > (~std::uint64_t{0} >> n))
    throw GameError(ErrKind::Overflow, "pair: value does not fit 64 bits");
  return (odd << n) - 1;
}

std::pair<std::uint64_t, std::uint64_t> unpair(Digit k) {
  if (k == ~std::uint64_t{0}) throw GameError(ErrKind::Overflow, "unpair: index too large");
  const std::uint64_t v = k + 1;
  std::uint64_t n = 0;
  std::uint64_t w = v;
  while ((w & 1) == 0) {
    w >>= 1;
    ++n;
  }
  return {n, (w - 1) / 2};
}

std::uint64_t pow2_mod(std::uint64_t n, std::uint64_t m) {
  if (m == 0) throw GameError(ErrKind::InvalidArgument, "pow2_mod: zero modulus");
  if (m == 1) return 0;
  if (m > (std::uint64_t{1} << 32))
    throw GameError(ErrKind::Overflow, "pow2_mod: modulus too large");
  std::uint64_t result = 1 % m;
  std::uint64_t base = 2 % m;
  while (n > 0) {
    if (n & 1) result = result * base % m;
    base = base * base % m;
    n >>= 1;
  }
  return result;
}

OrbitShape pow2_orbit(std::uint64_t m) {
  if (m == 0) throw GameError(ErrKind::InvalidArgument, "pow2_orbit: zero modulus");
  std::map<std::uint64_t, std::uint64_t> seen;
  std::uint64_t r = 1 % m;
  std::uint64_t i = 0;
  while (true) {
    auto it = seen.find(r);
    if (it != seen.end()) return {it->second, i - it->second};
    seen.emplace(r, i);
    r = (2 * r) % m;
    ++i;
  }
}

namespace {

// Shortest period length of `period` repeated forever; always divides |period|.
std::size_t minimal_period_len(const FinSeq& period) {
  const std::size_t L = period.size();
  for (std::size_t d = 1; d < L; ++d) {
    if (L % d != 0) continue;
    bool ok = true;
    for (std::size_t i = d; i < L && ok; ++i) ok = period[i] == period[i % d];
    if (ok) return d;
  }
  return L;
}

}  // namespace

UPStream::UPStream(FinSeq prefix, FinSeq period) : prefix_(std::move(prefix)), period_(std::move(period)) {
  if (period_.empty()) throw GameError(ErrKind::InvalidArgument, "UPStream: empty period");
  period_.resize(minimal_period_len(period_));
  // Fold matching tail digits of the prefix into the period by rotation.
  while (!prefix_.empty() && prefix_.back() == period_.back()) {
    prefix_.pop_back();
    std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
  }
}

Digit UPStream::at(std::uint64_t i) const {
  if (i < prefix_.size()) return prefix_[i];
  return period_[(i - prefix_.size()) % period_.size()];
}

FinSeq UPStream::take(std::uint64_t n) const {
  FinSeq out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(at(i));
  return out;
}

UPStream UPStream::map(const std::function<Digit(Digit)>& f) const {
  FinSeq p = prefix_, q = period_;
  for (auto& d : p) d = f(d);
  for (auto& d : q) d = f(d);
  return UPStream(std::move(p), std::move(q));
}

UPStream UPStream::drop(std::uint64_t n) const {
  FinSeq p;
  for (std::uint64_t i = n; i < prefix_.size(); ++i) p.push_back(prefix_[i]);
  FinSeq q;
  if (n <= prefix_.size()) {
    q = period_;
  } else {
    const std::uint64_t off = (n - prefix_.size()) % period_.size();
    q.insert(q.end(), period_.begin() + off, period_.end());
    q.insert(q.end(), period_.begin(), period_.begin() + off);
  }
  return UPStream(std::move(p), std::move(q));
}

UPStream project(const UPStream& x, std::uint64_t n) {
  auto [pre, per] = project_row(x.prefix(), x.period(), n);
  return UPStream(std::move(pre), std::move(per));
}

OrbitShape row_recurrence(std::uint64_t prefix_len, std::uint64_t period_len) {
  OrbitShape orbit = pow2_orbit(period_len);
  // Past the stem every sampled position sits in the periodic zone:
  // need 2^n - 1 >= prefix_len, i.e. n >= bit_width(prefix_len).
  std::uint64_t n_min = 0;
  while (n_min < 64 && ((n_min >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_min) - 1) < prefix_len))
    ++n_min;
  return {std::max(orbit.tail, n_min), orbit.cycle};
}

ProjectionSpectrum::ProjectionSpectrum(const UPStream& x) {
  shape_ = row_recurrence(x.prefix().size(), x.period().size());
  const std::uint64_t total = shape_.tail + shape_.cycle;
  slot_.resize(total);
  for (std::uint64_t n = 0; n < total; ++n) {
    UPStream p = project(x, n);
    auto it = std::find(entries_.begin(), entries_.end(), p);
    if (it == entries_.end()) {
      slot_[n] = entries_.size();
      entries_.push_back(std::move(p));
    } else {
      slot_[n] = static_cast<std::size_t>(it - entries_.begin());
    }
  }
}

StreamView tensor_view(std::function<StreamView(std::uint64_t)> rows) {
  return StreamView([rows = std::move(rows)](std::uint64_t k) {
    auto [n, m] = unpair(k);
    return rows(n).at(m);
  });
}

StreamView tensor_view_up(std::vector<UPStream> explicit_rows, UPStream tail_row) {
  auto rows = std::make_shared<std::vector<UPStream>>(std::move(explicit_rows));
  auto tail = std::make_shared<UPStream>(std::move(tail_row));
  return StreamView([rows, tail](std::uint64_t k) {
    auto [n, m] = unpair(k);
    if (n < rows->size()) return (*rows)[n].at(m);
    return tail->at(m);
  });
}

std::optional<std::uint64_t> lcp(const UPStream& a, const UPStream& b) {
  if (a == b) return std::nullopt;
  const std::uint64_t P = std::max(a.prefix().size(), b.prefix().size());
  const std::uint64_t L = std::lcm<std::uint64_t>(a.period().size(), b.period().size());
  const std::uint64_t bound = P + L + 1;
  for (std::uint64_t i = 0; i < bound; ++i)
    if (a.at(i) != b.at(i)) return i;
  throw GameError(ErrKind::InvalidArgument, "lcp: unequal canonical forms agree past the bound");
}

DyadicDistance distance(const UPStream& a, const UPStream& b) {
  auto l = lcp(a, b);
  if (!l) return DyadicDistance::none();
  return DyadicDistance::inv_pow2(*l);
}

}  // namespace rgames
