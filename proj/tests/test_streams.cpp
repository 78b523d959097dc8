#include <doctest.h>

#include <optional>

#include "rgames/rng.hpp"
#include "rgames/streams.hpp"

using namespace rgames;

namespace {

// Independent oracle: find (n,m) with 2^n(2m+1)-1 == k by exhaustive search.
std::optional<std::pair<std::uint64_t, std::uint64_t>> unpair_by_search(Digit k, std::uint64_t bound) {
  for (std::uint64_t n = 0; n <= bound; ++n)
    for (std::uint64_t m = 0; m <= bound; ++m)
      if ((std::uint64_t{1} << n) * (2 * m + 1) - 1 == k) return {{n, m}};
  return std::nullopt;
}

}  // namespace

TEST_CASE("pairing formula on the small table") {
  CHECK(pair_nm(0, 0) == 0);
  CHECK(pair_nm(1, 0) == 1);
  CHECK(pair_nm(0, 1) == 2);
}

TEST_CASE("unpair matches exhaustive search") {
  // Oracle values computed first, then frozen.
  auto o5 = unpair_by_search(5, 8);
  auto o7 = unpair_by_search(7, 8);
  REQUIRE(o5.has_value());
  REQUIRE(o7.has_value());
  CHECK(*o5 == std::pair<std::uint64_t, std::uint64_t>{1, 1});
  CHECK(*o7 == std::pair<std::uint64_t, std::uint64_t>{3, 0});

  CHECK(unpair(0) == std::pair<std::uint64_t, std::uint64_t>{0, 0});
  CHECK(unpair(5) == *o5);
  CHECK(unpair(7) == *o7);
}

TEST_CASE("pair and unpair are mutually inverse") {
  for (Digit k = 0; k < 100000; ++k) {
    auto [n, m] = unpair(k);
    CHECK(pair_nm(n, m) == k);
  }
  for (std::uint64_t n = 0; n < 300; ++n)
    for (std::uint64_t m = 0; m < 300; ++m) {
      // 2^n(2m+1)-1 must fit a 64-bit word; beyond that the coder refuses.
      const bool fits = n <= 63 && (2 * m + 1) <= (~std::uint64_t{0} >> n);
      if (fits) {
        CHECK(unpair(pair_nm(n, m)) == std::pair<std::uint64_t, std::uint64_t>{n, m});
      } else {
        CHECK_THROWS_AS((void)pair_nm(n, m), GameError);
      }
    }
}

TEST_CASE("indexing an ultimately periodic stream") {
  CHECK(UPStream({}, {0}).at(7) == 0);
  UPStream x({3}, {1, 2});
  CHECK(x.at(0) == 3);
  // Oracle: unroll 8 digits by hand: 3 1 2 1 2 1 2 1.
  const FinSeq unrolled = {3, 1, 2, 1, 2, 1, 2, 1};
  CHECK(x.take(8) == unrolled);
  CHECK(x.at(4) == unrolled[4]);
  CHECK(x.at(4) == 2);
}

TEST_CASE("canonical form minimizes period then prefix") {
  CHECK(UPStream({}, {0, 0, 0}) == UPStream::constant(0));
  CHECK(UPStream({0, 1}, {0, 1}) == UPStream({}, {0, 1}));
  CHECK(UPStream({3, 1}, {2, 1}) == UPStream({3}, {1, 2}));
  // Two random unrollings of one denotation canonicalize identically.
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    UPStream x = rng.up_stream(4, 5, 3);
    const std::uint64_t extra = rng.below(7);
    const std::uint64_t reps = 1 + rng.below(3);
    FinSeq pre = x.take(x.prefix().size() + extra);
    FinSeq per;
    for (std::uint64_t r = 0; r < reps; ++r)
      for (std::uint64_t i = 0; i < x.period().size(); ++i)
        per.push_back(x.at(x.prefix().size() + extra + i + r * x.period().size()));
    CHECK(UPStream(pre, per) == x);
  }
}

TEST_CASE("projection samples the pairing progression") {
  CHECK(project(UPStream::constant(0), 0) == UPStream::constant(0));
  CHECK(project(UPStream::constant(0), 9) == UPStream::constant(0));

  // Oracle for period [0,1] at n=1: positions 2(2m+1)-1 = 1,5,9,... are odd,
  // hence all read digit 1; verify by 16-digit unroll first.
  UPStream x({}, {0, 1});
  FinSeq sampled;
  for (std::uint64_t m = 0; m < 16; ++m) sampled.push_back(x.at(pair_nm(1, m)));
  CHECK(sampled == FinSeq(16, 1));
  CHECK(project(x, 1) == UPStream::constant(1));

  // Prefix [9] then constant 0: every row with 2^n > 1 misses position 0.
  UPStream y({9}, {0});
  for (std::uint64_t n = 1; n <= 12; ++n) CHECK(project(y, n) == UPStream::constant(0));
  CHECK(project(y, 0).at(0) == 9);
}

TEST_CASE("projection coherence on random streams") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    UPStream x = rng.up_stream(6, 8, 4);
    for (std::uint64_t n = 0; n <= 12; ++n) {
      UPStream p = project(x, n);
      for (std::uint64_t m = 0; m <= 200; ++m) CHECK(p.at(m) == x.at(pair_nm(n, m)));
    }
  }
}

TEST_CASE("projection spectrum agrees with direct projection") {
  ProjectionSpectrum trivial(UPStream::constant(0));
  CHECK(trivial.entries().size() == 1);

  Rng rng(37);
  for (int t = 0; t < 200; ++t) {
    UPStream x = rng.up_stream(6, 8, 4);
    ProjectionSpectrum spec(x);
    for (std::uint64_t n = 0; n <= 12; ++n) CHECK(spec.row(n) == project(x, n));
    // Deep rows follow the recurrence too; spot-check via project on modular path.
    for (std::uint64_t n : {20ULL, 33ULL, 64ULL, 100ULL}) CHECK(spec.row(n) == project(x, n));
  }
}

TEST_CASE("tensor view interleaves rows by the pairing") {
  StreamView zeros = tensor_view([](std::uint64_t) { return StreamView::constant(0); });
  for (std::uint64_t k = 0; k < 32; ++k) CHECK(zeros.at(k) == 0);

  // Oracle: positions of row 0 are pair(0,m); unroll 16 digits against pair().
  StreamView marked = tensor_view([](std::uint64_t n) {
    return n == 0 ? StreamView::constant(1) : StreamView::constant(0);
  });
  std::vector<bool> expect(16, false);
  for (std::uint64_t m = 0; pair_nm(0, m) < 16; ++m) expect[pair_nm(0, m)] = true;
  for (std::uint64_t k = 0; k < 16; ++k) {
    CHECK((expect[k] ? 1 : 0) == marked.at(k));
    CHECK(expect[k] == (k % 2 == 0));
  }

  // Coding round trip: projecting a tensor recovers the row.
  Rng rng(5);
  UPStream a = rng.up_stream(3, 4, 5);
  UPStream b = rng.up_stream(3, 4, 5);
  StreamView t = tensor_view_up({a, b}, UPStream::constant(0));
  for (std::uint64_t m = 0; m < 64; ++m) {
    CHECK(t.at(pair_nm(0, m)) == a.at(m));
    CHECK(t.at(pair_nm(1, m)) == b.at(m));
  }
}

TEST_CASE("lcp and dyadic distance") {
  UPStream x({}, {0, 1});
  CHECK(distance(x, x) == DyadicDistance::none());
  CHECK(!lcp(x, x).has_value());

  UPStream y({1}, {0, 1});
  auto l = lcp(x, y);
  REQUIRE(l.has_value());
  CHECK(*l == 0);
  CHECK(distance(x, y) == DyadicDistance::inv_pow2(0));

  // Same denotation under a redundant representation: distance 0.
  CHECK(distance(UPStream({}, {0, 1}), UPStream({0, 1}, {0, 1})) == DyadicDistance::none());
  CHECK(UPStream({}, {0, 1}) == UPStream({0, 1}, {0, 1}));

  DyadicDistance half = DyadicDistance::inv_pow2(1);
  DyadicDistance quarter = DyadicDistance::inv_pow2(2);
  CHECK(quarter <= half);
  CHECK(!(half <= quarter));
  CHECK(quarter.leq_scaled(1, half));
  CHECK(half.leq_scaled(1, quarter));
  CHECK(!half.leq_scaled(0, quarter));
}

TEST_CASE("distance is an ultrametric on sampled triples") {
  Rng rng(41);
  for (int t = 0; t < 500; ++t) {
    UPStream x = rng.up_stream(4, 4, 2);
    UPStream y = rng.up_stream(4, 4, 2);
    UPStream z = rng.up_stream(4, 4, 2);
    CHECK(distance(x, z) <= DyadicDistance::max(distance(x, y), distance(y, z)));
  }
}

TEST_CASE("stream helpers: take, map, drop") {
  UPStream x({5}, {1, 2});
  CHECK(x.map([](Digit d) { return d + 1; }) == UPStream({6}, {2, 3}));
  CHECK(x.drop(0) == x);
  CHECK(x.drop(1) == UPStream({}, {1, 2}));
  CHECK(x.drop(2) == UPStream({}, {2, 1}));
  CHECK(x.drop(4) == UPStream({}, {2, 1}));
}

TEST_CASE("row recurrence really repeats rows") {
  Rng rng(53);
  for (int t = 0; t < 100; ++t) {
    UPStream x = rng.up_stream(5, 7, 3);
    OrbitShape r = row_recurrence(x.prefix().size(), x.period().size());
    for (std::uint64_t n = r.tail; n < r.tail + 2 * r.cycle + 3; ++n)
      CHECK(project(x, n) == project(x, n + r.cycle));
  }
}
