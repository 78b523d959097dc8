#include <doctest.h>

#include <algorithm>

#include "rgames/engine.hpp"
#include "rgames/game.hpp"
#include "rgames/rng.hpp"
#include "test_util.hpp"

using namespace rgames;
using testutil::script_strategy;

namespace {

// Independent oracle for the eraser interpretation, written before any
// expected value below was frozen: the last move either erases the final
// output digit or appends one.
FinSeq eraser_naive(const MoveSeq& s) {
  if (s.empty()) return {};
  MoveSeq head(s.begin(), s.end() - 1);
  FinSeq h = eraser_naive(head);
  const Move& last = s.back();
  if (last.is_erase()) {
    if (!h.empty()) h.pop_back();
    return h;
  }
  h.push_back(last.nat);
  return h;
}

MoveSeq nats(std::initializer_list<Digit> ds) {
  MoveSeq out;
  for (Digit d : ds) out.push_back(Move::nat_move(d));
  return out;
}

RuleVerdict verdict_of(const GameSpec& G, const LassoRun& r) {
  LassoContext ctx;
  return G.up_verdict(r, ctx);
}

UPStream output_of(const GameSpec& G, const LassoRun& r) {
  LassoContext ctx;
  return G.up_output(r, ctx);
}

LassoRun lasso_from_moves(const MoveSeq& prefix, const MoveSeq& period, Digit i_digit = 0) {
  LassoRun r;
  for (const Move& m : prefix) r.prefix.push_back({i_digit, m});
  for (const Move& m : period) r.period.push_back({i_digit, m});
  return r;
}

// Random move scripts per game kind, unconstrained by the rules.
Move random_move(Rng& rng, GameKind kind, bool with_pass) {
  const auto roll = rng.below(100);
  switch (kind) {
    case GameKind::L:
    case GameKind::KLip:
      if (with_pass && roll < 30) return Move::pass();
      return Move::nat_move(rng.below(5));
    case GameKind::W:
      if (roll < 30) return Move::pass();
      return Move::nat_move(rng.below(5));
    case GameKind::E:
      if (with_pass && roll < 20) return Move::pass();
      if (roll < 55) return Move::erase();
      return Move::nat_move(rng.below(5));
    case GameKind::Bt:
      if (roll < 20) return Move::pass();
      if (roll < 35) return Move::bt();
      return Move::nat_move(rng.below(5));
    case GameKind::M:
      if (with_pass && roll < 20) return Move::pass();
      if (roll < 55) return Move::row_move_pass(rng.below(4));
      return Move::row_move_nat(rng.below(4), rng.below(5));
  }
  return Move::pass();
}

MoveSeq random_script(Rng& rng, GameKind kind, std::uint64_t len, bool with_pass = false) {
  MoveSeq out;
  for (std::uint64_t i = 0; i < len; ++i) out.push_back(random_move(rng, kind, with_pass));
  return out;
}

// Rule-respecting random lassos per base game, for output consistency checks.
LassoRun legal_lasso(Rng& rng, const GameSpec& G) {
  const std::uint64_t pl = rng.below(6);
  const std::uint64_t ql = 1 + rng.below(5);
  MoveSeq prefix, period;
  switch (G.kind) {
    case GameKind::L:
      prefix = random_script(rng, GameKind::L, pl);
      period = random_script(rng, GameKind::L, ql);
      break;
    case GameKind::W: {
      prefix = random_script(rng, GameKind::W, pl);
      period = random_script(rng, GameKind::W, ql);
      period.push_back(Move::nat_move(rng.below(5)));
      break;
    }
    case GameKind::KLip: {
      for (std::uint64_t i = 0; i < G.klip_k; ++i) prefix.push_back(Move::pass());
      for (std::uint64_t i = 0; i < pl; ++i) prefix.push_back(Move::nat_move(rng.below(5)));
      period = random_script(rng, GameKind::L, ql);
      break;
    }
    case GameKind::E: {
      prefix = random_script(rng, GameKind::E, pl);
      period = random_script(rng, GameKind::E, ql);
      // Top the period up with digits until it strictly grows the output.
      std::int64_t net = 0;
      for (const Move& m : period) net += m.is_nat() ? 1 : -1;
      while (net <= 0) {
        period.push_back(Move::nat_move(rng.below(5)));
        ++net;
      }
      break;
    }
    case GameKind::Bt: {
      prefix = random_script(rng, GameKind::Bt, pl);
      for (std::uint64_t i = 0; i < ql; ++i) {
        period.push_back(rng.below(3) == 0 ? Move::pass() : Move::nat_move(rng.below(5)));
      }
      period.push_back(Move::nat_move(rng.below(5)));
      break;
    }
    case GameKind::M: {
      const std::uint64_t live = rng.below(4);
      for (std::uint64_t i = 0; i < pl; ++i)
        period.push_back(rng.below(2) == 0 ? Move::row_move_pass(rng.below(4))
                                           : Move::row_move_nat(rng.below(4), rng.below(5)));
      std::swap(prefix, period);
      for (std::uint64_t i = 0; i < ql; ++i)
        period.push_back(rng.below(2) == 0 ? Move::row_move_pass(rng.below(4))
                                           : Move::row_move_nat(live, rng.below(5)));
      period.push_back(Move::row_move_nat(live, rng.below(5)));
      // Strip writes to other rows from the period.
      for (Move& m : period)
        if (m.is_row() && !m.inner_pass && m.row != live) m = Move::row_move_pass(m.row);
      break;
    }
  }
  return lasso_from_moves(prefix, period);
}

}  // namespace

TEST_CASE("eraser stack evaluation matches the naive recursion") {
  Rng rng(0xE5A5E);
  for (int i = 0; i < 500; ++i) {
    MoveSeq s;
    const std::uint64_t len = rng.below(24);
    for (std::uint64_t j = 0; j < len; ++j)
      s.push_back(rng.below(2) == 0 ? Move::erase() : Move::nat_move(rng.below(8)));
    CHECK(eraser_eval(s) == eraser_naive(s));
  }
}

TEST_CASE("interpreter examples for the skip, eraser and back-track games") {
  SUBCASE("skip game drops passes and commits digits") {
    const GameSpec W = make_base_game(GameKind::W);
    auto interp = W.interpreter_factory();
    for (const Move& m : {Move::pass(), Move::nat_move(5), Move::pass(), Move::nat_move(7)})
      interp->step(0, m);
    CHECK(interp->tentative() == FinSeq{5, 7});
    CHECK(interp->committed_len() == 2);
  }
  SUBCASE("eraser game pops the last digit") {
    // Expected value from the recursion oracle, computed before comparing.
    const MoveSeq play{Move::nat_move(1), Move::nat_move(2), Move::erase(), Move::nat_move(3)};
    const FinSeq expect = eraser_naive(play);
    CHECK(expect == FinSeq{1, 3});
    const GameSpec E = make_base_game(GameKind::E);
    auto interp = E.interpreter_factory();
    for (const Move& m : play) interp->step(0, m);
    CHECK(interp->tentative() == expect);
  }
  SUBCASE("back-track game wipes everything before the marker") {
    const GameSpec Bt = make_base_game(GameKind::Bt);
    auto interp = Bt.interpreter_factory();
    for (const Move& m : {Move::nat_move(1), Move::nat_move(2), Move::bt(), Move::nat_move(4)})
      interp->step(0, m);
    CHECK(interp->tentative() == FinSeq{4});
  }
}

TEST_CASE("lasso verdicts and outputs of the six base games") {
  SUBCASE("digit game") {
    const GameSpec L = make_base_game(GameKind::L);
    const LassoRun r = lasso_from_moves(nats({3}), nats({5}));
    CHECK(verdict_of(L, r) == RuleVerdict::InRules);
    CHECK(output_of(L, r) == UPStream({3}, {5}));
  }
  SUBCASE("skip game") {
    const GameSpec W = make_base_game(GameKind::W);
    const LassoRun ok = lasso_from_moves({}, {Move::pass(), Move::nat_move(7)});
    CHECK(verdict_of(W, ok) == RuleVerdict::InRules);
    CHECK(output_of(W, ok) == UPStream({}, {7}));
    const LassoRun stall = lasso_from_moves(nats({1, 2}), {Move::pass()});
    CHECK(verdict_of(W, stall) == RuleVerdict::OutRules);
  }
  SUBCASE("delayed digit game") {
    const GameSpec K = make_base_game(GameKind::KLip, 2);
    const LassoRun ok =
        lasso_from_moves({Move::pass(), Move::pass(), Move::nat_move(4)}, nats({6}));
    CHECK(verdict_of(K, ok) == RuleVerdict::InRules);
    CHECK(output_of(K, ok) == UPStream({4}, {6}));
    // A pass recurring in the period would land at turns past the bound.
    CHECK(verdict_of(K, lasso_from_moves({Move::pass()}, nats({6}))) == RuleVerdict::OutRules);
    CHECK(verdict_of(K, lasso_from_moves({Move::pass(), Move::pass()}, {Move::pass()})) ==
          RuleVerdict::OutRules);
  }
  SUBCASE("eraser game") {
    const GameSpec E = make_base_game(GameKind::E);
    const LassoRun r = lasso_from_moves({Move::nat_move(1), Move::nat_move(2), Move::erase()},
                                        {Move::nat_move(3), Move::erase(), Move::nat_move(4)});
    CHECK(verdict_of(E, r) == RuleVerdict::InRules);
    CHECK(output_of(E, r) == UPStream({1}, {4}));
    const LassoRun deep = lasso_from_moves({}, {Move::erase(), Move::nat_move(5), Move::nat_move(6)});
    CHECK(verdict_of(E, deep) == RuleVerdict::InRules);
    CHECK(output_of(E, deep) == UPStream({}, {5}));
    CHECK(verdict_of(E, lasso_from_moves({}, {Move::erase(), Move::nat_move(5)})) ==
          RuleVerdict::OutRules);
  }
  SUBCASE("back-track game") {
    const GameSpec B = make_base_game(GameKind::Bt);
    const LassoRun r =
        lasso_from_moves({Move::nat_move(1), Move::nat_move(2), Move::bt()}, nats({4}));
    CHECK(verdict_of(B, r) == RuleVerdict::InRules);
    CHECK(output_of(B, r) == UPStream({}, {4}));
    CHECK(verdict_of(B, lasso_from_moves({}, {Move::nat_move(1), Move::bt()})) ==
          RuleVerdict::OutRules);
    CHECK(verdict_of(B, lasso_from_moves(nats({1}), {Move::pass()})) == RuleVerdict::OutRules);
  }
  SUBCASE("multitape game") {
    const GameSpec M = make_base_game(GameKind::M);
    const LassoRun r = lasso_from_moves({Move::row_move_nat(3, 9)},
                                        {Move::row_move_nat(3, 1), Move::row_move_pass(5)});
    CHECK(verdict_of(M, r) == RuleVerdict::InRules);
    CHECK(output_of(M, r) == UPStream({9}, {1}));
    CHECK(verdict_of(M, lasso_from_moves({}, {Move::row_move_nat(3, 1), Move::row_move_nat(5, 1)})) ==
          RuleVerdict::OutRules);
    CHECK(verdict_of(M, lasso_from_moves({}, {Move::row_move_pass(3)})) == RuleVerdict::OutRules);
  }
  SUBCASE("output on an out-of-rules lasso throws") {
    const GameSpec W = make_base_game(GameKind::W);
    LassoContext ctx;
    CHECK_THROWS_AS(W.up_output(lasso_from_moves({}, {Move::pass()}), ctx), GameError);
  }
}

TEST_CASE("pass closure of the digit game behaves as the skip game") {
  const GameSpec P = p_close(make_base_game(GameKind::L));
  const GameSpec W = make_base_game(GameKind::W);
  Rng rng(0x9C105E);
  for (int i = 0; i < 50; ++i) {
    const MoveSeq prefix = random_script(rng, GameKind::W, rng.below(8));
    const MoveSeq period = random_script(rng, GameKind::W, 1 + rng.below(6));
    const auto tau = script_strategy(prefix, period);
    const UPStream x = rng.up_stream(4, 4, 5);
    const RunResult rp = run_to_depth(P, StreamView::of(x), *tau, 64);
    const RunResult rw = run_to_depth(W, StreamView::of(x), *tau, 64);
    CHECK(rp.violated == rw.violated);
    CHECK(rp.tentative == rw.tentative);
    CHECK(rp.committed == rw.committed);
    const LassoRun lasso = lasso_from_moves(prefix, period);
    CHECK(verdict_of(P, lasso) == verdict_of(W, lasso));
    if (verdict_of(P, lasso) == RuleVerdict::InRules)
      CHECK(output_of(P, lasso) == output_of(W, lasso));
  }
}

TEST_CASE("pass closure edge behaviour") {
  const GameSpec P = p_close(make_base_game(GameKind::L));
  SUBCASE("eventually all passes is outside the rules") {
    CHECK(verdict_of(P, lasso_from_moves(nats({1}), {Move::pass()})) == RuleVerdict::OutRules);
  }
  SUBCASE("pass-free play matches the wrapped game exactly") {
    const GameSpec L = make_base_game(GameKind::L);
    const LassoRun r = lasso_from_moves(nats({4, 2}), nats({7, 1}));
    CHECK(verdict_of(P, r) == verdict_of(L, r));
    CHECK(output_of(P, r) == output_of(L, r));
  }
  SUBCASE("closing an already pass-closed game is the identity") {
    const GameSpec W = make_base_game(GameKind::W);
    const GameSpec W2 = p_close(W);
    CHECK(W2.kind == GameKind::W);
    CHECK(W2.p_closed);
  }
  SUBCASE("closing a game with native passes that is not flagged throws") {
    CHECK_THROWS_AS(p_close(make_base_game(GameKind::KLip, 2)), GameError);
  }
}

TEST_CASE("delaying by zero is the identity and delaying the digit game is the delayed game") {
  const GameSpec L = make_base_game(GameKind::L);
  SUBCASE("zero delay") {
    const GameSpec D0 = delay(L, 0);
    const LassoRun r = lasso_from_moves(nats({1}), nats({2}));
    CHECK(verdict_of(D0, r) == verdict_of(L, r));
    CHECK(output_of(D0, r) == output_of(L, r));
  }
  SUBCASE("delay k matches the k-delayed base game on random scripts") {
    for (std::uint64_t k : {1u, 2u, 3u}) {
      const GameSpec D = delay(L, k);
      const GameSpec K = make_base_game(GameKind::KLip, k);
      Rng rng(0xD31A + k);
      for (int i = 0; i < 50; ++i) {
        // Half the scripts follow the pass discipline, half are arbitrary.
        MoveSeq prefix, period;
        if (rng.below(2) == 0) {
          for (std::uint64_t j = 0; j < k; ++j) prefix.push_back(Move::pass());
          for (std::uint64_t j = 0; j < rng.below(5); ++j)
            prefix.push_back(Move::nat_move(rng.below(5)));
          period = random_script(rng, GameKind::L, 1 + rng.below(4));
        } else {
          prefix = random_script(rng, GameKind::L, rng.below(6), true);
          period = random_script(rng, GameKind::L, 1 + rng.below(4), true);
        }
        const auto tau = script_strategy(prefix, period);
        const UPStream x = rng.up_stream(3, 3, 5);
        const RunResult rd = run_to_depth(D, StreamView::of(x), *tau, 64);
        const RunResult rk = run_to_depth(K, StreamView::of(x), *tau, 64);
        CHECK(rd.violated == rk.violated);
        CHECK(rd.tentative == rk.tentative);
        CHECK(rd.committed == rk.committed);
        const LassoRun lasso = lasso_from_moves(prefix, period);
        CHECK(verdict_of(D, lasso) == verdict_of(K, lasso));
        if (verdict_of(D, lasso) == RuleVerdict::InRules)
          CHECK(output_of(D, lasso) == output_of(K, lasso));
      }
    }
  }
  SUBCASE("a digit at turn zero under delay two is violated") {
    const GameSpec D = delay(L, 2);
    const auto tau = script_strategy(nats({5}), nats({5}));
    const RunResult r = run_to_depth(D, StreamView::constant(0), *tau, 4);
    CHECK(r.violated);
  }
}

TEST_CASE("run engine examples") {
  SUBCASE("constant strategy in the skip game") {
    const GameSpec W = make_base_game(GameKind::W);
    const auto tau = const_strategy(UPStream({}, {0}));
    const RunResult r = run_to_depth(W, StreamView::constant(3), *tau, 8);
    CHECK(!r.violated);
    CHECK(r.tentative == FinSeq{0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(r.committed == 8);
  }
  SUBCASE("identity after two forced passes") {
    const GameSpec K = make_base_game(GameKind::KLip, 2);
    DelayTransducer f = identity_transducer();
    f.budget = 2;
    const auto tau = lipschitz_compile(f);
    FinSeq input{4, 7, 1, 9};
    const RunResult r = run_to_depth(
        K, StreamView([input](std::uint64_t i) { return i < input.size() ? input[i] : 0; }),
        *tau, 4);
    CHECK(!r.violated);
    CHECK(r.tentative == FinSeq{4, 7});
  }
  SUBCASE("violation is absorbing across depths") {
    const GameSpec L = make_base_game(GameKind::L);
    MoveSeq prefix = nats({1, 2, 3});
    prefix.push_back(Move::pass());  // illegal in the digit game at turn 3
    const auto tau = script_strategy(prefix, nats({5}));
    const RunResult base = run_to_depth(L, StreamView::constant(0), *tau, 4);
    CHECK(base.violated);
    for (std::uint64_t d : {5u, 6u, 10u}) {
      const RunResult r = run_to_depth(L, StreamView::constant(0), *tau, d);
      CHECK(r.violated);
      CHECK(r.violation_reason == base.violation_reason);
    }
  }
}

TEST_CASE("monitor absorption on random scripts") {
  Rng rng(0xAB50B);
  for (GameKind kind :
       {GameKind::L, GameKind::W, GameKind::KLip, GameKind::E, GameKind::Bt, GameKind::M}) {
    const GameSpec G = make_base_game(kind, 2);
    for (int i = 0; i < 30; ++i) {
      auto mon = G.monitor_factory();
      bool seen = false;
      for (int t = 0; t < 40; ++t) {
        // Deliberately mix in moves from every alphabet.
        const Move m = random_move(rng, static_cast<GameKind>(rng.below(6)), true);
        const StepStatus st = mon->step(rng.below(4), m);
        if (seen) CHECK(st == StepStatus::Violated);
        if (st == StepStatus::Violated) {
          seen = true;
          CHECK(mon->violated());
          CHECK(!mon->violation_reason().empty());
        }
      }
    }
  }
}

TEST_CASE("interpreter commitment is monotone and stable") {
  Rng rng(0xC0311);
  for (GameKind kind :
       {GameKind::L, GameKind::W, GameKind::KLip, GameKind::E, GameKind::Bt, GameKind::M}) {
    const GameSpec G = make_base_game(kind, 2);
    for (int i = 0; i < 200; ++i) {
      auto interp = G.interpreter_factory();
      std::uint64_t prev = 0;
      FinSeq frozen;
      for (int t = 0; t < 32; ++t) {
        interp->step(rng.below(4), random_move(rng, kind, kind == GameKind::KLip));
        const std::uint64_t c = interp->committed_len();
        const FinSeq tent = interp->tentative();
        CHECK(c >= prev);
        CHECK(c <= tent.size());
        // The previously committed digits must still be there unchanged.
        CHECK(std::equal(frozen.begin(), frozen.end(), tent.begin()));
        frozen.assign(tent.begin(), tent.begin() + static_cast<std::ptrdiff_t>(c));
        prev = c;
      }
    }
  }
}

TEST_CASE("exact outputs agree with committed run prefixes") {
  Rng rng(0x0CA7);
  std::vector<GameSpec> games;
  games.push_back(make_base_game(GameKind::L));
  games.push_back(make_base_game(GameKind::W));
  games.push_back(make_base_game(GameKind::KLip, 3));
  games.push_back(make_base_game(GameKind::E));
  games.push_back(make_base_game(GameKind::Bt));
  games.push_back(make_base_game(GameKind::M));
  for (const GameSpec& G : games) {
    for (int i = 0; i < 60; ++i) {
      const LassoRun lasso = legal_lasso(rng, G);
      REQUIRE(verdict_of(G, lasso) == RuleVerdict::InRules);
      const UPStream out = output_of(G, lasso);
      MoveSeq prefix, period;
      for (const auto& e : lasso.prefix) prefix.push_back(e.ii);
      for (const auto& e : lasso.period) period.push_back(e.ii);
      const auto tau = script_strategy(prefix, period);
      const RunResult r = run_to_depth(G, StreamView::constant(0), *tau, 64);
      CHECK(!r.violated);
      const std::uint64_t c = std::min<std::uint64_t>(r.committed, r.tentative.size());
      for (std::uint64_t j = 0; j < c; ++j) CHECK(out.at(j) == r.tentative[j]);
    }
  }
}

TEST_CASE("adjudication of full plays") {
  const DetOmegaAutomaton full = full_space();
  const DetOmegaAutomaton empty = empty_set();
  SUBCASE("trivial payoffs") {
    const GameSpec L = make_base_game(GameKind::L);
    const UPStream x({3, 1}, {4});
    CHECK(adjudicate_up(L, x, *id_strategy(), full, full).winner == Player::II);
    CHECK(adjudicate_up(L, x, *id_strategy(), full, empty).winner == Player::I);
  }
  SUBCASE("identity copy preserves the head cylinder") {
    const GameSpec W = make_base_game(GameKind::W);
    const DetOmegaAutomaton n0 = cylinder({0});
    CHECK(adjudicate_up(W, UPStream({}, {0}), *id_strategy(), n0, n0).winner == Player::II);
    CHECK(adjudicate_up(W, UPStream({}, {1}), *id_strategy(), n0, n0).winner == Player::II);
  }
  SUBCASE("a rule-breaking strategy loses unless I left the domain") {
    const GameSpec L = make_base_game(GameKind::L);
    const auto stall = script_strategy({}, {Move::pass()});
    CHECK(adjudicate_up(L, UPStream({}, {0}), *stall, full, full).winner == Player::I);
    GameSpec restricted = make_base_game(GameKind::L, 0, cylinder({7}));
    CHECK(adjudicate_up(restricted, UPStream({}, {0}), *stall, full, full).winner == Player::II);
  }
}
