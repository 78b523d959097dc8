#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "rgames/composite.hpp"
#include "rgames/engine.hpp"
#include "rgames/machines.hpp"
#include "rgames/omega.hpp"
#include "rgames/rng.hpp"
#include "rgames/strategy.hpp"
#include "test_util.hpp"

using namespace rgames;
using testutil::random_up;

namespace {

template <class F>
std::optional<ErrKind> err_of(F&& f) {
  try {
    f();
    return std::nullopt;
  } catch (const GameError& e) {
    return e.kind();
  }
}

// Assembles a schema from explicit rows, with the standard never-activating
// tail and the bounds the schedule's recurrence dictates.
CompositeStrategy schema(std::map<std::uint64_t, RowComponent> rows, const ControlSchedule& cs) {
  CompositeStrategy t;
  const std::uint64_t top = rows.empty() ? 0 : rows.rbegin()->first + 1;
  t.rows = std::move(rows);
  t.tail = make_default_tail(cs);
  const OrbitShape rec = cs.recurrence();
  t.row_bound = std::max(top, 2 * rec.tail);
  t.tail_cycle = std::max<std::uint64_t>(rec.cycle, 1);
  return t;
}

// {z : z(n) = m}: a chain of n skip states, then a branch into absorbing
// accept and reject sinks.
DetOmegaAutomaton digit_eq(std::uint64_t n, Digit m) {
  DetOmegaAutomaton A;
  const State branch = static_cast<State>(n);
  const State acc = branch + 1;
  const State rej = branch + 2;
  A.trans.resize(n + 3);
  A.priority.assign(n + 3, 1);
  A.priority[acc] = 0;
  A.initial = 0;
  for (State q = 0; q < branch; ++q) A.trans[q].otherwise = q + 1;
  A.trans[branch].edges.emplace(m, acc);
  A.trans[branch].otherwise = rej;
  A.trans[acc].otherwise = acc;
  A.trans[rej].otherwise = rej;
  return A;
}

// Plays PASS while the first n digits stay zero and 0s from then on; any
// nonzero digit inside the window switches to 1s forever.  Induces, in the
// skip game, the continuous map x -> 0^w if x restricted to n is all zero,
// else 1^w.
MealyStrategy prefix_zero_probe(std::uint64_t n) {
  MealyStrategy m;
  m.nodes.resize(n + 2);
  const std::uint32_t good = static_cast<std::uint32_t>(n);
  const std::uint32_t bad = good + 1;
  for (std::uint32_t j = 0; j < n; ++j) {
    MealyEdge step;
    step.next = j + 1;
    step.out = Move::pass();
    m.nodes[j].edges.emplace(0, step);
    MealyEdge fail;
    fail.next = bad;
    fail.out = Move::nat_move(1);
    m.nodes[j].otherwise = fail;
  }
  MealyEdge zero;
  zero.next = good;
  zero.out = Move::nat_move(0);
  m.nodes[good].otherwise = zero;
  MealyEdge one;
  one.next = bad;
  one.out = Move::nat_move(1);
  m.nodes[bad].otherwise = one;
  return m;
}

// Machine whose every emission is a digit (echo or literal), so it is legal
// in the plain digit game and usable as a packed row.
MealyStrategy random_digit_mealy(Rng& rng, std::uint32_t max_states = 3, Digit max_digit = 3) {
  const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(max_states));
  MealyStrategy m;
  m.nodes.resize(n);
  m.initial = static_cast<std::uint32_t>(rng.below(n));
  const auto rand_edge = [&] {
    MealyEdge e;
    e.next = static_cast<std::uint32_t>(rng.below(n));
    if (rng.below(3) == 0)
      e.echo = true;
    else
      e.out = Move::nat_move(rng.below(max_digit + 1));
    return e;
  };
  for (auto& node : m.nodes) {
    for (Digit d = 0; d <= max_digit; ++d)
      if (rng.below(2) == 0) node.edges.emplace(d, rand_edge());
    node.otherwise = rand_edge();
  }
  return m;
}

// Player I for the digit game with payoff (complement of Z, Z): plays 0
// until the reply at a turn congruent to 1 mod 4 shows a nonzero digit,
// then plays 1 forever.  Against a simulated board that relays II's digits
// on odd rows, those turns carry exactly II's output stream, so either the
// output stays 0^w while x does (payoff fails for II), or the output leaves
// Z while x leaves the complement's complement (payoff fails again).
class WatchRowOneI final : public IStrategy {
 public:
  std::unique_ptr<ISession> session() const override { return std::make_unique<S>(); }

 private:
  class S final : public ISession {
   public:
    Digit next() override { return spoil_ ? 1 : 0; }
    void on_reply(const Move& m) override {
      if (t_ % 4 == 1 && m.is_nat() && m.nat != 0) spoil_ = true;
      ++t_;
    }

   private:
    bool spoil_ = false;
    std::uint64_t t_ = 0;
  };
};

struct DigitPlay {
  UPStream x;  // I's digit stream
  UPStream y;  // II's digit stream
};

// Expected joint play of the watcher (wrapped by a transfer) against a
// digit machine, derived from the watcher's rule alone: the machine sees
// zeros until its own digit m0, the first nonzero of its reply to 0^w, is
// relayed back at turn 4*m0 + 1; from the next turn on I plays 1s.
DigitPlay watcher_play(const MealyStrategy& tau) {
  const UPStream calm = letter_transduce(tau, UPStream::constant(0));
  const std::uint64_t scan = calm.prefix().size() + calm.period().size();
  for (std::uint64_t m = 0; m < scan; ++m) {
    if (calm.at(m) != 0) {
      const UPStream x(FinSeq(4 * m + 2, 0), {1});
      return {x, letter_transduce(tau, x)};
    }
  }
  return {UPStream::constant(0), calm};
}

DigitPlay watcher_play_const(const UPStream& y) {
  const std::uint64_t scan = y.prefix().size() + y.period().size();
  for (std::uint64_t m = 0; m < scan; ++m)
    if (y.at(m) != 0) return {UPStream(FinSeq(4 * m + 2, 0), {1}), y};
  return {UPStream::constant(0), y};
}

bool in_set(const DetOmegaAutomaton& A, const UPStream& x) {
  return membership_up(A, x) == Membership::In;
}

// Transcript digits of a joint finite run, for sanity against the expected
// play.
void check_play_prefix(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                       const DigitPlay& exp, std::uint64_t depth) {
  const RunResult r = run_to_depth_vs(G, sigma, tau, depth);
  REQUIRE(r.transcript.size() == depth);
  for (std::uint64_t t = 0; t < depth; ++t) {
    CHECK(r.transcript[t].i == exp.x.at(t));
    REQUIRE(r.transcript[t].ii.is_nat());
    CHECK(r.transcript[t].ii.nat == exp.y.at(t));
  }
}

}  // namespace

TEST_CASE("control schedules: class map, recurrence, validation") {
  const ControlSchedule rep = repeat_schedule(canonical_pi1());
  CHECK(rep.class_of(0) == 0);
  CHECK(rep.class_of(17) == 0);
  CHECK(rep.recurrence().tail == 0);
  CHECK(rep.recurrence().cycle == 1);

  const ControlSchedule cyc = cycle_schedule({canonical_pi1(), canonical_pi2()});
  CHECK(cyc.class_of(0) == 0);
  CHECK(cyc.class_of(1) == 1);
  CHECK(cyc.class_of(2) == 0);
  CHECK(cyc.recurrence().tail == 0);
  CHECK(cyc.recurrence().cycle == 2);

  ControlSchedule empty;
  CHECK(err_of([&] { empty.validate(); }) == ErrKind::InvalidArgument);

  // The default tail value for class i lies outside control(i), for both
  // schedule shapes.
  for (std::uint64_t i = 0; i < 3; ++i) {
    CHECK(membership_up(rep.control(i).automaton, default_control_value(rep, i)) ==
          Membership::Out);
    CHECK(membership_up(cyc.control(i).automaton, default_control_value(cyc, i)) ==
          Membership::Out);
  }
}

TEST_CASE("schema interleaving follows the row coding") {
  // Row n answers with the constant stream n; the move at turn t names the
  // row the turn belongs to.  First eight turns by hand: rows 0 1 0 2 0 1 0
  // 3.
  std::map<std::uint64_t, RowComponent> rows;
  for (std::uint64_t n = 0; n < 4; ++n) rows.emplace(n, row_component(UPStream::constant(n)));
  CompositeStrategy tau;
  tau.rows = std::move(rows);
  tau.row_bound = 4;

  const auto s = tau.interleave()->session();
  const Digit expect[8] = {0, 1, 0, 2, 0, 1, 0, 3};
  for (int t = 0; t < 8; ++t) {
    const Move m = s->on_digit(7);
    REQUIRE(m.is_nat());
    CHECK(m.nat == expect[t]);
  }
}

TEST_CASE("row-decoded game: reduction row plus copy row induces the identity") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  // Control row: the always-alive safety reduction, so the row's stream is
  // 0^w on every input and row 0 activates everywhere.  Output row: copy.
  const CompositeStrategy tau =
      schema({{0, row_component(reduce_safety_to_Z(full_space()))},
              {1, row_component(copy_mealy())}},
             zrep);

  Rng rng(401);
  for (int i = 0; i < 50; ++i) {
    const UPStream x = random_up(rng);
    const ActivationProfile p = composite_activation(W, zrep, tau, x);
    REQUIRE(p.least.has_value());
    CHECK(*p.least == 0);
    CHECK(composite_eval(W, zrep, tau, x) == x);
  }

  // Full-play adjudication: the induced function is the identity, so II
  // wins exactly when the payoff sets agree about membership.
  const DetOmegaAutomaton cyl0 = cylinder({0});
  Rng rng2(402);
  for (int i = 0; i < 20; ++i) {
    const UPStream x = random_up(rng2);
    CHECK(composite_adjudicate(W, zrep, tau, x, cyl0, cyl0).winner == Player::II);
    CHECK(composite_adjudicate(W, zrep, tau, x, cyl0, complement(cyl0)).winner == Player::I);
  }

  // Strict and relaxed legality agree on a fully rule-abiding schema, and
  // neither finds a violation.
  const LegalityReport strict = composite_legality(W, zrep, tau, true);
  const LegalityReport tilde = composite_legality(W, zrep, tau, false);
  CHECK(strict.verdict != LegalityReport::Verdict::Illegal);
  CHECK(tilde.verdict == strict.verdict);
}

TEST_CASE("row-decoded game: no activating control row within the bound") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const CompositeStrategy tau = schema({}, zrep);  // all rows are tail defaults

  CHECK(err_of([&] { composite_eval(W, zrep, tau, UPStream::constant(0)); }) ==
        ErrKind::NoActivationWithinBound);
  const Adjudication a =
      composite_adjudicate(W, zrep, tau, UPStream::constant(0), full_space(), full_space());
  CHECK(a.winner == Player::I);
}

TEST_CASE("strict monitor flags a never-activated rule break, relaxed monitor excuses it") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());

  // Row 2 plays 1^w (never in Z), row 3 answers Erase, which the inner skip
  // game forbids outright.  Row 0 activates on every input.
  MealyStrategy bad;
  bad.nodes.resize(1);
  bad.nodes[0].otherwise.next = 0;
  bad.nodes[0].otherwise.out = Move::erase();
  const CompositeStrategy tau = schema({{0, row_component(UPStream::constant(0))},
                                        {1, row_component(copy_mealy())},
                                        {2, row_component(UPStream::constant(1))},
                                        {3, row_component(bad)}},
                                       zrep);

  const GameSpec strict = make_gfxi(W, zrep);
  const GameSpec tilde = make_tilde(W, zrep);
  const IIStrategyPtr play = tau.interleave();

  // Turn 7 is row 3's first slot; the strict monitor dies there.
  const RunResult rs = run_to_depth(strict, StreamView::constant(0), *play, 16);
  CHECK(rs.violated);
  const RunResult rt = run_to_depth(tilde, StreamView::constant(0), *play, 16);
  CHECK(!rt.violated);
  CHECK(!rt.transcript.empty());

  // Same discrimination at the legality level, and there the relaxed
  // verdict is exact: every row carries a finite-state or constant view,
  // row 0's constant lies in Z (activation is total), row 2's constant
  // lies outside Z (row 3 is provably never consulted).
  const LegalityReport ls = composite_legality(W, zrep, tau, true);
  CHECK(ls.verdict == LegalityReport::Verdict::Illegal);
  const LegalityReport lt = composite_legality(W, zrep, tau, false);
  CHECK(lt.verdict == LegalityReport::Verdict::Legal);

  // The induced function ignores the broken row: row 0 activates first and
  // the copy row makes the output x.
  Rng rng(407);
  for (int i = 0; i < 20; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, zrep, tau, x) == x);
  }
}

TEST_CASE("row-decoded verdicts on a hand-built lasso") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const GameSpec strict = make_gfxi(W, zrep);
  const GameSpec tilde = make_tilde(W, zrep);

  // Period 16, input 0^w.  Row of turn t follows the coding: turns 15 mod
  // 16 belong to rows 4 and up, which all play the digit 1 here.  Row 0
  // plays 0s (activated), row 1 echoes the zeros of x, row 2 plays 1s
  // (never activated), row 3 always passes and so breaks the skip game's
  // liveness rule.
  const Move n0 = Move::nat_move(0);
  const Move n1 = Move::nat_move(1);
  const Move moves[16] = {n0, n0, n0, n1, n0, n0, n0, Move::pass(),
                          n0, n0, n0, n1, n0, n0, n0, n1};
  LassoRun run;
  for (const Move& m : moves) run.period.push_back({0, m});

  const UPStream x0 = UPStream::constant(0);
  LassoContext ctx;
  ctx.input = &x0;

  CHECK(strict.up_verdict(run, ctx) == RuleVerdict::OutRules);
  CHECK(tilde.up_verdict(run, ctx) == RuleVerdict::InRules);
  CHECK(strict.up_output(run, ctx) == UPStream::constant(0));
  CHECK(tilde.up_output(run, ctx) == UPStream::constant(0));
}

TEST_CASE("relaxed legality matches preimage cover on sampled inputs") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());

  // Control row 0 copies the input, so it activates only at 0^w; every
  // other control row is a never-activating default.  The sampled cover
  // obligation must fail.
  const CompositeStrategy uncovered = schema({{0, row_component(copy_mealy())}}, zrep);

  // Independent cover check on the same kind of inputs: for a sampled x,
  // some scanned control row's stream must land in its set.
  Rng rng(411);
  bool covered_all = true;
  for (int i = 0; i < 20; ++i) {
    const UPStream x = random_up(rng);
    const ActivationProfile p = composite_activation(W, zrep, uncovered, x, 8);
    covered_all = covered_all && p.least.has_value();
  }
  CHECK(!covered_all);

  const LegalityReport rep = composite_legality(W, zrep, uncovered, false);
  CHECK(rep.verdict == LegalityReport::Verdict::Illegal);

  // The covering counterpart from the identity schema stays clean.
  const CompositeStrategy covering =
      schema({{0, row_component(reduce_safety_to_Z(full_space()))},
              {1, row_component(copy_mealy())}},
             zrep);
  CHECK(composite_legality(W, zrep, covering, false).verdict !=
        LegalityReport::Verdict::Illegal);
}

TEST_CASE("limit game: constant tails evaluate exactly") {
  const GameSpec W = make_base_game(GameKind::W);

  LimitFamily fam;
  fam.row = [](std::uint64_t n) {
    if (n < 3) return const_strategy(UPStream::constant(n + 1));
    return const_strategy(UPStream::constant(0));
  };
  fam.constant_from = 3;

  Rng rng(419);
  for (int i = 0; i < 10; ++i) {
    const UPStream x = random_up(rng);
    CHECK(glim_eval_exact(W, fam, x) == UPStream::constant(0));
    // The limit of a family with a declared constant tail is that tail
    // row's own function.
    CHECK(glim_eval_exact(W, fam, x) == eval_function(W, *fam.row(5), x));
  }

  LimitFamily open_ended = fam;
  open_ended.constant_from.reset();
  CHECK(err_of([&] { glim_eval_exact(W, open_ended, UPStream::constant(0)); }) ==
        ErrKind::LimitUndetermined);
}

TEST_CASE("limit game: pointwise limit of continuous prefix probes") {
  const GameSpec W = make_base_game(GameKind::W);

  // Row n maps x to 0^w when the first n digits are zero and to 1^w
  // otherwise; each row is continuous, and the pointwise limit is the
  // characteristic split at 0^w, which no single row computes.
  LimitFamily fam;
  fam.row = [](std::uint64_t n) { return as_strategy(prefix_zero_probe(n)); };

  const GlimProbe at_zero = glim_probe(W, fam, UPStream::constant(0), 16);
  REQUIRE(at_zero.stable_value.has_value());
  CHECK(*at_zero.stable_value == UPStream::constant(0));

  Rng rng(421);
  int found = 0;
  while (found < 50) {
    const UPStream x = random_up(rng);
    bool nonzero = false;
    for (std::uint64_t j = 0; j < 12; ++j) nonzero = nonzero || x.at(j) != 0;
    if (!nonzero) continue;
    ++found;
    const GlimProbe p = glim_probe(W, fam, x, 16);
    REQUIRE(p.stable_value.has_value());
    CHECK(*p.stable_value == UPStream::constant(1));
  }

  // Alternating constant rows have no limit anywhere.
  LimitFamily alt;
  alt.row = [](std::uint64_t n) { return const_strategy(UPStream::constant(n % 2)); };
  const GlimProbe p = glim_probe(W, alt, UPStream::constant(0), 12);
  CHECK(!p.stable_value.has_value());
  CHECK(err_of([&] { glim_eval_exact(W, alt, UPStream::constant(0)); }) ==
        ErrKind::LimitUndetermined);
}

TEST_CASE("limit game verdicts and outputs on lassos") {
  const GameSpec W = make_base_game(GameKind::W);
  const GameSpec G = make_glim({W, W, W}, W);

  // All rows play 0s: every row obeys the skip game and every row output is
  // 0^w, so the limit exists and is 0^w.
  LassoRun zeros;
  zeros.period.push_back({0, Move::nat_move(0)});
  const UPStream x0 = UPStream::constant(0);
  LassoContext ctx;
  ctx.input = &x0;
  CHECK(G.up_verdict(zeros, ctx) == RuleVerdict::InRules);
  CHECK(G.up_output(zeros, ctx) == UPStream::constant(0));

  // Period 0,1,2 on the move tape: rows of either parity see distinct digit
  // streams forever, so the row outputs never settle.
  LassoRun mixed;
  for (Digit d : {0, 1, 2}) mixed.period.push_back({0, Move::nat_move(d)});
  CHECK(G.up_verdict(mixed, ctx) == RuleVerdict::InRules);
  CHECK(err_of([&] { G.up_output(mixed, ctx); }) == ErrKind::LimitUndetermined);

  // Limit rows must live in skip-closed games.
  CHECK(err_of([&] { make_glim({make_base_game(GameKind::L)}, W); }) ==
        ErrKind::InvalidArgument);
}

TEST_CASE("automaton codes round-trip and malformed prefixes decode to the empty set") {
  const CodeDecoder dec;

  std::vector<DetOmegaAutomaton> specimens = {full_space(), empty_set(), cylinder({0}),
                                              canonical_pi1().automaton,
                                              canonical_pi2().automaton};
  Rng rng(431);
  for (int i = 0; i < 10; ++i) specimens.push_back(testutil::random_automaton(rng));

  for (const DetOmegaAutomaton& A : specimens) {
    const FinSeq pay = CodeDecoder::encode(A);
    FinSeq digits;
    digits.push_back(pay.size());
    digits.insert(digits.end(), pay.begin(), pay.end());
    CHECK(equivalent(dec.decode(digits), A));
    CHECK(equivalent(dec.decode_up(CodeDecoder::code_stream(A)), A));
  }

  CHECK(equivalent(dec.decode({}), empty_set()));
  CHECK(equivalent(dec.decode({3, 1}), empty_set()));          // truncated payload
  CHECK(equivalent(dec.decode_up(UPStream::constant(0)), empty_set()));

  CodeDecoder tiny;
  tiny.max_code_len = 2;
  CHECK(equivalent(tiny.decode_up(CodeDecoder::code_stream(full_space())), empty_set()));
}

TEST_CASE("coded families: identity, constants, witnesses, uniformity") {
  const CodeDecoder dec;

  // Cylinder family S(n, m) = {z : z(n) = m}: digit n of the output is the
  // least m with x(n) = m, which is x(n) itself.
  GammaFamily ident;
  ident.code = [](std::uint64_t n, std::uint64_t m) {
    return CodeDecoder::encode(digit_eq(n, m));
  };

  Rng rng(433);
  std::vector<UPStream> samples;
  for (int i = 0; i < 50; ++i) samples.push_back(random_up(rng));

  for (const UPStream& x : samples) CHECK(gamma_eval(ident, dec, x) == x);

  // Preimage decider: digit n equals m exactly when m is x(n).
  for (int i = 0; i < 10; ++i) {
    const UPStream& x = samples[i];
    CHECK(gamma_decider(ident, dec, i, x.at(i), x));
    CHECK(!gamma_decider(ident, dec, i, x.at(i) + 1, x));
  }

  // The compiled strategy spells code(n, m) on the row indexed pair(n, m):
  // position 0 carries the payload length, then the payload, then zeros.
  const IIStrategyPtr compiled = gamma_compile(ident, dec, {samples[0], samples[1]});
  FinSeq moves;
  {
    const auto s = compiled->session();
    for (int t = 0; t < 64; ++t) {
      const Move m = s->on_digit(0);
      REQUIRE(m.is_nat());
      moves.push_back(m.nat);
    }
  }
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto [n, m] = unpair(r);
    const FinSeq pay = ident.code(n, m);
    for (std::uint64_t pos = 0; pos < 3; ++pos) {
      const std::uint64_t t = pair_nm(r, pos);
      if (t >= moves.size()) continue;
      const Digit want = pos == 0 ? pay.size() : (pos - 1 < pay.size() ? pay[pos - 1] : 0);
      CHECK(moves[t] == want);
    }
  }

  // Constant family: full space at digit 3, empty elsewhere.
  GammaFamily constant3;
  constant3.code = [](std::uint64_t, std::uint64_t m) {
    return CodeDecoder::encode(m == 3 ? full_space() : empty_set());
  };
  for (int i = 0; i < 10; ++i)
    CHECK(gamma_eval(constant3, dec, samples[i]) == UPStream::constant(3));

  // All-empty family: no digit has a witness.
  GammaFamily nowhere;
  nowhere.code = [](std::uint64_t, std::uint64_t) { return CodeDecoder::encode(empty_set()); };
  CHECK(err_of([&] { gamma_eval(nowhere, dec, samples[0]); }) == ErrKind::NoWitnessWithinBound);
  CHECK(err_of([&] { gamma_compile(nowhere, dec, {samples[0]}); }) == ErrKind::IncoherentSpec);

  // Family whose membership depends on the digit position itself: the
  // output alternates along a constant input, which the one-block
  // uniformity check rejects.
  GammaFamily skew;
  skew.code = [](std::uint64_t n, std::uint64_t m) {
    return CodeDecoder::encode(m == n % 2 ? full_space() : empty_set());
  };
  CHECK(err_of([&] { gamma_eval(skew, dec, UPStream::constant(0)); }) == ErrKind::IncoherentSpec);
}

TEST_CASE("coded-set games on raw lassos: digit alphabet and witness demands") {
  const CodeDecoder dec;
  const GameSpec G = make_ggamma(dec);

  // All-zero rows spell the empty payload, which decodes to the empty set,
  // so no output digit has a witness.
  LassoRun zeros;
  zeros.period.push_back({0, Move::nat_move(0)});
  const UPStream x0 = UPStream::constant(0);
  LassoContext ctx;
  ctx.input = &x0;
  CHECK(G.up_verdict(zeros, ctx) == RuleVerdict::OutRules);
  CHECK(err_of([&] { G.up_output(zeros, ctx); }) == ErrKind::NoWitnessWithinBound);

  // The game is digit-only: a pass is an immediate violation.
  const auto mon = G.monitor_factory();
  CHECK(mon->step(0, Move::pass()) == StepStatus::Violated);

  const GameSpec W = make_base_game(GameKind::W);
  const GameSpec GF = make_gfgamma(W, dec);
  CHECK(GF.up_verdict(zeros, ctx) == RuleVerdict::OutRules);
  CHECK(err_of([&] { GF.up_output(zeros, ctx); }) == ErrKind::NoActivationWithinBound);
  const auto fmon = GF.monitor_factory();
  CHECK(fmon->step(0, Move::erase()) == StepStatus::Violated);
}

TEST_CASE("tuple coding by iterated unpairing") {
  CHECK(enum_seq(1, 7) == FinSeq{7});

  // Brute-force pairing oracle for length 2: enum_seq(2, m) must be the
  // unique (a, b) with pair(a, b) = m.
  for (std::uint64_t m = 0; m < 50; ++m) {
    std::optional<std::pair<std::uint64_t, std::uint64_t>> found;
    for (std::uint64_t a = 0; a < 10 && !found; ++a)
      for (std::uint64_t b = 0; b < 30 && !found; ++b)
        if (pair_nm(a, b) == m) found = {a, b};
    REQUIRE(found.has_value());
    CHECK(enum_seq(2, m) == FinSeq{found->first, found->second});
  }
  CHECK(enum_seq(2, 5) == FinSeq{1, 1});

  for (std::uint64_t k = 1; k <= 4; ++k)
    for (std::uint64_t m = 0; m < 1000; ++m) {
      const FinSeq s = enum_seq(k, m);
      REQUIRE(s.size() == k);
      CHECK(enum_index(s) == m);
    }

  Rng rng(437);
  for (int i = 0; i < 100; ++i) {
    FinSeq s(1 + rng.below(5));
    for (Digit& d : s) d = rng.below(3);
    CHECK(enum_seq(s.size(), enum_index(s)) == s);
  }
}

TEST_CASE("digit-coded game: packed constant rows activate and answer by hand") {
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());

  // Every row plays 0s.  Each packed digit is the index of the all-zero
  // tuple, which is 0, so II's digit stream is 0^w; row 0's unpacked stream
  // is 0^w, lands in Z, and the output row is 0^w as well.
  GlipStrategy tau;
  tau.row = [](std::uint64_t) { return const_strategy(UPStream::constant(0)); };

  const IIStrategyPtr packed = glip_interleave(tau);
  const auto s = packed->session();
  for (int t = 0; t < 4; ++t) {
    const Move m = s->on_digit(5);
    REQUIRE(m.is_nat());
    CHECK(m.nat == 0);
  }

  Rng rng(441);
  for (int i = 0; i < 10; ++i)
    CHECK(glip_eval(zrep, tau, random_up(rng), 8) == UPStream::constant(0));

  const GameSpec G = make_glipxi(zrep);
  LassoRun zeros;
  zeros.period.push_back({0, Move::nat_move(0)});
  const UPStream x0 = UPStream::constant(0);
  LassoContext ctx;
  ctx.input = &x0;
  CHECK(G.up_verdict(zeros, ctx) == RuleVerdict::InRules);
  CHECK(G.up_output(zeros, ctx) == UPStream::constant(0));
}

TEST_CASE("digit-coded game: pack and extract are inverse up to the row's lag") {
  Rng rng(443);
  for (std::uint64_t n = 0; n < 4; ++n) {
    const MealyStrategy machine = random_digit_mealy(rng);

    GlipStrategy tau;
    tau.row = [machine, n](std::uint64_t r) -> IIStrategyPtr {
      if (r == n) return as_strategy(machine);
      return const_strategy(UPStream::constant(0));
    };

    const IIStrategyPtr back = glip_extract(glip_interleave(tau), n);
    const auto s = back->session();

    // Oracle: run the machine by hand; its reply number j answers the first
    // j + 1 input digits, and surfaces at global turn floor(n / 2) + j.
    FinSeq input(40);
    for (Digit& d : input) d = rng.below(4);
    FinSeq replies;
    std::uint32_t q = machine.initial;
    for (Digit d : input) {
      const MealyEdge& e = machine.edge(q, d);
      const Move m = e.emit(d);
      REQUIRE(m.is_nat());
      replies.push_back(m.nat);
      q = e.next;
    }

    const std::uint64_t lag = n / 2;
    for (std::uint64_t t = 0; t < 40; ++t) {
      const Move m = s->on_digit(input[t]);
      if (t < lag) {
        CHECK(m.is_pass());
      } else {
        REQUIRE(m.is_nat());
        CHECK(m.nat == replies[t - lag]);
      }
    }
  }
}

TEST_CASE("digit-coded game: a row that cannot meet its deadline starves the packer") {
  GlipStrategy tau;
  tau.row = [](std::uint64_t r) -> IIStrategyPtr {
    if (r == 1) return lipschitz_compile(shift_transducer(1));  // passes at turn 0
    return const_strategy(UPStream::constant(0));
  };
  const auto s = glip_interleave(tau)->session();
  CHECK(err_of([&] { s->on_digit(0); }) == ErrKind::InvalidArgument);
}

TEST_CASE("piecewise-Lipschitz compiler: placement respects budgets and order") {
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());

  // One total piece, identity transducer, budget 0: slot 0, and the induced
  // function is the identity.
  const GlipStrategy ident = glip_compile({{full_space(), identity_transducer()}}, zrep);
  CHECK(ident.placement == std::vector<std::uint64_t>{0});
  Rng rng(449);
  for (int i = 0; i < 30; ++i) {
    const UPStream x = random_up(rng);
    CHECK(glip_eval(zrep, ident, x, 8) == x);
  }

  // Two clopen pieces split on the first digit; the transducers drop one
  // and two digits and carry those delays as budgets.  Slots start at the
  // budgets and increase strictly.
  const DetOmegaAutomaton cyl0 = cylinder({0});
  const GlipStrategy two = glip_compile(
      {{cyl0, shift_transducer(1)}, {complement(cyl0), shift_transducer(2)}}, zrep);
  CHECK(two.placement == std::vector<std::uint64_t>{1, 2});
  for (int i = 0; i < 40; ++i) {
    const UPStream x = random_up(rng);
    const UPStream want = x.at(0) == 0 ? x.drop(1) : x.drop(2);
    CHECK(glip_eval(zrep, two, x, 8) == want);
  }

  // The packed strategy plays bare digits with no starvation.  The packed
  // index doubles per tuple slot (two fresh slots a turn), so 64-bit
  // digits carry the play to just past turn 30; stay under that.
  const auto s = glip_interleave(two)->session();
  for (int t = 0; t < 24; ++t) CHECK(s->on_digit(t % 3).is_nat());

  // Slot sequences are strictly increasing and never undercut a budget.
  Rng brng(450);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<GlipPiece> pieces;
    const int k = 1 + static_cast<int>(brng.below(4));
    std::vector<std::uint64_t> budgets;
    for (int j = 0; j < k; ++j) {
      const std::uint64_t b = brng.below(5);
      budgets.push_back(b);
      pieces.push_back({full_space(), shift_transducer(b)});
    }
    const GlipStrategy g = glip_compile(pieces, zrep);
    REQUIRE(g.placement.size() == budgets.size());
    for (std::size_t j = 0; j < budgets.size(); ++j) {
      CHECK(g.placement[j] >= budgets[j]);
      if (j > 0) CHECK(g.placement[j] > g.placement[j - 1]);
    }
  }

  // A transducer that under-declares its delay is rejected up front.
  DelayTransducer lying;
  lying.nodes.resize(1);
  lying.nodes[0].otherwise = {0, {}};
  lying.budget = 0;
  CHECK(err_of([&] { glip_compile({{full_space(), lying}}, zrep); }) ==
        ErrKind::BudgetViolation);
}

TEST_CASE("piecewise compiler: clopen split at rank two") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const DetOmegaAutomaton cyl0 = cylinder({0});

  // Single total piece, copy strategy: the identity.
  PiecewiseSpec whole;
  whole.controls = zrep;
  whole.pieces.push_back({full_space(), std::nullopt, as_strategy(copy_mealy())});
  const CompositeStrategy tau1 = piecewise_compile(whole, W);
  Rng rng(457);
  for (int i = 0; i < 20; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, zrep, tau1, x) == x);
  }

  // Two clopen pieces: constant 0s on the first-digit-zero cell, copy on
  // its complement.
  PiecewiseSpec split;
  split.controls = zrep;
  split.pieces.push_back({cyl0, std::nullopt, const_strategy(UPStream::constant(0))});
  split.pieces.push_back({complement(cyl0), std::nullopt, id_strategy()});
  const CompositeStrategy tau2 = piecewise_compile(split, W);

  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    const UPStream want = x.at(0) == 0 ? UPStream::constant(0) : x;
    CHECK(composite_eval(W, zrep, tau2, x) == want);
  }

  // Activation is minimal: below the least activated control row, every
  // verdict is Out, and each verdict matches a direct membership check of
  // the row's own stream.
  for (int i = 0; i < 40; ++i) {
    const UPStream x = random_up(rng);
    const ActivationProfile p = composite_activation(W, zrep, tau2, x, 8);
    REQUIRE(p.least.has_value());
    for (std::uint64_t j = 0; j < p.verdicts.size(); ++j) {
      const UPStream u = eval_function(make_base_game(GameKind::W),
                                       *tau2.row_strategy(2 * j), x);
      CHECK(p.verdicts[j] == membership_up(zrep.control(j).automaton, u));
      if (j < *p.least) CHECK(p.verdicts[j] == Membership::Out);
    }
  }
}

TEST_CASE("piecewise compiler: rank-three split along a liveness region") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule irep = repeat_schedule(canonical_pi2());
  const DetOmegaAutomaton inf0 = canonical_pi2().automaton;

  // Cell one is the set of streams with infinitely many zeros; its
  // complement carries no supported shape, so the second piece brings an
  // explicit always-activating witness and acts as the fallback cell.
  PiecewiseSpec spec;
  spec.controls = irep;
  spec.pieces.push_back({inf0, std::nullopt, const_strategy(UPStream::constant(5))});
  spec.pieces.push_back({std::nullopt, constant_mealy(0), const_strategy(UPStream::constant(7))});
  const CompositeStrategy tau = piecewise_compile(spec, W);

  Rng rng(461);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    const UPStream want = in_set(inf0, x) ? UPStream::constant(5) : UPStream::constant(7);
    CHECK(composite_eval(W, irep, tau, x) == want);
  }

  // Without the explicit witness the complement's shape is rejected.
  PiecewiseSpec bad;
  bad.controls = irep;
  bad.pieces.push_back({complement(inf0), std::nullopt, id_strategy()});
  CHECK(err_of([&] { piecewise_compile(bad, W); }) == ErrKind::UnsupportedRegionShape);
}

TEST_CASE("piecewise decompiler recovers cells and pieces") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const DetOmegaAutomaton cyl0 = cylinder({0});

  PiecewiseSpec split;
  split.controls = zrep;
  split.pieces.push_back({cyl0, std::nullopt, const_strategy(UPStream::constant(0))});
  split.pieces.push_back({complement(cyl0), std::nullopt, id_strategy()});
  const CompositeStrategy tau = piecewise_compile(split, W);
  const PiecewiseDecomposition dec = piecewise_decompile(tau, W, zrep);

  Rng rng(463);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    const bool zero_cell = x.at(0) == 0;
    CHECK(dec.region(0, x) == zero_cell);
    CHECK(dec.region(1, x) == !zero_cell);
    // Cells are disjoint: exactly one region claims x.
    int claims = 0;
    for (std::uint64_t n = 0; n < dec.piece_count && n < 4; ++n)
      claims += dec.region(n, x) ? 1 : 0;
    CHECK(claims == 1);
  }

  // Recompiling the recovered pieces over the original cells reproduces
  // the function.
  PiecewiseSpec again;
  again.controls = zrep;
  again.pieces.push_back({cyl0, std::nullopt, dec.piece(0)});
  again.pieces.push_back({complement(cyl0), std::nullopt, dec.piece(1)});
  const CompositeStrategy tau2 = piecewise_compile(again, W);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, zrep, tau2, x) == composite_eval(W, zrep, tau, x));
  }

  // A single total piece claims every input at cell 0.
  PiecewiseSpec whole;
  whole.controls = zrep;
  whole.pieces.push_back({full_space(), std::nullopt, id_strategy()});
  const PiecewiseDecomposition one = piecewise_decompile(piecewise_compile(whole, W), W, zrep);
  for (int i = 0; i < 20; ++i) CHECK(one.region(0, random_up(rng)));
}

TEST_CASE("control swaps relocate schedules and preserve the function") {
  const GameSpec W = make_base_game(GameKind::W);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const ControlSchedule irep = repeat_schedule(canonical_pi2());
  const DetOmegaAutomaton cyl0 = cylinder({0});

  PiecewiseSpec split;
  split.controls = zrep;
  split.pieces.push_back({cyl0, std::nullopt, const_strategy(UPStream::constant(0))});
  split.pieces.push_back({complement(cyl0), std::nullopt, id_strategy()});
  const CompositeStrategy tau = piecewise_compile(split, W);

  Rng rng(467);
  std::vector<UPStream> samples = {UPStream::constant(0), UPStream({1}, {0}),
                                   UPStream({0, 2}, {1})};
  for (int i = 0; i < 30; ++i) samples.push_back(random_up(rng));

  // Identity swap: same schedule, copy witnesses.
  const CompositeStrategy same =
      control_swap(tau, zrep, zrep, {0, 1}, {copy_mealy(), copy_mealy()}, samples);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, zrep, same, x) == composite_eval(W, zrep, tau, x));
  }

  // Forward: the safety reduction embeds the closed test set into the
  // liveness one, stream by stream.
  const MealyStrategy embed = reduce_safety_to_Z(canonical_pi1().automaton);
  const CompositeStrategy moved = control_swap(tau, zrep, irep, {0, 1}, {embed, embed}, samples);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, irep, moved, x) == composite_eval(W, zrep, tau, x));
  }

  // Back again: on every stream the moved control rows can reach, the two
  // test sets agree, so plain copies witness the return.
  const CompositeStrategy back =
      control_swap(moved, irep, zrep, {0, 1}, {copy_mealy(), copy_mealy()}, samples);
  for (int i = 0; i < 100; ++i) {
    const UPStream x = random_up(rng);
    CHECK(composite_eval(W, zrep, back, x) == composite_eval(W, zrep, tau, x));
  }

  // A witness that sends an in-set stream out of the target set is caught
  // on the samples.
  CHECK(err_of([&] {
          control_swap(tau, zrep, irep, {0, 1}, {constant_mealy(1), constant_mealy(1)},
                       samples);
        }) == ErrKind::WitnessFailure);

  // Misaligned witness lists are rejected before any sampling.
  CHECK(err_of([&] { control_swap(tau, zrep, irep, {0, 1}, {embed}, samples); }) ==
        ErrKind::InvalidArgument);
  CHECK(err_of([&] { control_swap(tau, zrep, irep, {1, 0}, {embed, embed}, samples); }) ==
        ErrKind::InvalidArgument);
}

TEST_CASE("player I transfers beat batteries of opponents in the digit game") {
  const GameSpec L = make_base_game(GameKind::L);
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  const CodeDecoder cdec;

  // Anchors must lie in the first control set.
  CHECK(err_of([&] {
          playerI_transfer(const_strategy_i(UPStream::constant(0)), UPStream::constant(1), zrep);
        }) == ErrKind::BadAnchor);

  // Pair one: empty payoff against the full space.  Any I-strategy wins,
  // and the transfer of a constant keeps its digits.
  {
    const DetOmegaAutomaton A = empty_set();
    const DetOmegaAutomaton B = full_space();
    const IStrategyPtr sigma =
        playerI_transfer(const_strategy_i(UPStream::constant(0)), UPStream::constant(0), zrep);
    Rng rng(471);
    for (int i = 0; i < 50; ++i) {
      const UPStream y = random_up(rng);
      const DigitPlay exp{UPStream::constant(0), y};
      CHECK(in_set(A, exp.x) != in_set(B, exp.y));
      check_play_prefix(L, *sigma, *const_strategy(y), exp, 24);
    }
  }

  // Pair two: x must leave the closed singleton exactly when the output
  // does not.  The watcher wins the row game by reading the relayed output
  // off row 1, and each transfer carries that win to the digit game.
  const DetOmegaAutomaton A = complement(canonical_pi1().automaton);
  const DetOmegaAutomaton B = canonical_pi1().automaton;
  const IStrategyPtr rho = std::make_shared<WatchRowOneI>();
  const std::vector<IStrategyPtr> transfers = {
      playerI_transfer(rho, UPStream::constant(0), zrep),
      playerI_transfer_tilde(rho, UPStream::constant(0), zrep),
      playerI_transfer_gamma(rho, cdec)};

  for (const IStrategyPtr& sigma : transfers) {
    Rng rng(473);
    // Ultimately periodic opponents.
    for (int i = 0; i < 300; ++i) {
      const UPStream y = random_up(rng);
      const DigitPlay exp = watcher_play_const(y);
      CHECK(in_set(A, exp.x) != in_set(B, exp.y));
      if (i < 25) check_play_prefix(L, *sigma, *const_strategy(y), exp, 48);
    }
    // Finite-state opponents.
    for (int i = 0; i < 20; ++i) {
      const MealyStrategy m = random_digit_mealy(rng);
      const DigitPlay exp = watcher_play(m);
      CHECK(in_set(A, exp.x) != in_set(B, exp.y));
      check_play_prefix(L, *sigma, *as_strategy(m), exp, 48);
    }
  }
}

TEST_CASE("row-decoded constructors demand delayable inners") {
  GameSpec inner = make_base_game(GameKind::L);
  inner.delayable = false;
  const ControlSchedule zrep = repeat_schedule(canonical_pi1());
  CHECK(err_of([&] { make_gfxi(inner, zrep); }) == ErrKind::NotDelayable);
  CHECK(err_of([&] { make_tilde(inner, zrep); }) == ErrKind::NotDelayable);
  const CodeDecoder dec;
  CHECK(err_of([&] { make_gfgamma(inner, dec); }) == ErrKind::NotDelayable);
}
