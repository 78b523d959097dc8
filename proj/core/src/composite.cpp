#include "rgames/composite.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "rgames/rng.hpp"
#include "rgames/strategy.hpp"

namespace rgames {

namespace {

const GameSpec& w_rules() {
  static const GameSpec g = make_base_game(GameKind::W);
  return g;
}

std::string row_tag(std::uint64_t r) { return "row " + std::to_string(r); }

// --- lasso plumbing ---

UPStream lasso_input(const LassoRun& run) {
  FinSeq pre, per;
  pre.reserve(run.prefix.size());
  per.reserve(run.period.size());
  for (const auto& e : run.prefix) pre.push_back(e.i);
  for (const auto& e : run.period) per.push_back(e.i);
  if (per.empty()) throw GameError(ErrKind::InvalidArgument, "lasso has an empty period");
  return UPStream(std::move(pre), std::move(per));
}

MoveLasso lasso_row_moves(const LassoRun& run, std::uint64_t r) {
  MoveSeq pre, per;
  pre.reserve(run.prefix.size());
  per.reserve(run.period.size());
  for (const auto& e : run.prefix) pre.push_back(e.ii);
  for (const auto& e : run.period) per.push_back(e.ii);
  auto [p, q] = project_row<Move>(pre, per, r);
  return MoveLasso{std::move(p), std::move(q)};
}

// Skip-game reading of one row: digits and skips only, with infinitely many
// digits; the filtered stream is what the control set judges.
struct SkipRowRead {
  bool ok = false;
  std::string why;
  UPStream digits;
};

SkipRowRead read_skip_row(const MoveLasso& ml) {
  SkipRowRead r;
  FinSeq pre, per;
  for (const Move& m : ml.prefix) {
    if (m.is_nat()) {
      pre.push_back(m.nat);
    } else if (!m.is_pass()) {
      r.why = "move is neither a digit nor a skip";
      return r;
    }
  }
  for (const Move& m : ml.period) {
    if (m.is_nat()) {
      per.push_back(m.nat);
    } else if (!m.is_pass()) {
      r.why = "move is neither a digit nor a skip";
      return r;
    }
  }
  if (per.empty()) {
    r.why = "only finitely many digits";
    return r;
  }
  r.ok = true;
  r.digits = UPStream(std::move(pre), std::move(per));
  return r;
}

// Bare-digit reading of one row: every move a digit.
struct NatRowRead {
  bool ok = false;
  UPStream digits;
};

NatRowRead read_nat_row(const MoveLasso& ml) {
  NatRowRead r;
  FinSeq pre, per;
  for (const Move& m : ml.prefix) {
    if (!m.is_nat()) return r;
    pre.push_back(m.nat);
  }
  for (const Move& m : ml.period) {
    if (!m.is_nat()) return r;
    per.push_back(m.nat);
  }
  r.ok = true;
  r.digits = UPStream(std::move(pre), std::move(per));
  return r;
}

// Control indices [0, start + count) decide every control row of a lasso:
// rows repeat with the row recurrence, and the schedule's classes repeat with
// its own shape, so index i + count behaves like i for i >= start.
struct ControlScan {
  std::uint64_t start = 0;
  std::uint64_t count = 1;
};

constexpr std::uint64_t kScanCap = 100000;

ControlScan control_scan(const LassoRun& run, const OrbitShape* sched) {
  const OrbitShape rows = row_recurrence(run.prefix.size(), run.period.size());
  ControlScan sc;
  sc.start = (rows.tail + 1) / 2;
  sc.count = rows.cycle / std::gcd<std::uint64_t>(2, rows.cycle);
  if (sched) {
    sc.start = std::max(sc.start, sched->tail);
    sc.count = std::lcm(std::max<std::uint64_t>(sc.count, 1),
                        std::max<std::uint64_t>(sched->cycle, 1));
  }
  if (sc.start + sc.count > kScanCap)
    throw GameError(ErrKind::Overflow, "lasso recurrence too wide for exact row analysis");
  return sc;
}

// Single-row variant (no even/odd split): rows [0, start + count) decide all.
ControlScan plain_row_scan(const LassoRun& run, std::uint64_t min_start) {
  const OrbitShape rows = row_recurrence(run.prefix.size(), run.period.size());
  ControlScan sc;
  sc.start = std::max(rows.tail, min_start);
  sc.count = std::max<std::uint64_t>(rows.cycle, 1);
  if (sc.start + sc.count > kScanCap)
    throw GameError(ErrKind::Overflow, "lasso recurrence too wide for exact row analysis");
  return sc;
}

// --- constant-row machinery ---

// Input-oblivious machine playing y; one state per prefix or period slot.
MealyStrategy up_mealy(const UPStream& y) {
  const std::uint64_t p = y.prefix().size(), l = y.period().size();
  MealyStrategy m;
  m.nodes.resize(p + l);
  for (std::uint64_t i = 0; i < p + l; ++i) {
    MealyEdge e;
    e.next = static_cast<std::uint32_t>(i + 1 == p + l ? p : i + 1);
    e.out = Move::nat_move(y.at(i));
    m.nodes[i].otherwise = e;
  }
  m.initial = 0;
  return m;
}

class NullInterp final : public Interpreter {
 public:
  void step(Digit, const Move&) override {}
  FinSeq tentative() const override { return {}; }
  std::uint64_t committed_len() const override { return 0; }
};

}  // namespace

// --- control schedules ---

std::uint64_t ControlSchedule::class_of(std::uint64_t n) const {
  if (sets.empty()) throw GameError(ErrKind::InvalidArgument, "empty control schedule");
  if (tail == Tail::Cycle) return n % sets.size();
  return std::min<std::uint64_t>(n, sets.size() - 1);
}

OrbitShape ControlSchedule::recurrence() const {
  if (sets.empty()) throw GameError(ErrKind::InvalidArgument, "empty control schedule");
  if (tail == Tail::Cycle) return {0, sets.size()};
  return {sets.size() - 1, 1};
}

void ControlSchedule::validate() const {
  if (sets.empty()) throw GameError(ErrKind::InvalidArgument, "empty control schedule");
  for (const auto& c : sets) c.automaton.validate();
}

ControlSchedule repeat_schedule(ControlSet c) {
  ControlSchedule s;
  s.sets.push_back(std::move(c));
  s.tail = ControlSchedule::Tail::RepeatLast;
  return s;
}

ControlSchedule cycle_schedule(std::vector<ControlSet> sets) {
  ControlSchedule s;
  s.sets = std::move(sets);
  s.tail = ControlSchedule::Tail::Cycle;
  s.validate();
  return s;
}

// --- row components and schemas ---

RowComponent row_component(IIStrategyPtr s) {
  RowComponent c;
  c.strategy = std::move(s);
  if (!c.strategy) throw GameError(ErrKind::InvalidArgument, "null row strategy");
  return c;
}

RowComponent row_component(MealyStrategy m) {
  m.validate();
  RowComponent c;
  c.mealy = m;
  c.strategy = as_strategy(std::move(m));
  return c;
}

RowComponent row_component(UPStream constant_value) {
  RowComponent c;
  c.mealy = up_mealy(constant_value);
  c.strategy = const_strategy(constant_value);
  c.constant = std::move(constant_value);
  return c;
}

RowComponent CompositeStrategy::row(std::uint64_t n) const {
  auto it = rows.find(n);
  if (it != rows.end()) return it->second;
  if (!tail) throw GameError(ErrKind::InvalidArgument, "schema has no tail for " + row_tag(n));
  return tail(n);
}

namespace {

class SchemaInterleaveSession final : public IISession {
 public:
  explicit SchemaInterleaveSession(std::shared_ptr<const CompositeStrategy> s) : s_(std::move(s)) {}

  Move on_digit(Digit d) override {
    hist_.push_back(d);
    const auto [n, m] = unpair(t_);
    ++t_;
    if (row_ses_.size() <= n) {
      row_ses_.resize(n + 1);
      row_strat_.resize(n + 1);
      fed_.resize(n + 1, 0);
    }
    if (!row_ses_[n]) {
      // Tail components are built per call; the session must keep each row
      // strategy alive for as long as its session runs.
      row_strat_[n] = s_->row_strategy(n);
      row_ses_[n] = row_strat_[n]->session();
    }
    Move last = Move::pass();
    for (std::uint64_t j = fed_[n]; j <= m; ++j) last = row_ses_[n]->on_digit(hist_[j]);
    fed_[n] = m + 1;
    return last;
  }

 private:
  std::shared_ptr<const CompositeStrategy> s_;
  std::vector<std::unique_ptr<IISession>> row_ses_;
  std::vector<IIStrategyPtr> row_strat_;
  std::vector<std::uint64_t> fed_;
  FinSeq hist_;
  std::uint64_t t_ = 0;
};

class SchemaInterleave final : public IIStrategy {
 public:
  explicit SchemaInterleave(CompositeStrategy s)
      : s_(std::make_shared<const CompositeStrategy>(std::move(s))) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<SchemaInterleaveSession>(s_);
  }

 private:
  std::shared_ptr<const CompositeStrategy> s_;
};

}  // namespace

IIStrategyPtr CompositeStrategy::interleave() const {
  return std::make_shared<SchemaInterleave>(*this);
}

UPStream default_control_value(const ControlSchedule& controls, std::uint64_t i) {
  auto w = find_witness(complement(controls.control(i).automaton));
  if (!w)
    throw GameError(ErrKind::InvalidArgument,
                    "control set covers every stream; no inactive default exists");
  return *w;
}

std::function<RowComponent(std::uint64_t)> make_default_tail(const ControlSchedule& controls) {
  controls.validate();
  auto defaults = std::make_shared<std::vector<UPStream>>();
  defaults->reserve(controls.sets.size());
  for (std::uint64_t c = 0; c < controls.sets.size(); ++c) {
    auto w = find_witness(complement(controls.sets[c].automaton));
    if (!w)
      throw GameError(ErrKind::InvalidArgument,
                      "control set covers every stream; no inactive default exists");
    defaults->push_back(*w);
  }
  ControlSchedule cs = controls;
  return [cs, defaults](std::uint64_t r) -> RowComponent {
    if (r % 2 == 1) return row_component(copy_mealy());
    return row_component((*defaults)[cs.class_of(r / 2)]);
  };
}

namespace {

// Assembles a schema over the standard tail: explicit rows plus bounds wide
// enough that the declared tail recurrence really closes the row quantifier.
CompositeStrategy make_schema(std::map<std::uint64_t, RowComponent> rows,
                              const ControlSchedule& controls) {
  CompositeStrategy t;
  const std::uint64_t top = rows.empty() ? 0 : rows.rbegin()->first + 1;
  t.rows = std::move(rows);
  t.tail = make_default_tail(controls);
  const OrbitShape rec = controls.recurrence();
  t.row_bound = std::max(top, 2 * rec.tail);
  t.tail_cycle = std::max<std::uint64_t>(rec.cycle, 1);
  return t;
}

// --- row-decoded game over an inner game ---

class GfxiMonitor final : public RuleMonitor {
 public:
  GfxiMonitor(GameSpec inner, bool strict) : inner_(std::move(inner)), strict_(strict) {}

 protected:
  std::optional<std::string> do_step(Digit i, const Move& ii) override {
    digits_.push_back(i);
    const auto [n, m] = unpair(t_);
    ++t_;
    if (n % 2 == 0) {
      if (!ii.is_nat() && !ii.is_pass())
        return "control " + row_tag(n) + ": move is neither a digit nor a skip";
      return std::nullopt;
    }
    auto& mon = row_mons_[n];
    if (!mon) mon = inner_.monitor_factory();
    if (mon->step(digits_[m], ii) == StepStatus::Violated) {
      if (strict_) return row_tag(n) + ": " + mon->violation_reason();
      excused_.insert("inner rules broken on " + row_tag(n) + " (binding only if activated)");
    }
    return std::nullopt;
  }

  std::vector<std::string> pending_obligations() const override {
    std::vector<std::string> v(excused_.begin(), excused_.end());
    v.push_back("some control row must activate");
    return v;
  }

 private:
  GameSpec inner_;
  bool strict_;
  FinSeq digits_;
  std::map<std::uint64_t, std::unique_ptr<RuleMonitor>> row_mons_;
  std::set<std::string> excused_;
  std::uint64_t t_ = 0;
};

RuleVerdict gfxi_verdict(const GameSpec& inner, const ControlSchedule& cs, bool strict,
                         const LassoRun& run, const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const OrbitShape srec = cs.recurrence();
  const ControlScan sc = control_scan(run, &srec);
  bool any_act = false;
  for (std::uint64_t i = 0; i < sc.start + sc.count; ++i) {
    const SkipRowRead even = read_skip_row(lasso_row_moves(run, 2 * i));
    if (!even.ok) return RuleVerdict::OutRules;
    const bool act = membership_up(cs.control(i).automaton, even.digits) == Membership::In;
    any_act = any_act || act;
    if (strict || act) {
      const LassoRun rr = zip_lasso(x, lasso_row_moves(run, 2 * i + 1));
      if (inner.up_verdict(rr, inner_ctx) == RuleVerdict::OutRules) return RuleVerdict::OutRules;
    }
  }
  return any_act ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

UPStream gfxi_output(const GameSpec& inner, const ControlSchedule& cs, const LassoRun& run,
                     const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const OrbitShape srec = cs.recurrence();
  const ControlScan sc = control_scan(run, &srec);
  for (std::uint64_t i = 0; i < sc.start + sc.count; ++i) {
    const SkipRowRead even = read_skip_row(lasso_row_moves(run, 2 * i));
    if (!even.ok) continue;
    if (membership_up(cs.control(i).automaton, even.digits) == Membership::In)
      return inner.up_output(zip_lasso(x, lasso_row_moves(run, 2 * i + 1)), inner_ctx);
  }
  throw GameError(ErrKind::NoActivationWithinBound, "no control row activates on this run");
}

GameSpec make_row_decoded(const GameSpec& inner, const ControlSchedule& controls, bool strict) {
  if (!inner.delayable)
    throw GameError(ErrKind::NotDelayable, "row-decoded games need a delayable inner game");
  controls.validate();
  GameSpec g;
  g.domain = inner.domain;
  g.alphabet = inner.alphabet;
  g.alphabet.nat = true;
  g.alphabet.pass = true;
  g.p_closed = false;
  g.delayable = false;
  const GameSpec in = inner;
  const ControlSchedule cs = controls;
  g.monitor_factory = [in, strict]() -> std::unique_ptr<RuleMonitor> {
    return std::make_unique<GfxiMonitor>(in, strict);
  };
  g.interpreter_factory = []() -> std::unique_ptr<Interpreter> {
    return std::make_unique<NullInterp>();
  };
  g.up_verdict = [in, cs, strict](const LassoRun& r, const LassoContext& c) {
    return gfxi_verdict(in, cs, strict, r, c);
  };
  g.up_output = [in, cs](const LassoRun& r, const LassoContext& c) {
    return gfxi_output(in, cs, r, c);
  };
  return g;
}

}  // namespace

GameSpec make_gfxi(const GameSpec& inner, const ControlSchedule& controls) {
  return make_row_decoded(inner, controls, true);
}

GameSpec make_tilde(const GameSpec& inner, const ControlSchedule& controls) {
  return make_row_decoded(inner, controls, false);
}

// --- limit game ---

namespace {

class GlimMonitor final : public RuleMonitor {
 public:
  explicit GlimMonitor(std::shared_ptr<const std::vector<GameSpec>> inners)
      : inners_(std::move(inners)) {}

 protected:
  std::optional<std::string> do_step(Digit i, const Move& ii) override {
    digits_.push_back(i);
    const auto [n, m] = unpair(t_);
    ++t_;
    auto& mon = row_mons_[n];
    if (!mon) {
      const std::uint64_t idx = std::min<std::uint64_t>(n, inners_->size() - 1);
      mon = (*inners_)[idx].monitor_factory();
    }
    if (mon->step(digits_[m], ii) == StepStatus::Violated)
      return row_tag(n) + ": " + mon->violation_reason();
    return std::nullopt;
  }

  std::vector<std::string> pending_obligations() const override {
    return {"row outputs must converge"};
  }

 private:
  std::shared_ptr<const std::vector<GameSpec>> inners_;
  FinSeq digits_;
  std::map<std::uint64_t, std::unique_ptr<RuleMonitor>> row_mons_;
  std::uint64_t t_ = 0;
};

const GameSpec& glim_inner_of(const std::vector<GameSpec>& inners, std::uint64_t r) {
  return inners[std::min<std::uint64_t>(r, inners.size() - 1)];
}

RuleVerdict glim_verdict(const std::vector<GameSpec>& inners, const LassoRun& run,
                         const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const ControlScan sc = plain_row_scan(run, inners.size() - 1);
  for (std::uint64_t r = 0; r < sc.start + sc.count; ++r) {
    const LassoRun rr = zip_lasso(x, lasso_row_moves(run, r));
    if (glim_inner_of(inners, r).up_verdict(rr, inner_ctx) == RuleVerdict::OutRules)
      return RuleVerdict::OutRules;
  }
  return RuleVerdict::InRules;
}

UPStream glim_output(const std::vector<GameSpec>& inners, const LassoRun& run,
                     const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const ControlScan sc = plain_row_scan(run, inners.size() - 1);
  std::optional<UPStream> value;
  for (std::uint64_t r = sc.start; r < sc.start + sc.count; ++r) {
    UPStream z = glim_inner_of(inners, r).up_output(zip_lasso(x, lasso_row_moves(run, r)),
                                                    inner_ctx);
    if (!value) {
      value = std::move(z);
    } else if (*value != z) {
      throw GameError(ErrKind::LimitUndetermined,
                      "row outputs do not stabilize on the recurrent block");
    }
  }
  return *value;
}

}  // namespace

GameSpec make_glim(std::vector<GameSpec> inners, GameSpec tail_inner) {
  inners.push_back(std::move(tail_inner));
  for (const GameSpec& g : inners)
    if (!g.p_closed)
      throw GameError(ErrKind::InvalidArgument, "limit rows must be skip-closed games");
  GameSpec g;
  g.domain = inners.back().domain;
  for (const GameSpec& in : inners) g.domain = intersect(g.domain, in.domain);
  g.domain = normalize(g.domain);
  for (const GameSpec& in : inners) {
    g.alphabet.nat |= in.alphabet.nat;
    g.alphabet.pass |= in.alphabet.pass;
    g.alphabet.erase |= in.alphabet.erase;
    g.alphabet.bt |= in.alphabet.bt;
    g.alphabet.rows |= in.alphabet.rows;
  }
  g.p_closed = false;
  g.delayable = false;
  auto shared = std::make_shared<const std::vector<GameSpec>>(std::move(inners));
  g.monitor_factory = [shared]() -> std::unique_ptr<RuleMonitor> {
    return std::make_unique<GlimMonitor>(shared);
  };
  g.interpreter_factory = []() -> std::unique_ptr<Interpreter> {
    return std::make_unique<NullInterp>();
  };
  g.up_verdict = [shared](const LassoRun& r, const LassoContext& c) {
    return glim_verdict(*shared, r, c);
  };
  g.up_output = [shared](const LassoRun& r, const LassoContext& c) {
    return glim_output(*shared, r, c);
  };
  return g;
}

// --- self-delimiting automaton codes ---

DetOmegaAutomaton CodeDecoder::decode(const FinSeq& digits) const {
  const DetOmegaAutomaton bad = empty_set();
  if (digits.empty()) return bad;
  const std::uint64_t len = digits[0];
  if (len > max_code_len || digits.size() < 1 + len) return bad;
  std::size_t p = 1;
  const std::size_t end = static_cast<std::size_t>(1 + len);
  auto next = [&](std::uint64_t& v) {
    if (p >= end) return false;
    v = digits[p++];
    return true;
  };
  std::uint64_t q = 0, init = 0;
  if (!next(q) || q == 0) return bad;
  if (!next(init) || init >= q) return bad;
  DetOmegaAutomaton a;
  a.trans.resize(q);
  a.priority.resize(q);
  a.initial = static_cast<std::uint32_t>(init);
  for (std::uint64_t st = 0; st < q; ++st) {
    std::uint64_t pr = 0, ecount = 0;
    if (!next(pr)) return bad;
    a.priority[st] = static_cast<std::uint32_t>(pr);
    if (!next(ecount) || ecount > len) return bad;
    for (std::uint64_t e = 0; e < ecount; ++e) {
      std::uint64_t d = 0, tgt = 0;
      if (!next(d) || !next(tgt) || tgt >= q) return bad;
      a.trans[st].edges[d] = static_cast<std::uint32_t>(tgt);
    }
    std::uint64_t oth = 0;
    if (!next(oth) || oth >= q) return bad;
    a.trans[st].otherwise = static_cast<std::uint32_t>(oth);
  }
  if (p != end) return bad;
  try {
    a.validate();
  } catch (const GameError&) {
    return bad;
  }
  return a;
}

DetOmegaAutomaton CodeDecoder::decode_up(const UPStream& code) const {
  const std::uint64_t len = code.at(0);
  if (len > max_code_len) return empty_set();
  return decode(code.take(1 + len));
}

FinSeq CodeDecoder::encode(const DetOmegaAutomaton& a) {
  FinSeq out;
  out.push_back(a.trans.size());
  out.push_back(a.initial);
  for (std::size_t st = 0; st < a.trans.size(); ++st) {
    out.push_back(a.priority[st]);
    out.push_back(a.trans[st].edges.size());
    for (const auto& [d, tgt] : a.trans[st].edges) {
      out.push_back(d);
      out.push_back(tgt);
    }
    out.push_back(a.trans[st].otherwise);
  }
  return out;
}

UPStream CodeDecoder::code_stream(const DetOmegaAutomaton& a) {
  FinSeq pay = encode(a);
  FinSeq pre;
  pre.reserve(pay.size() + 1);
  pre.push_back(pay.size());
  pre.insert(pre.end(), pay.begin(), pay.end());
  return UPStream(std::move(pre), {0});
}

// --- coded-set game ---

namespace {

class NatOnlyMonitor final : public RuleMonitor {
 public:
  explicit NatOnlyMonitor(std::vector<std::string> pending) : pending_(std::move(pending)) {}

 protected:
  std::optional<std::string> do_step(Digit, const Move& ii) override {
    if (!ii.is_nat()) return std::string("move must be a digit");
    return std::nullopt;
  }
  std::vector<std::string> pending_obligations() const override { return pending_; }

 private:
  std::vector<std::string> pending_;
};

bool lasso_moves_all_nat(const LassoRun& run) {
  for (const auto& e : run.prefix)
    if (!e.ii.is_nat()) return false;
  for (const auto& e : run.period)
    if (!e.ii.is_nat()) return false;
  return true;
}

// Representative index r' with the same row content as pair(n, m): the exact
// index when it is small, else a congruent index inside the recurrent block
// (mod-cycle arithmetic sidesteps forming 2^n).
std::uint64_t coded_row_rep(const OrbitShape& rows, std::uint64_t n, std::uint64_t m) {
  const std::uint64_t s = rows.tail;
  const std::uint64_t c = std::max<std::uint64_t>(rows.cycle, 1);
  if (n < 40 && m < (std::uint64_t{1} << 20)) {
    const std::uint64_t r = pair_nm(n, m);
    if (r < s + c) return r;
    return s + (r - s) % c;
  }
  const std::uint64_t a = pow2_mod(n, c);
  std::uint64_t rm = a * ((2 * (m % c) + 1) % c) % c;
  rm = (rm + c - (1 % c)) % c;
  return s + (rm + c - s % c) % c;
}

// Output digits of the coded-set game, closed along the pow2 orbit: digit n
// depends on the rows pair(n, .), whose contents for large n repeat with the
// orbit of 2^n mod the row cycle.
std::optional<UPStream> ggamma_output_digits(const CodeDecoder& dec, const LassoRun& run,
                                             const LassoContext& ctx, bool throw_on_miss) {
  const UPStream x = lasso_input(run);
  const OrbitShape rows = row_recurrence(run.prefix.size(), run.period.size());
  const OrbitShape orb = pow2_orbit(std::max<std::uint64_t>(rows.cycle, 1));
  std::uint64_t n_floor = 0;
  while (n_floor < 63 && ((std::uint64_t{1} << n_floor) - 1) < rows.tail) ++n_floor;
  const std::uint64_t n0 = std::max(orb.tail, n_floor);
  const std::uint64_t dn = std::max<std::uint64_t>(orb.cycle, 1);
  if (n0 + dn > kScanCap)
    throw GameError(ErrKind::Overflow, "lasso recurrence too wide for exact row analysis");
  FinSeq zs;
  zs.reserve(n0 + dn);
  for (std::uint64_t n = 0; n < n0 + dn; ++n) {
    std::optional<std::uint64_t> zn;
    for (std::uint64_t m = 0; m <= ctx.max_m; ++m) {
      const std::uint64_t r = coded_row_rep(rows, n, m);
      const NatRowRead row = read_nat_row(lasso_row_moves(run, r));
      if (!row.ok) continue;
      if (membership_up(dec.decode_up(row.digits), x) == Membership::In) {
        zn = m;
        break;
      }
    }
    if (!zn) {
      if (throw_on_miss)
        throw GameError(ErrKind::NoWitnessWithinBound,
                        "output digit " + std::to_string(n) + " has no coded witness");
      return std::nullopt;
    }
    zs.push_back(*zn);
  }
  return UPStream(FinSeq(zs.begin(), zs.begin() + n0), FinSeq(zs.begin() + n0, zs.end()));
}

}  // namespace

GameSpec make_ggamma(const CodeDecoder& dec) {
  GameSpec g;
  g.domain = full_space();
  g.alphabet.nat = true;
  g.p_closed = false;
  g.delayable = false;
  const CodeDecoder d = dec;
  g.monitor_factory = []() -> std::unique_ptr<RuleMonitor> {
    return std::make_unique<NatOnlyMonitor>(
        std::vector<std::string>{"every output digit needs a coded witness"});
  };
  g.interpreter_factory = []() -> std::unique_ptr<Interpreter> {
    return std::make_unique<NullInterp>();
  };
  g.up_verdict = [d](const LassoRun& r, const LassoContext& c) {
    if (!lasso_moves_all_nat(r)) return RuleVerdict::OutRules;
    return ggamma_output_digits(d, r, c, false) ? RuleVerdict::InRules : RuleVerdict::OutRules;
  };
  g.up_output = [d](const LassoRun& r, const LassoContext& c) {
    return *ggamma_output_digits(d, r, c, true);
  };
  return g;
}

// --- piecewise coded game ---

namespace {

class GfgammaMonitor final : public RuleMonitor {
 public:
  explicit GfgammaMonitor(GameSpec inner) : inner_(std::move(inner)) {}

 protected:
  std::optional<std::string> do_step(Digit i, const Move& ii) override {
    digits_.push_back(i);
    const auto [n, m] = unpair(t_);
    ++t_;
    if (n % 2 == 0) {
      if (!ii.is_nat()) return "code " + row_tag(n) + ": move must be a digit";
      return std::nullopt;
    }
    auto& mon = row_mons_[n];
    if (!mon) mon = inner_.monitor_factory();
    if (mon->step(digits_[m], ii) == StepStatus::Violated)
      return row_tag(n) + ": " + mon->violation_reason();
    return std::nullopt;
  }

  std::vector<std::string> pending_obligations() const override {
    return {"some coded region must contain the input"};
  }

 private:
  GameSpec inner_;
  FinSeq digits_;
  std::map<std::uint64_t, std::unique_ptr<RuleMonitor>> row_mons_;
  std::uint64_t t_ = 0;
};

RuleVerdict gfgamma_verdict(const GameSpec& inner, const CodeDecoder& dec, const LassoRun& run,
                            const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const ControlScan sc = control_scan(run, nullptr);
  bool any_act = false;
  for (std::uint64_t i = 0; i < sc.start + sc.count; ++i) {
    const NatRowRead even = read_nat_row(lasso_row_moves(run, 2 * i));
    if (!even.ok) return RuleVerdict::OutRules;
    any_act = any_act ||
              membership_up(dec.decode_up(even.digits), x) == Membership::In;
    const LassoRun rr = zip_lasso(x, lasso_row_moves(run, 2 * i + 1));
    if (inner.up_verdict(rr, inner_ctx) == RuleVerdict::OutRules) return RuleVerdict::OutRules;
  }
  return any_act ? RuleVerdict::InRules : RuleVerdict::OutRules;
}

UPStream gfgamma_output(const GameSpec& inner, const CodeDecoder& dec, const LassoRun& run,
                        const LassoContext& ctx) {
  const UPStream x = lasso_input(run);
  LassoContext inner_ctx = ctx;
  inner_ctx.input = &x;
  const ControlScan sc = control_scan(run, nullptr);
  for (std::uint64_t i = 0; i < sc.start + sc.count; ++i) {
    const NatRowRead even = read_nat_row(lasso_row_moves(run, 2 * i));
    if (!even.ok) continue;
    if (membership_up(dec.decode_up(even.digits), x) == Membership::In)
      return inner.up_output(zip_lasso(x, lasso_row_moves(run, 2 * i + 1)), inner_ctx);
  }
  throw GameError(ErrKind::NoActivationWithinBound, "no coded region contains the input");
}

}  // namespace

GameSpec make_gfgamma(const GameSpec& inner, const CodeDecoder& dec) {
  if (!inner.delayable)
    throw GameError(ErrKind::NotDelayable, "row-decoded games need a delayable inner game");
  GameSpec g;
  g.domain = inner.domain;
  g.alphabet = inner.alphabet;
  g.alphabet.nat = true;
  g.p_closed = false;
  g.delayable = false;
  const GameSpec in = inner;
  const CodeDecoder d = dec;
  g.monitor_factory = [in]() -> std::unique_ptr<RuleMonitor> {
    return std::make_unique<GfgammaMonitor>(in);
  };
  g.interpreter_factory = []() -> std::unique_ptr<Interpreter> {
    return std::make_unique<NullInterp>();
  };
  g.up_verdict = [in, d](const LassoRun& r, const LassoContext& c) {
    return gfgamma_verdict(in, d, r, c);
  };
  g.up_output = [in, d](const LassoRun& r, const LassoContext& c) {
    return gfgamma_output(in, d, r, c);
  };
  return g;
}

// --- finite-sequence coding ---

FinSeq enum_seq(std::uint64_t k, std::uint64_t m) {
  if (k == 0) throw GameError(ErrKind::InvalidArgument, "enum_seq needs a positive length");
  FinSeq s;
  s.reserve(k);
  while (k > 1) {
    const auto [a, b] = unpair(m);
    s.push_back(a);
    m = b;
    --k;
  }
  s.push_back(m);
  return s;
}

std::uint64_t enum_index(const FinSeq& s) {
  if (s.empty()) throw GameError(ErrKind::InvalidArgument, "enum_index needs a nonempty tuple");
  std::uint64_t m = s.back();
  for (std::size_t i = s.size() - 1; i-- > 0;) m = pair_nm(s[i], m);
  return m;
}

// --- digit-coded Lipschitz game ---

namespace {

// Virtual stream of row r: one fresh digit per global turn from floor(r/2)
// on, entry j unpacked from II's digit at turn floor(r/2) + j.
UPStream glipxi_row_stream(const UPStream& y, std::uint64_t r) {
  const std::uint64_t nr = r / 2;
  const std::uint64_t py = y.prefix().size();
  const std::uint64_t ly = y.period().size();
  const std::uint64_t j0 = py > nr ? py - nr : 0;
  FinSeq pre, per;
  for (std::uint64_t j = 0; j < j0 + ly; ++j) {
    const std::uint64_t t = nr + j;
    const FinSeq tup = enum_seq(2 * t + 2, y.at(t));
    (j < j0 ? pre : per).push_back(tup[r]);
  }
  return UPStream(std::move(pre), std::move(per));
}

// Unpair chains of 64-bit digits die out by depth 64, so rows at index 64
// and beyond read the constant-0 stream; that closes the activation search.
constexpr std::uint64_t kGlipxiStableRow = 64;

RuleVerdict glipxi_verdict(const ControlSchedule& cs, const LassoRun& run) {
  if (!lasso_moves_all_nat(run)) return RuleVerdict::OutRules;
  FinSeq pre, per;
  for (const auto& e : run.prefix) pre.push_back(e.ii.nat);
  for (const auto& e : run.period) per.push_back(e.ii.nat);
  const UPStream y(std::move(pre), std::move(per));
  const OrbitShape srec = cs.recurrence();
  const std::uint64_t i0 = std::max(kGlipxiStableRow / 2, srec.tail);
  const std::uint64_t d = std::max<std::uint64_t>(srec.cycle, 1);
  if (i0 + d > kScanCap)
    throw GameError(ErrKind::Overflow, "schedule recurrence too wide for exact analysis");
  for (std::uint64_t i = 0; i < i0 + d; ++i)
    if (membership_up(cs.control(i).automaton, glipxi_row_stream(y, 2 * i)) == Membership::In)
      return RuleVerdict::InRules;
  return RuleVerdict::OutRules;
}

UPStream glipxi_output(const ControlSchedule& cs, const LassoRun& run) {
  if (!lasso_moves_all_nat(run))
    throw GameError(ErrKind::RuleViolation, "digit-coded game: moves must be digits");
  FinSeq pre, per;
  for (const auto& e : run.prefix) pre.push_back(e.ii.nat);
  for (const auto& e : run.period) per.push_back(e.ii.nat);
  const UPStream y(std::move(pre), std::move(per));
  const OrbitShape srec = cs.recurrence();
  const std::uint64_t i0 = std::max(kGlipxiStableRow / 2, srec.tail);
  const std::uint64_t d = std::max<std::uint64_t>(srec.cycle, 1);
  for (std::uint64_t i = 0; i < i0 + d; ++i)
    if (membership_up(cs.control(i).automaton, glipxi_row_stream(y, 2 * i)) == Membership::In)
      return glipxi_row_stream(y, 2 * i + 1);
  throw GameError(ErrKind::NoActivationWithinBound, "no control row activates on this run");
}

}  // namespace

GameSpec make_glipxi(const ControlSchedule& controls) {
  controls.validate();
  GameSpec g;
  g.domain = full_space();
  g.alphabet.nat = true;
  g.p_closed = false;
  g.delayable = false;
  const ControlSchedule cs = controls;
  g.monitor_factory = []() -> std::unique_ptr<RuleMonitor> {
    return std::make_unique<NatOnlyMonitor>(
        std::vector<std::string>{"some control row must activate"});
  };
  g.interpreter_factory = []() -> std::unique_ptr<Interpreter> {
    return std::make_unique<NullInterp>();
  };
  g.up_verdict = [cs](const LassoRun& r, const LassoContext&) { return glipxi_verdict(cs, r); };
  g.up_output = [cs](const LassoRun& r, const LassoContext&) { return glipxi_output(cs, r); };
  return g;
}

// --- exact activation calculus on row schemas ---

namespace {

// Scope of the search: explicit control indices first, then one declared
// tail cycle; when that whole range fits under max_rows the declaration
// closes the quantifier over all control indices.
struct ScanShape {
  std::uint64_t scan = 0;
  bool closed = false;
};

ScanShape scan_shape(const CompositeStrategy& tau, std::uint64_t max_rows) {
  ScanShape s;
  const std::uint64_t full =
      (tau.row_bound + 1) / 2 + std::max<std::uint64_t>(tau.tail_cycle, 1);
  s.scan = std::min(full, std::max<std::uint64_t>(max_rows, 1));
  s.closed = s.scan == full;
  return s;
}

// Skip-filtered stream of control row 2i; a rule-breaking row never
// activates, reported as absent.
std::optional<UPStream> control_row_stream(const CompositeStrategy& tau, std::uint64_t i,
                                           const UPStream& x) {
  try {
    return eval_function(w_rules(), *tau.row_strategy(2 * i), x);
  } catch (const GameError& e) {
    if (e.kind() == ErrKind::RuleViolation) return std::nullopt;
    throw;
  }
}

}  // namespace

ActivationProfile composite_activation(const GameSpec&, const ControlSchedule& controls,
                                       const CompositeStrategy& tau, const UPStream& x,
                                       std::uint64_t max_rows) {
  const ScanShape sh = scan_shape(tau, max_rows);
  ActivationProfile p;
  p.bound = sh.scan;
  for (std::uint64_t i = 0; i < sh.scan; ++i) {
    const auto u = control_row_stream(tau, i, x);
    const Membership v =
        u ? membership_up(controls.control(i).automaton, *u) : Membership::Out;
    p.verdicts.push_back(v);
    if (v == Membership::In && !p.least) p.least = i;
  }
  return p;
}

UPStream composite_eval(const GameSpec& inner, const ControlSchedule& controls,
                        const CompositeStrategy& tau, const UPStream& x,
                        std::uint64_t max_rows) {
  const ActivationProfile p = composite_activation(inner, controls, tau, x, max_rows);
  if (!p.least)
    throw GameError(ErrKind::NoActivationWithinBound,
                    scan_shape(tau, max_rows).closed
                        ? "no control row activates on this input"
                        : "no control row activates within the searched bound");
  return eval_function(inner, *tau.row_strategy(2 * *p.least + 1), x);
}

Adjudication composite_adjudicate(const GameSpec& inner, const ControlSchedule& controls,
                                  const CompositeStrategy& tau, const UPStream& x,
                                  const DetOmegaAutomaton& A, const DetOmegaAutomaton& B,
                                  bool strict, std::uint64_t max_rows) {
  if (membership_up(inner.domain, x) == Membership::Out)
    return {Player::II, "input leaves the domain"};
  const ScanShape sh = scan_shape(tau, max_rows);
  std::optional<std::uint64_t> least;
  for (std::uint64_t i = 0; i < sh.scan; ++i) {
    std::optional<UPStream> u;
    try {
      u = eval_function(w_rules(), *tau.row_strategy(2 * i), x);
    } catch (const GameError& e) {
      if (e.kind() != ErrKind::RuleViolation) throw;
      return {Player::I, "control " + row_tag(2 * i) + " breaks the skip rules"};
    }
    const bool act = membership_up(controls.control(i).automaton, *u) == Membership::In;
    if (strict || act) {
      try {
        (void)eval_function(inner, *tau.row_strategy(2 * i + 1), x);
      } catch (const GameError& e) {
        if (e.kind() != ErrKind::RuleViolation) throw;
        return {Player::I, row_tag(2 * i + 1) + " breaks the inner rules"};
      }
    }
    if (act && !least) least = i;
  }
  if (!least)
    return {Player::I, sh.closed ? "no control row activates"
                                 : "no control row activates within the searched bound"};
  const UPStream z = eval_function(inner, *tau.row_strategy(2 * *least + 1), x);
  const bool xin = membership_up(A, x) == Membership::In;
  const bool zin = membership_up(B, z) == Membership::In;
  if (xin == zin) return {Player::II, "payoff equivalence holds"};
  return {Player::I, xin ? "input in A but output outside B" : "input outside A but output in B"};
}

LegalityReport composite_legality(const GameSpec& inner, const ControlSchedule& controls,
                                  const CompositeStrategy& tau, bool strict,
                                  std::uint64_t samples, std::uint64_t depth,
                                  std::uint64_t seed) {
  controls.validate();
  const std::uint64_t scan =
      (tau.row_bound + 1) / 2 + std::max<std::uint64_t>(tau.tail_cycle, 1);
  bool exact = true;
  auto fail = [](LegalityReport sub, const std::string& where) {
    sub.detail = where + ": " + sub.detail;
    return sub;
  };
  for (std::uint64_t i = 0; i < scan; ++i) {
    const RowComponent even = tau.row(2 * i);
    if (even.mealy) {
      LegalityReport r = legality_check_exact(w_rules(), *even.mealy);
      if (r.verdict == LegalityReport::Verdict::Illegal)
        return fail(std::move(r), "control " + row_tag(2 * i));
    } else {
      LegalityReport r =
          legality_check_sampled(w_rules(), *even.strategy, samples, depth, seed + 2 * i);
      if (r.verdict == LegalityReport::Verdict::Illegal)
        return fail(std::move(r), "control " + row_tag(2 * i));
      exact = false;
    }
    std::optional<Membership> act;
    if (even.constant) act = membership_up(controls.control(i).automaton, *even.constant);
    if (2 * i >= tau.row_bound) {
      // Tail region: the schema claims these rows never activate.
      if (!act) {
        exact = false;
      } else if (*act == Membership::In) {
        LegalityReport r;
        r.verdict = LegalityReport::Verdict::Illegal;
        r.detail = "tail control " + row_tag(2 * i) + " activates; the tail claim fails";
        return r;
      }
    }
    const RowComponent odd = tau.row(2 * i + 1);
    LegalityReport r;
    if (odd.mealy && inner.shape) {
      r = legality_check_exact(inner, *odd.mealy);
    } else {
      r = legality_check_sampled(inner, *odd.strategy, samples, depth, seed + 2 * i + 1);
      if (r.verdict != LegalityReport::Verdict::Illegal) exact = false;
    }
    if (r.verdict == LegalityReport::Verdict::Illegal) {
      if (strict) return fail(std::move(r), row_tag(2 * i + 1));
      if (!act) {
        exact = false;
      } else if (*act == Membership::In) {
        return fail(std::move(r), "activated " + row_tag(2 * i + 1));
      }
      // act == Out: the row never binds; excused.
    }
  }
  // Activation obligation: some control row must activate on every input.  A
  // constant scanned row inside its control set settles it for all inputs at
  // once; otherwise the cover is only sampled.
  bool cover_proved = false;
  for (std::uint64_t i = 0; i < scan && !cover_proved; ++i) {
    const RowComponent even = tau.row(2 * i);
    cover_proved = even.constant &&
                   membership_up(controls.control(i).automaton, *even.constant) == Membership::In;
  }
  if (!cover_proved) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::uint64_t s = 0; s < samples; ++s) {
      const UPStream x = rng.up_stream(6, 6, 5);
      if (membership_up(inner.domain, x) == Membership::Out) continue;
      if (!composite_activation(inner, controls, tau, x, scan).least) {
        LegalityReport r;
        r.verdict = LegalityReport::Verdict::Illegal;
        r.detail = "activation obligation fails on a sampled input";
        return r;
      }
    }
    exact = false;
  }
  LegalityReport out;
  out.verdict = exact ? LegalityReport::Verdict::Legal : LegalityReport::Verdict::UnknownAtDepth;
  out.depth = depth;
  out.detail = exact ? "all rows checked exactly; tail closed by the declared recurrence"
                     : "some rows lacked exact views and were only sampled";
  return out;
}

// --- limit evaluation ---

UPStream glim_eval_exact(const GameSpec& inner, const LimitFamily& fam, const UPStream& x) {
  if (!fam.row) throw GameError(ErrKind::InvalidArgument, "limit family has no rows");
  if (!fam.constant_from)
    throw GameError(ErrKind::LimitUndetermined,
                    "no declared stabilization row; finitely many rows cannot settle the limit");
  return eval_function(inner, *fam.row(*fam.constant_from), x);
}

GlimProbe glim_probe(const GameSpec& inner, const LimitFamily& fam, const UPStream& x,
                     std::uint64_t rows_to_check) {
  if (!fam.row) throw GameError(ErrKind::InvalidArgument, "limit family has no rows");
  GlimProbe p;
  p.row_outputs.reserve(rows_to_check);
  for (std::uint64_t r = 0; r < rows_to_check; ++r)
    p.row_outputs.push_back(eval_function(inner, *fam.row(r), x));
  if (p.row_outputs.size() >= 2) {
    const UPStream& v = p.row_outputs.back();
    std::uint64_t from = p.row_outputs.size() - 1;
    while (from > 0 && p.row_outputs[from - 1] == v) --from;
    if (from + 2 <= p.row_outputs.size()) {
      p.stable_value = v;
      p.stable_from = from;
    }
  }
  return p;
}

// --- coded-set compilation ---

namespace {

DetOmegaAutomaton decode_payload(const CodeDecoder& dec, const FinSeq& pay) {
  FinSeq full;
  full.reserve(pay.size() + 1);
  full.push_back(pay.size());
  full.insert(full.end(), pay.begin(), pay.end());
  return dec.decode(full);
}

std::optional<std::uint64_t> gamma_digit(const GammaFamily& fam, const CodeDecoder& dec,
                                         std::uint64_t n, const UPStream& x) {
  if (!fam.code) throw GameError(ErrKind::InvalidArgument, "code family has no codes");
  for (std::uint64_t m = 0; m <= fam.max_m; ++m)
    if (membership_up(decode_payload(dec, fam.code(n, m)), x) == Membership::In) return m;
  return std::nullopt;
}

class GammaCodeSession final : public IISession {
 public:
  explicit GammaCodeSession(std::shared_ptr<const GammaFamily> fam) : fam_(std::move(fam)) {}

  Move on_digit(Digit) override {
    const auto [r, pos] = unpair(t_);
    ++t_;
    const auto [n, m] = unpair(r);
    const FinSeq pay = fam_->code(n, m);
    if (pos == 0) return Move::nat_move(pay.size());
    const std::uint64_t idx = pos - 1;
    return Move::nat_move(idx < pay.size() ? pay[idx] : 0);
  }

 private:
  std::shared_ptr<const GammaFamily> fam_;
  std::uint64_t t_ = 0;
};

class GammaCodeStrategy final : public IIStrategy {
 public:
  explicit GammaCodeStrategy(GammaFamily fam)
      : fam_(std::make_shared<const GammaFamily>(std::move(fam))) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<GammaCodeSession>(fam_);
  }

 private:
  std::shared_ptr<const GammaFamily> fam_;
};

}  // namespace

IIStrategyPtr gamma_compile(const GammaFamily& fam, const CodeDecoder& dec,
                            const std::vector<UPStream>& samples) {
  constexpr std::uint64_t kCheckDigits = 8;
  for (const UPStream& x : samples)
    for (std::uint64_t n = 0; n < kCheckDigits; ++n)
      if (!gamma_digit(fam, dec, n, x))
        throw GameError(ErrKind::IncoherentSpec,
                        "digit " + std::to_string(n) +
                            " has no coded witness on a validation sample");
  return std::make_shared<GammaCodeStrategy>(fam);
}

UPStream gamma_eval(const GammaFamily& fam, const CodeDecoder& dec, const UPStream& x) {
  const std::uint64_t s = x.prefix().size();
  const std::uint64_t c = x.period().size();
  FinSeq zs;
  zs.reserve(s + 2 * c);
  for (std::uint64_t n = 0; n < s + 2 * c; ++n) {
    const auto zn = gamma_digit(fam, dec, n, x);
    if (!zn)
      throw GameError(ErrKind::NoWitnessWithinBound,
                      "output digit " + std::to_string(n) + " has no coded witness");
    zs.push_back(*zn);
  }
  // Tail positions n and n + c read the same input tail, so a family that is
  // uniform in the digit position must repeat across one period.
  for (std::uint64_t i = 0; i < c; ++i)
    if (zs[s + i] != zs[s + c + i])
      throw GameError(ErrKind::IncoherentSpec,
                      "family is not uniform in the digit position across one input period");
  return UPStream(FinSeq(zs.begin(), zs.begin() + s),
                  FinSeq(zs.begin() + s, zs.begin() + s + c));
}

bool gamma_decider(const GammaFamily& fam, const CodeDecoder& dec, std::uint64_t n,
                   std::uint64_t m, const UPStream& x) {
  const auto zn = gamma_digit(fam, dec, n, x);
  return zn.has_value() && *zn == m;
}

// --- piecewise compilation ---

namespace {

// Reduction witness plus the canonical control its target matches.
struct ShapedWitness {
  MealyStrategy witness;
  DetOmegaAutomaton target;
};

ShapedWitness witness_for_region(const DetOmegaAutomaton& region, const std::string& what) {
  if (is_safety_shape(region))
    return {reduce_safety_to_Z(region), canonical_pi1().automaton};
  if (is_buchi_shape(region))
    return {reduce_buchi_to_INF0(region), canonical_pi2().automaton};
  throw GameError(ErrKind::UnsupportedRegionShape,
                  what + ": region is neither safety-shaped nor Buechi-shaped");
}

std::uint64_t find_matching_slot(const ControlSchedule& cs, const DetOmegaAutomaton& target,
                                 std::uint64_t lo, const std::string& what) {
  const OrbitShape rec = cs.recurrence();
  const std::uint64_t hi = std::max(lo, rec.tail) + std::max<std::uint64_t>(rec.cycle, 1);
  for (std::uint64_t n = lo; n < hi; ++n)
    if (equivalent(cs.control(n).automaton, target)) return n;
  throw GameError(ErrKind::InvalidArgument,
                  what + ": no control slot of the matching shape is available");
}

}  // namespace

CompositeStrategy piecewise_compile(const PiecewiseSpec& spec, const GameSpec&) {
  spec.controls.validate();
  std::map<std::uint64_t, RowComponent> rows;
  std::optional<std::uint64_t> prev;
  for (std::size_t k = 0; k < spec.pieces.size(); ++k) {
    const PiecewisePiece& pc = spec.pieces[k];
    const std::string what = "piece " + std::to_string(k);
    if (!pc.piece) throw GameError(ErrKind::InvalidArgument, what + " has no strategy");
    MealyStrategy wit;
    std::uint64_t slot = 0;
    if (pc.witness) {
      wit = *pc.witness;
      slot = prev ? *prev + 1 : 0;
    } else if (pc.region) {
      ShapedWitness sw = witness_for_region(*pc.region, what + " (give an explicit witness)");
      wit = std::move(sw.witness);
      slot = find_matching_slot(spec.controls, sw.target, prev ? *prev + 1 : 0, what);
    } else {
      throw GameError(ErrKind::InvalidArgument, what + " needs a region or a witness");
    }
    rows[2 * slot] = row_component(std::move(wit));
    rows[2 * slot + 1] = row_component(pc.piece);
    prev = slot;
  }
  return make_schema(std::move(rows), spec.controls);
}

PiecewiseDecomposition piecewise_decompile(const CompositeStrategy& tau, const GameSpec& inner,
                                           const ControlSchedule& controls,
                                           std::uint64_t max_rows) {
  auto t = std::make_shared<const CompositeStrategy>(tau);
  auto in = std::make_shared<const GameSpec>(inner);
  auto cs = std::make_shared<const ControlSchedule>(controls);
  PiecewiseDecomposition d;
  d.piece_count = scan_shape(tau, max_rows).scan;
  d.region = [t, in, cs, max_rows](std::uint64_t n, const UPStream& x) {
    const ActivationProfile p = composite_activation(*in, *cs, *t, x, max_rows);
    return p.least.has_value() && *p.least == n;
  };
  d.piece = [t](std::uint64_t n) { return t->row_strategy(2 * n + 1); };
  return d;
}

// --- control schedule swaps ---

CompositeStrategy control_swap(const CompositeStrategy& tau, const ControlSchedule& from,
                               const ControlSchedule& to,
                               const std::vector<std::uint64_t>& index_map,
                               const std::vector<MealyStrategy>& reductions,
                               const std::vector<UPStream>& sample_inputs) {
  from.validate();
  to.validate();
  if (index_map.size() != reductions.size())
    throw GameError(ErrKind::InvalidArgument, "index_map and reductions must align");
  for (std::size_t k = 1; k < index_map.size(); ++k)
    if (index_map[k] <= index_map[k - 1])
      throw GameError(ErrKind::InvalidArgument, "index_map must be strictly increasing");
  std::map<std::uint64_t, RowComponent> rows;
  for (std::size_t k = 0; k < index_map.size(); ++k) {
    const std::uint64_t nk = index_map[k];
    for (const UPStream& x : sample_inputs) {
      const auto u = control_row_stream(tau, k, x);
      if (!u) continue;
      const UPStream v = letter_transduce(reductions[k], *u);
      const bool a = membership_up(from.control(k).automaton, *u) == Membership::In;
      const bool b = membership_up(to.control(nk).automaton, v) == Membership::In;
      if (a != b)
        throw GameError(ErrKind::WitnessFailure,
                        "reduction " + std::to_string(k) +
                            " disagrees with the schedule change on a sample input");
    }
    const RowComponent oldc = tau.row(2 * k);
    RowComponent nc;
    if (oldc.constant) {
      nc = row_component(letter_transduce(reductions[k], *oldc.constant));
    } else {
      nc = row_component(compose_strategies(as_strategy(reductions[k]), oldc.strategy, w_rules()));
    }
    rows[2 * nk] = std::move(nc);
    rows[2 * nk + 1] = tau.row(2 * k + 1);
  }
  return make_schema(std::move(rows), to);
}

// --- player I transfers ---

namespace {

using SimFn = std::function<Digit(std::uint64_t, std::uint64_t, const FinSeq&)>;

// I echoes the wrapped strategy's digits; II's replies are rewritten into
// the simulated row-game play before the wrapped strategy sees them.
class TransferISession final : public ISession {
 public:
  TransferISession(std::unique_ptr<ISession> inner, std::shared_ptr<const SimFn> sim)
      : inner_(std::move(inner)), sim_(std::move(sim)) {}

  Digit next() override { return inner_->next(); }

  void on_reply(const Move& m) override {
    y_.push_back(m.is_nat() ? m.nat : 0);
    const auto [n, mm] = unpair(t_);
    ++t_;
    inner_->on_reply(Move::nat_move((*sim_)(n, mm, y_)));
  }

 private:
  std::unique_ptr<ISession> inner_;
  std::shared_ptr<const SimFn> sim_;
  FinSeq y_;
  std::uint64_t t_ = 0;
};

class TransferIStrategy final : public IStrategy {
 public:
  TransferIStrategy(IStrategyPtr rho, SimFn sim)
      : rho_(std::move(rho)), sim_(std::make_shared<const SimFn>(std::move(sim))) {}
  std::unique_ptr<ISession> session() const override {
    return std::make_unique<TransferISession>(rho_->session(), sim_);
  }

 private:
  IStrategyPtr rho_;
  std::shared_ptr<const SimFn> sim_;
};

}  // namespace

IStrategyPtr playerI_transfer(IStrategyPtr rho, const UPStream& z,
                              const ControlSchedule& controls) {
  if (!rho) throw GameError(ErrKind::InvalidArgument, "null strategy");
  controls.validate();
  if (membership_up(controls.control(0).automaton, z) == Membership::Out)
    throw GameError(ErrKind::BadAnchor, "anchor stream lies outside the first control set");
  const UPStream zz = z;
  return std::make_shared<TransferIStrategy>(
      std::move(rho), [zz](std::uint64_t n, std::uint64_t mm, const FinSeq& y) -> Digit {
        if (n % 2 == 0) return zz.at(mm);
        return y[mm];
      });
}

IStrategyPtr playerI_transfer_tilde(IStrategyPtr rho, const UPStream& z,
                                    const ControlSchedule& controls) {
  // The simulated II play abides by every row rule, so the same rewriting
  // wins the relaxed-rules game too.
  return playerI_transfer(std::move(rho), z, controls);
}

IStrategyPtr playerI_transfer_gamma(IStrategyPtr rho, const CodeDecoder&) {
  if (!rho) throw GameError(ErrKind::InvalidArgument, "null strategy");
  const UPStream full_code = CodeDecoder::code_stream(full_space());
  const UPStream empty_code = CodeDecoder::code_stream(empty_set());
  return std::make_shared<TransferIStrategy>(
      std::move(rho),
      [full_code, empty_code](std::uint64_t n, std::uint64_t mm, const FinSeq& y) -> Digit {
        if (n % 2 == 1) return y[mm];
        return n == 0 ? full_code.at(mm) : empty_code.at(mm);
      });
}

// --- digit-coded Lipschitz strategies ---

namespace {

struct GlipRowState {
  IIStrategyPtr strat;  // owns the session's strategy
  std::unique_ptr<IISession> ses;
  FinSeq emitted;
};

class GlipInterleaveSession final : public IISession {
 public:
  explicit GlipInterleaveSession(std::shared_ptr<const GlipStrategy> s) : s_(std::move(s)) {}

  Move on_digit(Digit d) override {
    hist_.push_back(d);
    const std::uint64_t t = t_++;
    const std::size_t old_rows = rows_.size();
    while (rows_.size() < 2 * t + 2) {
      const std::uint64_t r = rows_.size();
      GlipRowState st;
      st.strat = s_->row(r);
      if (!st.strat) throw GameError(ErrKind::InvalidArgument, row_tag(r) + ": null row");
      st.ses = st.strat->session();
      rows_.push_back(std::move(st));
      for (Digit h : hist_) feed(rows_.back(), h, r);
    }
    for (std::size_t r = 0; r < old_rows; ++r) feed(rows_[r], d, r);
    FinSeq tup(2 * t + 2);
    for (std::uint64_t r = 0; r < 2 * t + 2; ++r) {
      const std::uint64_t need = t - r / 2;
      if (need >= rows_[r].emitted.size())
        throw GameError(ErrKind::InvalidArgument,
                        row_tag(r) + " starved: too few digits emitted by its deadline");
      tup[r] = rows_[r].emitted[need];
    }
    return Move::nat_move(enum_index(tup));
  }

 private:
  static void feed(GlipRowState& st, Digit d, std::uint64_t r) {
    const Move m = st.ses->on_digit(d);
    if (m.is_nat()) {
      st.emitted.push_back(m.nat);
    } else if (!m.is_pass()) {
      throw GameError(ErrKind::InvalidArgument, row_tag(r) + ": rows emit digits or skips");
    }
  }

  std::shared_ptr<const GlipStrategy> s_;
  std::vector<GlipRowState> rows_;
  FinSeq hist_;
  std::uint64_t t_ = 0;
};

class GlipInterleave final : public IIStrategy {
 public:
  explicit GlipInterleave(GlipStrategy s)
      : s_(std::make_shared<const GlipStrategy>(std::move(s))) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<GlipInterleaveSession>(s_);
  }

 private:
  std::shared_ptr<const GlipStrategy> s_;
};

class GlipExtractSession final : public IISession {
 public:
  GlipExtractSession(std::unique_ptr<IISession> inner, std::uint64_t n)
      : inner_(std::move(inner)), n_(n) {}

  Move on_digit(Digit d) override {
    const std::uint64_t t = t_++;
    const Move m = inner_->on_digit(d);
    if (!m.is_nat())
      throw GameError(ErrKind::InvalidArgument, "digit-coded strategy must answer digits");
    if (n_ >= 2 * t + 2) return Move::pass();
    return Move::nat_move(enum_seq(2 * t + 2, m.nat)[n_]);
  }

 private:
  std::unique_ptr<IISession> inner_;
  std::uint64_t n_;
  std::uint64_t t_ = 0;
};

class GlipExtract final : public IIStrategy {
 public:
  GlipExtract(IIStrategyPtr tau, std::uint64_t n) : tau_(std::move(tau)), n_(n) {}
  std::unique_ptr<IISession> session() const override {
    return std::make_unique<GlipExtractSession>(tau_->session(), n_);
  }

 private:
  IIStrategyPtr tau_;
  std::uint64_t n_;
};

}  // namespace

IIStrategyPtr glip_interleave(const GlipStrategy& tau) {
  if (!tau.row) throw GameError(ErrKind::InvalidArgument, "schema has no rows");
  return std::make_shared<GlipInterleave>(tau);
}

IIStrategyPtr glip_extract(IIStrategyPtr tau, std::uint64_t n) {
  if (!tau) throw GameError(ErrKind::InvalidArgument, "null strategy");
  return std::make_shared<GlipExtract>(std::move(tau), n);
}

UPStream glip_eval(const ControlSchedule& controls, const GlipStrategy& tau, const UPStream& x,
                   std::uint64_t max_rows) {
  controls.validate();
  if (!tau.row) throw GameError(ErrKind::InvalidArgument, "schema has no rows");
  const std::uint64_t bound = std::max<std::uint64_t>(max_rows, 1);
  for (std::uint64_t i = 0; i < bound; ++i) {
    const UPStream u = eval_function(w_rules(), *tau.row(2 * i), x);
    if (membership_up(controls.control(i).automaton, u) == Membership::In)
      return eval_function(w_rules(), *tau.row(2 * i + 1), x);
  }
  throw GameError(ErrKind::NoActivationWithinBound,
                  "no control row activates within the searched bound");
}

GlipStrategy glip_compile(const std::vector<GlipPiece>& pieces, const ControlSchedule& controls) {
  controls.validate();
  auto placed = std::make_shared<std::map<std::uint64_t, IIStrategyPtr>>();
  GlipStrategy g;
  std::optional<std::uint64_t> prev;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const GlipPiece& pc = pieces[k];
    const std::string what = "piece " + std::to_string(k);
    pc.f.check_budget();
    ShapedWitness sw = witness_for_region(pc.region, what);
    const std::uint64_t lo = std::max(prev ? *prev + 1 : 0, pc.f.budget);
    const std::uint64_t slot = find_matching_slot(controls, sw.target, lo, what);
    (*placed)[2 * slot] = as_strategy(std::move(sw.witness));
    (*placed)[2 * slot + 1] = lipschitz_compile(pc.f);
    g.placement.push_back(slot);
    prev = slot;
  }
  const ControlSchedule cs = controls;
  g.row = [placed, cs](std::uint64_t r) -> IIStrategyPtr {
    const auto it = placed->find(r);
    if (it != placed->end()) return it->second;
    if (r % 2 == 1) return const_strategy(UPStream::constant(0));
    return const_strategy(default_control_value(cs, r / 2));
  };
  return g;
}

}  // namespace rgames

