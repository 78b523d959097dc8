#include "rgames/engine.hpp"

#include <map>
#include <numeric>
#include <sstream>

namespace rgames {
namespace {

std::string key_str(const SessionKey& k) {
  std::ostringstream os;
  os << (k.supported ? 1 : 0) << ',' << k.a << ',' << k.s.size() << ':' << k.s;
  return os.str();
}

/// Canonical position of index t in the lasso structure of x.
std::uint64_t phase_of(const UPStream& x, std::uint64_t t) {
  const std::uint64_t P = x.prefix().size();
  const std::uint64_t L = x.period().size();
  return t < P ? t : P + (t - P) % L;
}

MoveSeq moves_of(const Transcript& tr) {
  MoveSeq out;
  out.reserve(tr.size());
  for (const auto& e : tr) out.push_back(e.ii);
  return out;
}

FinSeq digits_of(const Transcript& tr) {
  FinSeq out;
  out.reserve(tr.size());
  for (const auto& e : tr) out.push_back(e.i);
  return out;
}

/// Per-state resolution of an automaton: Rejected when nothing is accepted
/// from the state, Accepted when everything is.
std::vector<PrefixVerdict> state_verdicts(const DetOmegaAutomaton& A) {
  const DetOmegaAutomaton C = complement(A);
  std::vector<PrefixVerdict> out(A.size(), PrefixVerdict::Unknown);
  for (State q = 0; q < A.size(); ++q) {
    if (!nonempty_from(A, q))
      out[q] = PrefixVerdict::Rejected;
    else if (!nonempty_from(C, q))
      out[q] = PrefixVerdict::Accepted;
  }
  return out;
}

/// Incremental prefix verdict along a growing digit sequence.
class VerdictTracker {
 public:
  explicit VerdictTracker(const DetOmegaAutomaton& A)
      : A_(&A), sv_(state_verdicts(A)), cur_(A.initial), v_(sv_[A.initial]) {}

  void feed(Digit d) {
    if (v_ != PrefixVerdict::Unknown) return;  // absorbing
    cur_ = A_->step(cur_, d);
    v_ = sv_[cur_];
  }
  PrefixVerdict verdict() const { return v_; }

 private:
  const DetOmegaAutomaton* A_;
  std::vector<PrefixVerdict> sv_;
  State cur_;
  PrefixVerdict v_;
};

}  // namespace

RunResult run_to_depth(const GameSpec& G, const StreamView& x, const IIStrategy& tau,
                       std::uint64_t depth) {
  if (!x.valid()) throw GameError(ErrKind::InvalidArgument, "run_to_depth: empty input stream");
  auto mon = G.monitor_factory();
  auto interp = G.interpreter_factory();
  auto ses = tau.session();
  RunResult r;
  r.transcript.reserve(depth);
  for (std::uint64_t t = 0; t < depth; ++t) {
    const Digit d = x.at(t);
    const Move m = ses->on_digit(d);
    mon->step(d, m);
    interp->step(d, m);
    r.transcript.push_back({d, m});
  }
  r.violated = mon->violated();
  r.violation_reason = mon->violation_reason();
  r.tentative = interp->tentative();
  r.committed = interp->committed_len();
  r.domain = prefix_verdict(G.domain, digits_of(r.transcript));
  return r;
}

RunResult run_to_depth_vs(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                          std::uint64_t depth) {
  auto mon = G.monitor_factory();
  auto interp = G.interpreter_factory();
  auto si = sigma.session();
  auto sii = tau.session();
  RunResult r;
  r.transcript.reserve(depth);
  for (std::uint64_t t = 0; t < depth; ++t) {
    const Digit d = si->next();
    const Move m = sii->on_digit(d);
    si->on_reply(m);
    mon->step(d, m);
    interp->step(d, m);
    r.transcript.push_back({d, m});
  }
  r.violated = mon->violated();
  r.violation_reason = mon->violation_reason();
  r.tentative = interp->tentative();
  r.committed = interp->committed_len();
  r.domain = prefix_verdict(G.domain, digits_of(r.transcript));
  return r;
}

LassoRun zip_lasso(const UPStream& x, const MoveLasso& moves) {
  if (moves.period.empty())
    throw GameError(ErrKind::InvalidArgument, "zip_lasso: empty move period");
  const std::uint64_t P =
      std::max<std::uint64_t>(x.prefix().size(), moves.prefix.size());
  const std::uint64_t L =
      std::lcm<std::uint64_t>(x.period().size(), moves.period.size());
  if (L > 1000000) throw GameError(ErrKind::Overflow, "zip_lasso: period too long");
  LassoRun r;
  for (std::uint64_t t = 0; t < P; ++t) r.prefix.push_back({x.at(t), moves.at(t)});
  for (std::uint64_t t = P; t < P + L; ++t) r.period.push_back({x.at(t), moves.at(t)});
  return r;
}

LassoRun exact_run(const IIStrategy& tau, const UPStream& x, std::uint64_t step_cap) {
  if (auto ml = tau.direct_move_lasso(x)) return zip_lasso(x, *ml);
  auto ses = tau.session();
  Transcript tr;
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> seen;
  for (std::uint64_t t = 0; t < step_cap; ++t) {
    const SessionKey k = ses->key();
    if (!k.supported)
      throw GameError(ErrKind::Undetermined,
                      "exact_run: strategy session does not expose state keys");
    auto [it, fresh] = seen.try_emplace({key_str(k), phase_of(x, t)}, t);
    if (!fresh) {
      const std::uint64_t t0 = it->second;
      LassoRun r;
      r.prefix.assign(tr.begin(), tr.begin() + static_cast<std::ptrdiff_t>(t0));
      r.period.assign(tr.begin() + static_cast<std::ptrdiff_t>(t0), tr.end());
      return r;
    }
    const Digit d = x.at(t);
    tr.push_back({d, ses->on_digit(d)});
  }
  throw GameError(ErrKind::Overflow, "exact_run: no lasso within the step cap");
}

VsRun exact_run_vs(const IStrategy& sigma, const IIStrategy& tau, std::uint64_t step_cap) {
  auto si = sigma.session();
  auto sii = tau.session();
  Transcript tr;
  std::map<std::pair<std::string, std::string>, std::uint64_t> seen;
  for (std::uint64_t t = 0; t < step_cap; ++t) {
    const SessionKey ki = si->key();
    const SessionKey kii = sii->key();
    if (!ki.supported || !kii.supported)
      throw GameError(ErrKind::Undetermined,
                      "exact_run_vs: a session does not expose state keys");
    auto [it, fresh] = seen.try_emplace({key_str(ki), key_str(kii)}, t);
    if (!fresh) {
      const std::uint64_t t0 = it->second;
      VsRun v;
      v.run.prefix.assign(tr.begin(), tr.begin() + static_cast<std::ptrdiff_t>(t0));
      v.run.period.assign(tr.begin() + static_cast<std::ptrdiff_t>(t0), tr.end());
      v.x = UPStream(digits_of(v.run.prefix), digits_of(v.run.period));
      return v;
    }
    const Digit d = si->next();
    const Move m = sii->on_digit(d);
    si->on_reply(m);
    tr.push_back({d, m});
  }
  throw GameError(ErrKind::Overflow, "exact_run_vs: no lasso within the step cap");
}

UPStream eval_function(const GameSpec& G, const IIStrategy& tau, const UPStream& x) {
  if (membership_up(G.domain, x) == Membership::Out)
    throw GameError(ErrKind::DomainViolation, "eval: input outside the game's domain");
  const LassoRun run = exact_run(tau, x);
  LassoContext ctx;
  ctx.input = &x;
  if (G.up_verdict(run, ctx) == RuleVerdict::OutRules)
    throw GameError(ErrKind::RuleViolation, "eval: strategy breaks the rules on this input");
  return G.up_output(run, ctx);
}

FinSeq eval_prefix(const GameSpec& G, const StreamView& x, const IIStrategy& tau,
                   std::uint64_t depth) {
  const RunResult r = run_to_depth(G, x, tau, depth);
  if (r.violated)
    throw GameError(ErrKind::RuleViolation, "eval_prefix: " + r.violation_reason);
  FinSeq out(r.tentative.begin(),
             r.tentative.begin() + static_cast<std::ptrdiff_t>(
                                       std::min<std::uint64_t>(r.committed, r.tentative.size())));
  return out;
}

namespace {

Adjudication adjudicate_lasso(const GameSpec& G, const UPStream& x, const LassoRun& run,
                              const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  if (membership_up(G.domain, x) == Membership::Out)
    return {Player::II, "I enumerated a stream outside the domain"};
  LassoContext ctx;
  ctx.input = &x;
  if (G.up_verdict(run, ctx) == RuleVerdict::OutRules)
    return {Player::I, "II broke the rules of the game"};
  const UPStream out = G.up_output(run, ctx);
  const bool in_a = membership_up(A, x) == Membership::In;
  const bool in_b = membership_up(B, out) == Membership::In;
  if (in_a == in_b) return {Player::II, "payoff equivalence holds"};
  return {Player::I, in_a ? "input in A but output outside B" : "output in B but input outside A"};
}

}  // namespace

Adjudication adjudicate_up(const GameSpec& G, const UPStream& x, const IIStrategy& tau,
                           const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  if (membership_up(G.domain, x) == Membership::Out)
    return {Player::II, "I enumerated a stream outside the domain"};
  const LassoRun run = exact_run(tau, x);
  return adjudicate_lasso(G, x, run, A, B);
}

Adjudication adjudicate_vs(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                           const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  const VsRun v = exact_run_vs(sigma, tau);
  return adjudicate_lasso(G, v.x, v.run, A, B);
}

Adjudication adjudicate_finite(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                               const DetOmegaAutomaton& A, const DetOmegaAutomaton& B,
                               std::uint64_t fuel) {
  auto mon = G.monitor_factory();
  auto interp = G.interpreter_factory();
  auto si = sigma.session();
  auto sii = tau.session();
  VerdictTracker dom(G.domain), va(A), vb(B);
  std::uint64_t fed_b = 0;
  for (std::uint64_t t = 0; t < fuel; ++t) {
    const Digit d = si->next();
    const Move m = sii->on_digit(d);
    si->on_reply(m);
    mon->step(d, m);
    interp->step(d, m);
    dom.feed(d);
    va.feed(d);
    const FinSeq tent = interp->tentative();
    const std::uint64_t committed =
        std::min<std::uint64_t>(interp->committed_len(), tent.size());
    for (; fed_b < committed; ++fed_b) vb.feed(tent[fed_b]);
    if (dom.verdict() == PrefixVerdict::Rejected)
      return {Player::II, "I enumerated a stream outside the domain"};
    if (dom.verdict() == PrefixVerdict::Accepted) {
      if (mon->violated()) return {Player::I, "II broke the rules: " + mon->violation_reason()};
      if (va.verdict() != PrefixVerdict::Unknown && vb.verdict() != PrefixVerdict::Unknown) {
        const bool in_a = va.verdict() == PrefixVerdict::Accepted;
        const bool in_b = vb.verdict() == PrefixVerdict::Accepted;
        if (in_a == in_b) return {Player::II, "payoff equivalence holds"};
        return {Player::I,
                in_a ? "input in A but output outside B" : "output in B but input outside A"};
      }
    }
  }
  throw GameError(ErrKind::Undetermined, "adjudicate_finite: verdicts undecided within fuel");
}

}  // namespace rgames
