#pragma once

#include <optional>
#include <string>

#include "rgames/strategy.hpp"

namespace rgames {

/// Outcome of a finite-depth run of a game.
struct RunResult {
  Transcript transcript;
  bool violated = false;       // II broke a rule at a finite stage
  std::string violation_reason;
  FinSeq tentative;            // interpreter output if play stopped here
  std::uint64_t committed = 0; // stable prefix length of `tentative`
  PrefixVerdict domain;        // domain automaton's view of I's digits
};

/// Play G for `depth` turns: I enumerates `x`, II follows `tau`.
RunResult run_to_depth(const GameSpec& G, const StreamView& x, const IIStrategy& tau,
                       std::uint64_t depth);

/// Play G for `depth` turns between two strategies.
RunResult run_to_depth_vs(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                          std::uint64_t depth);

/// Exact run of tau against an ultimately periodic input: detects a repeated
/// (session key, input phase) pair and returns the induced lasso.  Throws
/// Undetermined when the session does not expose keys, Overflow when no
/// repeat shows up within `step_cap` turns.
LassoRun exact_run(const IIStrategy& tau, const UPStream& x, std::uint64_t step_cap = 200000);

/// Exact joint run of two strategies; also recovers I's digit stream.
struct VsRun {
  LassoRun run;
  UPStream x;
};
VsRun exact_run_vs(const IStrategy& sigma, const IIStrategy& tau,
                   std::uint64_t step_cap = 200000);

/// Combine an input stream with a move stream into a single lasso.
LassoRun zip_lasso(const UPStream& x, const MoveLasso& moves);

enum class EvalMode { Exact, Depth };

/// The function induced by tau in G, evaluated at x.  Exact mode returns the
/// full ultimately periodic output; Depth mode truncates the run at `depth`
/// turns and returns the committed output prefix as a constant-padded stream
/// is not meaningful, so callers use eval_prefix instead.
UPStream eval_function(const GameSpec& G, const IIStrategy& tau, const UPStream& x);

/// Committed output after `depth` turns of tau against x.
FinSeq eval_prefix(const GameSpec& G, const StreamView& x, const IIStrategy& tau,
                   std::uint64_t depth);

enum class Player { I, II };

struct Adjudication {
  Player winner = Player::I;
  std::string reason;
};

/// Decide one full play of the reduction game with payoff (A, B): I
/// enumerates x, II follows tau.  Order of the rules: I must stay inside
/// G.domain, then II must respect the game rules, then the payoff
/// equivalence x in A iff output in B decides.
Adjudication adjudicate_up(const GameSpec& G, const UPStream& x, const IIStrategy& tau,
                           const DetOmegaAutomaton& A, const DetOmegaAutomaton& B);

/// Strategy-vs-strategy adjudication via the exact joint lasso.
Adjudication adjudicate_vs(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                           const DetOmegaAutomaton& A, const DetOmegaAutomaton& B);

/// Finite-horizon adjudication for plays that need not lasso.  Resolves as
/// soon as the domain, A and B prefix verdicts all decide; sound whenever II
/// is known to respect the rules (checked separately).  Throws Undetermined
/// when `fuel` turns do not decide.
Adjudication adjudicate_finite(const GameSpec& G, const IStrategy& sigma, const IIStrategy& tau,
                               const DetOmegaAutomaton& A, const DetOmegaAutomaton& B,
                               std::uint64_t fuel);

}  // namespace rgames
