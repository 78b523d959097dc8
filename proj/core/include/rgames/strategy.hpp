#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rgames/game.hpp"
#include "rgames/machines.hpp"

namespace rgames {

/// Identifier for a session's internal state.  When `supported` is set, equal
/// keys at equal input phases guarantee identical future behaviour; this is
/// what makes exact ultimately-periodic evaluation possible.
struct SessionKey {
  bool supported = false;
  std::uint64_t a = 0;
  std::string s;

  friend bool operator==(const SessionKey& x, const SessionKey& y) {
    return std::tie(x.supported, x.a, x.s) == std::tie(y.supported, y.a, y.s);
  }
  friend bool operator<(const SessionKey& x, const SessionKey& y) {
    return std::tie(x.supported, x.a, x.s) < std::tie(y.supported, y.a, y.s);
  }
};

/// Ultimately periodic description of II's move stream along a fixed play.
struct MoveLasso {
  MoveSeq prefix;
  MoveSeq period;  // nonempty

  const Move& at(std::uint64_t t) const {
    if (t < prefix.size()) return prefix[t];
    return period[(t - prefix.size()) % period.size()];
  }
};

/// One play of a strategy for II: digits in, moves out, one exchange per turn.
class IISession {
 public:
  virtual ~IISession() = default;
  virtual Move on_digit(Digit d) = 0;
  /// State identifier before the next on_digit call.
  virtual SessionKey key() const { return {}; }
};

class IIStrategy {
 public:
  virtual ~IIStrategy() = default;
  virtual std::unique_ptr<IISession> session() const = 0;

  /// Move stream against input x, when the strategy can derive it directly.
  /// Default: none; the engine falls back to session-key lasso detection.
  virtual std::optional<MoveLasso> direct_move_lasso(const UPStream& /*x*/) const {
    return std::nullopt;
  }

  /// Replay helper: response to I's prefix s (s nonempty).
  Move respond(const FinSeq& s) const;
};

using IIStrategyPtr = std::shared_ptr<const IIStrategy>;

/// One play of a strategy for I: I opens each turn with a digit, then sees
/// II's reply.
class ISession {
 public:
  virtual ~ISession() = default;
  virtual Digit next() = 0;
  virtual void on_reply(const Move& m) = 0;
  virtual SessionKey key() const { return {}; }
};

class IStrategy {
 public:
  virtual ~IStrategy() = default;
  virtual std::unique_ptr<ISession> session() const = 0;

  /// Replay helper: I's digit after seeing II's replies t.
  Digit respond(const MoveSeq& t) const;
};

using IStrategyPtr = std::shared_ptr<const IStrategy>;

// Adapters and basic strategies.
IIStrategyPtr as_strategy(MealyStrategy m);
IStrategyPtr as_strategy_i(MealyStrategyI m);
IIStrategyPtr const_strategy(UPStream y);
IIStrategyPtr id_strategy();
IStrategyPtr const_strategy_i(UPStream x);
/// Finite map from I-prefixes to moves; `fallback` answers unmapped prefixes.
IIStrategyPtr table_strategy(std::map<FinSeq, Move> table, Move fallback);

// Combinators.

/// Row interleaving: at turn pair(n, m) the result answers with row strategy
/// n applied to the first m+1 input digits.  Rows beyond `rows.size()` use
/// `tail`; `tail` may be null only if no such row is ever consulted (it is,
/// on every input, so a null tail throws on first use).
IIStrategyPtr tensor_strategies(std::vector<IIStrategyPtr> rows, IIStrategyPtr tail);

/// Row extraction into the PASS-closed companion game: tau runs on the full
/// input, and its answers surface exactly at the turns pair(n, m); every
/// other turn is PASS.
IIStrategyPtr project_strategy(IIStrategyPtr tau, std::uint64_t n);

/// Relay composition: outer moves of tau0 are interpreted in `mid` (a
/// PASS-style digit game) and the committed digits are fed to tau1.  The
/// composite answers with tau1's moves, PASS while tau1 is starved.
IIStrategyPtr compose_strategies(IIStrategyPtr tau1, IIStrategyPtr tau0, const GameSpec& mid);

// Letter-to-letter transducers with a bounded output delay.

struct DelayEmit {
  bool echo = false;  // emit the input digit just read
  Digit d = 0;        // fixed digit otherwise
};

struct DelayEdge {
  std::uint32_t next = 0;
  std::vector<DelayEmit> emits;
};

struct DelayNode {
  std::map<Digit, DelayEdge> edges;
  DelayEdge otherwise;
};

/// Deterministic transducer reading one digit per step and emitting zero or
/// more digits.  `budget` bounds the output deficit: after n input digits at
/// least n - budget output digits have been emitted.
struct DelayTransducer {
  std::vector<DelayNode> nodes;
  std::uint32_t initial = 0;
  std::uint64_t budget = 0;

  void validate() const;
  /// Static budget check: every reachable cycle emits exactly its length and
  /// no reachable path's deficit exceeds `budget`.  Throws BudgetViolation.
  void check_budget() const;
  FinSeq run_on(const FinSeq& input) const;
};

DelayTransducer identity_transducer();
DelayTransducer shift_transducer(std::uint64_t k);

/// Compile a budget-k transducer into a strategy that passes for the first
/// `budget` turns and then emits one digit per turn.
IIStrategyPtr lipschitz_compile(const DelayTransducer& f);

// Transfers between the plain digit game and its k-delayed variant.

/// From an I-strategy for the digit game against outputs prefixed with 0^k to
/// an I-strategy for the k-delayed digit game.
IStrategyPtr klip_transfer_I(IStrategyPtr sigma, std::uint64_t k);

/// From a II-strategy for the digit game with outputs prefixed with 0^k to a
/// II-strategy for the k-delayed digit game.  `fallback` is enumerated when
/// the auxiliary strategy fails to open with 0^k; it must lie outside the
/// target payoff set.
IIStrategyPtr klip_transfer_II(IIStrategyPtr tau, std::uint64_t k, UPStream fallback);

/// Replace every PASS of a strategy legal in the PASS-closed eraser game by
/// the block [Nat(0), Erase], yielding a strategy for the plain eraser game
/// with the same induced function.
IIStrategyPtr p_eliminate_eraser(IIStrategyPtr tau);

// Legality checking.

struct LegalityReport {
  enum class Verdict { Legal, Illegal, UnknownAtDepth };
  Verdict verdict = Verdict::UnknownAtDepth;
  std::optional<Transcript> finite_witness;  // rule broken at a finite stage
  std::optional<LassoRun> lasso_witness;     // liveness broken on a lasso
  std::uint64_t depth = 0;
  std::string detail;

  bool legal() const { return verdict == Verdict::Legal; }
};

/// Exact legality of a finite-state strategy in a game with an exactly
/// checkable shape: explores the product of the machine, the domain
/// automaton and the turn phase over representative digits.  Throws
/// UnsupportedGame when the game carries no shape.
LegalityReport legality_check_exact(const GameSpec& G, const MealyStrategy& tau);

/// Monte-Carlo legality: random ultimately periodic inputs, monitors to
/// `depth` turns plus lasso verdicts where sessions expose keys.
LegalityReport legality_check_sampled(const GameSpec& G, const IIStrategy& tau,
                                      std::uint64_t samples, std::uint64_t depth,
                                      std::uint64_t seed);

}  // namespace rgames
