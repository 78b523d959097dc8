#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "rgames/engine.hpp"

namespace rgames {

// Row-structured games built on the pair(n, m) turn coding: a control
// schedule assigns a test set to every even row, odd rows replay an inner
// game, and the output is the inner output of the row next to the least
// activated control row.  This header also carries the limit game, the
// coded-set games, the digit-coded Lipschitz variant, and the compilers
// and transfers between all of them.

// --- control schedules ---

struct ControlSchedule {
  enum class Tail { RepeatLast, Cycle };

  std::vector<ControlSet> sets;  // nonempty
  Tail tail = Tail::RepeatLast;

  const ControlSet& control(std::uint64_t n) const { return sets[class_of(n)]; }
  /// Index into `sets` backing control(n).
  std::uint64_t class_of(std::uint64_t n) const;
  /// class_of(n + cycle) == class_of(n) for every n >= tail of the shape.
  OrbitShape recurrence() const;
  void validate() const;
};

ControlSchedule repeat_schedule(ControlSet c);
ControlSchedule cycle_schedule(std::vector<ControlSet> sets);

// --- row-schema strategies ---

/// One row of a schema.  `strategy` always answers; the optional views give
/// the legality tooling something exact to work with: a finite-state form,
/// and the played stream when the row ignores its input.
struct RowComponent {
  IIStrategyPtr strategy;
  std::optional<MealyStrategy> mealy;
  std::optional<UPStream> constant;
};

RowComponent row_component(IIStrategyPtr s);
RowComponent row_component(MealyStrategy m);
RowComponent row_component(UPStream constant_value);

/// Strategy given row by row: finitely many explicit rows, everything else
/// resolved by `tail`.  The standard tail plays, on control row 2i, a fixed
/// stream outside control(i) (so the row never activates) and relays the
/// identity on odd rows; `tail_cycle` declares that tail components for
/// control indices i and i + tail_cycle behave identically, which is what
/// lets whole-schema checks close the row quantifier.
struct CompositeStrategy {
  std::map<std::uint64_t, RowComponent> rows;
  std::function<RowComponent(std::uint64_t)> tail;
  std::uint64_t row_bound = 0;   // explicit rows live below this
  std::uint64_t tail_cycle = 1;  // in control-index units

  RowComponent row(std::uint64_t n) const;
  IIStrategyPtr row_strategy(std::uint64_t n) const { return row(n).strategy; }
  /// The interleaved strategy: row n answers at the turns pair(n, m).
  IIStrategyPtr interleave() const;
};

std::function<RowComponent(std::uint64_t)> make_default_tail(const ControlSchedule& controls);
/// The fixed stream the default tail plays on control row 2i; lies outside
/// control(i).
UPStream default_control_value(const ControlSchedule& controls, std::uint64_t i);

// --- game constructors ---

/// Row-decoded game over `inner`: even rows are skip-game plays judged
/// against the schedule, odd rows replay `inner` on the full input, every
/// row obeys its rules, and some control row must activate.  Output: inner
/// output of the row after the least activated control row.
GameSpec make_gfxi(const GameSpec& inner, const ControlSchedule& controls);

/// As make_gfxi, but inner rules bind only on rows whose control row is
/// activated.
GameSpec make_tilde(const GameSpec& inner, const ControlSchedule& controls);

/// Limit game: row n replays inner n (inners.size() and beyond use `tail`),
/// all rows obey their rules, and the output is the limit of the row
/// outputs when it exists.
GameSpec make_glim(std::vector<GameSpec> inners, GameSpec tail_inner);

// --- self-delimiting automaton codes ---

/// Digit encoding of a parity automaton: first digit is the payload length,
/// then the payload, and every later digit is ignored.  Malformed prefixes
/// decode to the empty set, so every stream decodes.
struct CodeDecoder {
  std::uint64_t max_code_len = 4096;

  DetOmegaAutomaton decode(const FinSeq& digits) const;
  DetOmegaAutomaton decode_up(const UPStream& code) const;

  /// Payload digits (without the leading length digit).
  static FinSeq encode(const DetOmegaAutomaton& A);
  /// [payload length, payload, 0, 0, ...] as a stream.
  static UPStream code_stream(const DetOmegaAutomaton& A);
};

/// Coded-set game: the row at index pair(n, m) spells a code for a set
/// S(n, m), and output digit n is the least m <= max_m with x in S(n, m).
GameSpec make_ggamma(const CodeDecoder& dec);

/// Piecewise coded variant: even rows spell region codes, odd rows replay
/// `inner`; row i activates when x lies in the decoded region.
GameSpec make_gfgamma(const GameSpec& inner, const CodeDecoder& dec);

// --- finite-sequence coding ---

/// Bijection between naturals and length-k digit tuples by iterated
/// unpairing: enum_seq(1, m) = [m]; enum_seq(k+1, m) = [a] + enum_seq(k, b)
/// with (a, b) = unpair(m).
FinSeq enum_seq(std::uint64_t k, std::uint64_t m);
std::uint64_t enum_index(const FinSeq& s);

/// Digit-coded Lipschitz game: II plays bare digits, and her digit at turn
/// n unpacks via enum_seq(2n+2, .) into one fresh digit for each of rows
/// 0..2n+1.  Even rows are control rows against the schedule; the output is
/// the digit stream of the row after the least activated control row.
GameSpec make_glipxi(const ControlSchedule& controls);

// --- exact activation calculus on row schemas ---

struct ActivationProfile {
  std::vector<Membership> verdicts;       // control indices below `bound`
  std::optional<std::uint64_t> least;     // least activated control index
  std::uint64_t bound = 0;
};

/// Least activated control row of tau on x, searching control indices up to
/// max_rows.  Exact: each row's skip-filtered stream is evaluated exactly.
ActivationProfile composite_activation(const GameSpec& inner, const ControlSchedule& controls,
                                       const CompositeStrategy& tau, const UPStream& x,
                                       std::uint64_t max_rows = 64);

/// The function induced by the schema: inner output of the row next to the
/// least activated control row.  Throws NoActivationWithinBound when no
/// control row at index <= max_rows activates.
UPStream composite_eval(const GameSpec& inner, const ControlSchedule& controls,
                        const CompositeStrategy& tau, const UPStream& x,
                        std::uint64_t max_rows = 64);

/// Full-play adjudication with payoff (A, B): domain first, then II's row
/// obligations (strict or activated-only), then the payoff equivalence.
Adjudication composite_adjudicate(const GameSpec& inner, const ControlSchedule& controls,
                                  const CompositeStrategy& tau, const UPStream& x,
                                  const DetOmegaAutomaton& A, const DetOmegaAutomaton& B,
                                  bool strict = true, std::uint64_t max_rows = 64);

/// Row-wise legality of a schema.  Exact where the components carry exact
/// views (finite-state or constant rows, plus the declared tail recurrence);
/// rows without them fall back to sampled checking, capping the verdict at
/// UnknownAtDepth.  `strict` demands inner rules on every odd row; the
/// relaxed mode excuses rows whose control row provably never activates.
LegalityReport composite_legality(const GameSpec& inner, const ControlSchedule& controls,
                                  const CompositeStrategy& tau, bool strict,
                                  std::uint64_t samples = 40, std::uint64_t depth = 96,
                                  std::uint64_t seed = 1);

// --- limit evaluation ---

/// Row family for the limit game; `constant_from` declares that all rows at
/// and beyond that index share one behaviour.
struct LimitFamily {
  std::function<IIStrategyPtr(std::uint64_t)> row;
  std::optional<std::uint64_t> constant_from;
};

/// Exact limit: requires a declared constant tail, and returns that row's
/// output.  Throws LimitUndetermined otherwise.
UPStream glim_eval_exact(const GameSpec& inner, const LimitFamily& fam, const UPStream& x);

/// Bounded probe: evaluates rows 0..rows_to_check-1 exactly and reports the
/// value the outputs have stabilized to, if the checked window stabilizes.
/// Not a limit proof on its own.
struct GlimProbe {
  std::vector<UPStream> row_outputs;
  std::optional<UPStream> stable_value;
  std::uint64_t stable_from = 0;
};
GlimProbe glim_probe(const GameSpec& inner, const LimitFamily& fam, const UPStream& x,
                     std::uint64_t rows_to_check);

// --- coded-set compilation ---

/// Code family for the coded-set game: `code` yields the payload of the
/// automaton for S(n, m).  The family must be uniform in n: whether x lies
/// in S(n, m) may depend only on the tail of x from position n on.  The
/// exact evaluator checks one recurrence block of the output against this
/// and rejects families that break it.
struct GammaFamily {
  std::function<FinSeq(std::uint64_t n, std::uint64_t m)> code;
  std::uint64_t max_m = 64;
};

/// Strategy spelling code(n, m) on the row at index pair(n, m).  Validates
/// on the given samples that every output digit has a witness m <= max_m;
/// throws IncoherentSpec with the offending sample otherwise.
IIStrategyPtr gamma_compile(const GammaFamily& fam, const CodeDecoder& dec,
                            const std::vector<UPStream>& samples);

/// Exact output of the coded family on x.  Throws NoWitnessWithinBound when
/// some digit has no witness, IncoherentSpec when the family is not
/// n-uniform across the checked block.
UPStream gamma_eval(const GammaFamily& fam, const CodeDecoder& dec, const UPStream& x);

/// Preimage decider: output digit n equals m, i.e. x in S(n, m) and in no
/// S(n, k) for k < m.
bool gamma_decider(const GammaFamily& fam, const CodeDecoder& dec, std::uint64_t n,
                   std::uint64_t m, const UPStream& x);

// --- piecewise compilation ---

/// One piece: a region (as an automaton, for shape-derived witnesses and
/// oracles), or an explicit reduction witness into the target control, plus
/// the strategy to play on that piece.
struct PiecewisePiece {
  std::optional<DetOmegaAutomaton> region;
  std::optional<MealyStrategy> witness;
  IIStrategyPtr piece;
};

struct PiecewiseSpec {
  std::vector<PiecewisePiece> pieces;
  ControlSchedule controls;
};

/// Piece k lands at a control slot matching its witness target, at a
/// strictly increasing sequence of indices; all other rows get the default
/// tail.  Witnesses are auto-built for safety- and Buechi-shaped regions;
/// other shapes without an explicit witness throw UnsupportedRegionShape.
CompositeStrategy piecewise_compile(const PiecewiseSpec& spec, const GameSpec& inner);

struct PiecewiseDecomposition {
  /// Region decider: least activated control row of tau on x equals n.
  std::function<bool(std::uint64_t, const UPStream&)> region;
  /// Piece strategies: the odd-row components.
  std::function<IIStrategyPtr(std::uint64_t)> piece;
  std::uint64_t piece_count = 0;
};

PiecewiseDecomposition piecewise_decompile(const CompositeStrategy& tau, const GameSpec& inner,
                                           const ControlSchedule& controls,
                                           std::uint64_t max_rows = 64);

// --- control schedule swaps ---

/// Relocates the schema's control rows onto a new schedule: new control row
/// 2*index_map[k] plays reductions[k] composed onto old control row 2k, the
/// odd neighbours move along, and every other row gets the new schedule's
/// default tail.  index_map must be strictly increasing.  Each reduction is
/// checked on the sample inputs (old row stream in old control iff reduced
/// stream in new control); failures throw WitnessFailure with the sample.
CompositeStrategy control_swap(const CompositeStrategy& tau, const ControlSchedule& from,
                               const ControlSchedule& to,
                               const std::vector<std::uint64_t>& index_map,
                               const std::vector<MealyStrategy>& reductions,
                               const std::vector<UPStream>& sample_inputs);

// --- player I transfers ---

/// From a winning I-strategy in the row-decoded game to one in the plain
/// digit game: I echoes rho's digits while II's side of the row game is
/// simulated with the anchor stream z on control rows and the observed
/// digit replies relayed on odd rows.  Throws BadAnchor unless z lies in
/// control(0), which keeps the simulated play activated at row 0.
IStrategyPtr playerI_transfer(IStrategyPtr rho, const UPStream& z,
                              const ControlSchedule& controls);

/// Same construction for the relaxed-rules variant (the simulated II play
/// is fully rule-abiding, so the wrapped game only loosens obligations).
IStrategyPtr playerI_transfer_tilde(IStrategyPtr rho, const UPStream& z,
                                    const ControlSchedule& controls);

/// Coded variant: control rows spell the code of the full space at row 0
/// and of the empty set elsewhere, odd rows relay the observed digits.
IStrategyPtr playerI_transfer_gamma(IStrategyPtr rho, const CodeDecoder& dec);

// --- digit-coded Lipschitz strategies ---

/// Row schema for the digit-coded game: rows are skip-tolerant digit
/// strategies; `placement` records where a compiler put its pieces.
struct GlipStrategy {
  std::function<IIStrategyPtr(std::uint64_t)> row;
  std::vector<std::uint64_t> placement;
};

/// Interleave a row schema into a bare-digit strategy: the digit at turn n
/// packs, via enum_index, one fresh digit from each of rows 0..2n+1.  Rows
/// see the full input; row r must have emitted j+1 digits by global turn
/// floor(r/2) + j or the session throws.
IIStrategyPtr glip_interleave(const GlipStrategy& tau);

/// Extract row n from a bare-digit strategy: unpack each answer and emit
/// row n's fresh digit once the row exists, skipping before that.
IIStrategyPtr glip_extract(IIStrategyPtr tau, std::uint64_t n);

/// Exact row-wise evaluation of a schema in the digit-coded game.
UPStream glip_eval(const ControlSchedule& controls, const GlipStrategy& tau, const UPStream& x,
                   std::uint64_t max_rows = 64);

/// Piecewise-Lipschitz compilation: piece k holds a region and a bounded-
/// delay transducer; the compiler picks strictly increasing row slots no
/// smaller than each transducer's delay budget, places the region reduction
/// and the compiled transducer there, and fills the rest with defaults.
struct GlipPiece {
  DetOmegaAutomaton region;
  DelayTransducer f;
};

GlipStrategy glip_compile(const std::vector<GlipPiece>& pieces, const ControlSchedule& controls);

}  // namespace rgames
