#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rgames/moves.hpp"
#include "rgames/omega.hpp"
#include "rgames/streams.hpp"

namespace rgames {

enum class GameKind { L, W, KLip, E, Bt, M };
enum class RuleVerdict { InRules, OutRules };
enum class StepStatus { Ok, Violated };

/// Which move variants a game accepts at all. Monitors refine this with
/// positional and liveness rules.
struct AlphabetSpec {
  bool nat = false;
  bool pass = false;
  bool erase = false;
  bool bt = false;
  bool rows = false;

  bool admits(const Move& m) const {
    switch (m.kind) {
      case Move::Kind::Nat:
        return nat;
      case Move::Kind::Symbol:
        return (m.sym == Sym::Pass && pass) || (m.sym == Sym::Erase && erase) ||
               (m.sym == Sym::Bt && bt);
      case Move::Kind::Row:
        return rows;
    }
    return false;
  }
};

struct TranscriptEntry {
  Digit i = 0;
  Move ii;
};
using Transcript = std::vector<TranscriptEntry>;

/// Finite description of an infinite run: prefix then period forever.
struct LassoRun {
  Transcript prefix;
  Transcript period;  // nonempty

  TranscriptEntry at(std::uint64_t t) const {
    if (t < prefix.size()) return prefix[t];
    return period[(t - prefix.size()) % period.size()];
  }
};

/// Bounds and input context for exact lasso analysis. Base games ignore it;
/// composite games use the input stream and the search bounds.
struct LassoContext {
  const UPStream* input = nullptr;
  std::uint64_t max_rows = 64;
  std::uint64_t max_m = 256;
};

/// Stateful safety judge for one run. Violation is absorbing; liveness
/// conditions surface as pending obligation tags and are decided exactly on
/// lassos by the game's up_verdict.
class RuleMonitor {
 public:
  virtual ~RuleMonitor() = default;

  StepStatus step(Digit i, const Move& ii) {
    if (violated_) return StepStatus::Violated;
    if (auto r = do_step(i, ii)) {
      violated_ = true;
      reason_ = std::move(*r);
      return StepStatus::Violated;
    }
    return StepStatus::Ok;
  }
  bool violated() const { return violated_; }
  const std::string& violation_reason() const { return reason_; }
  virtual std::vector<std::string> pending_obligations() const { return {}; }

 protected:
  virtual std::optional<std::string> do_step(Digit i, const Move& ii) = 0;

 private:
  bool violated_ = false;
  std::string reason_;
};

/// Incremental output builder for one run. committed_len is monotone and the
/// committed prefix of tentative() never changes afterwards.
class Interpreter {
 public:
  virtual ~Interpreter() = default;
  virtual void step(Digit i, const Move& ii) = 0;
  virtual FinSeq tentative() const = 0;
  virtual std::uint64_t committed_len() const = 0;
};

/// Shape fingerprint used by the exact legality checker; absent shapes fall
/// back to sampled checking.
struct LegalityShape {
  GameKind kind = GameKind::L;
  std::uint64_t k = 0;        // KLip budget
  std::uint64_t delay_n = 0;  // leading forced passes
  bool p_closed_wrapper = false;
};

struct GameSpec {
  GameKind kind = GameKind::L;
  std::uint64_t klip_k = 0;
  DetOmegaAutomaton domain;  // X: rule (1) checks membership of I's real
  AlphabetSpec alphabet;
  bool p_closed = false;
  bool delayable = true;
  std::optional<LegalityShape> shape;

  std::function<std::unique_ptr<RuleMonitor>()> monitor_factory;
  std::function<std::unique_ptr<Interpreter>()> interpreter_factory;
  std::function<RuleVerdict(const LassoRun&, const LassoContext&)> up_verdict;
  std::function<UPStream(const LassoRun&, const LassoContext&)> up_output;
};

GameSpec make_base_game(GameKind kind, std::uint64_t k = 0,
                        DetOmegaAutomaton domain = full_space());

/// Adds a global skip move: the wrapped game runs on the pass-filtered play,
/// plus the obligation that skips are not eventually constant.
GameSpec p_close(const GameSpec& G);

/// Forces passes at exactly the first n turns; the wrapped game runs on the
/// shifted tail, which must be pass-free.
GameSpec delay(const GameSpec& G, std::uint64_t n);

/// Stack evaluation of a digit-or-erase word; erasing on empty is a no-op.
FinSeq eraser_eval(const MoveSeq& s);

}  // namespace rgames
