#pragma once

#include "rgames/omega.hpp"
#include "rgames/rng.hpp"
#include "rgames/strategy.hpp"
#include "rgames/streams.hpp"

namespace rgames::testutil {

/// Random total parity automaton with small explicit alphabet.
inline DetOmegaAutomaton random_automaton(Rng& rng, std::uint32_t max_states = 6,
                                          Digit max_digit = 3, std::uint64_t max_prio = 4) {
  const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(max_states));
  DetOmegaAutomaton A;
  A.trans.resize(n);
  A.priority.resize(n);
  A.initial = static_cast<State>(rng.below(n));
  for (State q = 0; q < n; ++q) {
    A.priority[q] = rng.below(max_prio + 1);
    for (Digit d = 0; d <= max_digit; ++d)
      if (rng.below(2) == 0) A.trans[q].edges.emplace(d, static_cast<State>(rng.below(n)));
    A.trans[q].otherwise = static_cast<State>(rng.below(n));
  }
  return A;
}

/// Random safety-shaped automaton: a chosen dead set is absorbing with odd
/// priority, everything else has priority 0.
inline DetOmegaAutomaton random_safety_automaton(Rng& rng, std::uint32_t max_states = 6,
                                                Digit max_digit = 3) {
  DetOmegaAutomaton A = random_automaton(rng, max_states, max_digit, 0);
  for (State q = 0; q < A.size(); ++q) {
    if (rng.below(4) == 0) {
      A.trans[q].edges.clear();
      A.trans[q].otherwise = q;
      A.priority[q] = 1;
    } else {
      A.priority[q] = 0;
    }
  }
  return A;
}

inline DetOmegaAutomaton random_buchi_automaton(Rng& rng, std::uint32_t max_states = 6,
                                                Digit max_digit = 3) {
  return random_automaton(rng, max_states, max_digit, 1);
}

inline UPStream random_up(Rng& rng, Digit max_digit = 4, std::uint64_t max_prefix = 4,
                          std::uint64_t max_period = 4) {
  FinSeq prefix(rng.below(max_prefix + 1));
  FinSeq period(1 + rng.below(max_period));
  for (Digit& d : prefix) d = rng.below(max_digit + 1);
  for (Digit& d : period) d = rng.below(max_digit + 1);
  return UPStream(std::move(prefix), std::move(period));
}

inline UPStream concat(const FinSeq& s, const UPStream& x) {
  FinSeq prefix = s;
  prefix.insert(prefix.end(), x.prefix().begin(), x.prefix().end());
  return UPStream(prefix, x.period());
}

/// II-strategy that ignores the input and plays a scripted move lasso.
class ScriptStrategy final : public IIStrategy {
 public:
  explicit ScriptStrategy(MoveLasso ml) : ml_(std::move(ml)) {}

  std::unique_ptr<IISession> session() const override {
    return std::make_unique<Session>(&ml_);
  }

 private:
  class Session final : public IISession {
   public:
    explicit Session(const MoveLasso* ml) : ml_(ml) {}
    Move on_digit(Digit) override { return ml_->at(t_++); }
    SessionKey key() const override {
      const std::uint64_t P = ml_->prefix.size();
      const std::uint64_t L = ml_->period.size();
      return {true, t_ < P ? t_ : P + (t_ - P) % L, "script"};
    }

   private:
    const MoveLasso* ml_;
    std::uint64_t t_ = 0;
  };

  MoveLasso ml_;
};

inline IIStrategyPtr script_strategy(MoveSeq prefix, MoveSeq period) {
  return std::make_shared<ScriptStrategy>(MoveLasso{std::move(prefix), std::move(period)});
}

}  // namespace rgames::testutil
