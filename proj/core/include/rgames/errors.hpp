#pragma once

#include <stdexcept>
#include <string>

namespace rgames {

enum class ErrKind {
  InvalidArgument,
  Overflow,
  Parse,
  NotDelayable,
  RuleViolation,
  DomainViolation,
  NoActivationWithinBound,
  NoWitnessWithinBound,
  WitnessFailure,
  BudgetViolation,
  UnsupportedRegionShape,
  UnsupportedGame,
  IncoherentSpec,
  BadAnchor,
  LimitUndetermined,
  Undetermined,
};

const char* to_string(ErrKind k);

/// Single exception type for all engine-level failures; `kind` tells callers
/// (and the CLI's error mapping) what went wrong without string matching.
class GameError : public std::runtime_error {
 public:
  GameError(ErrKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

}  // namespace rgames
