#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rgames/composite.hpp"

namespace rgames {

// Pointclass steps built from a base set and a control schedule.  A stream
// belongs to the Sigma step when some control row activates and the matching
// output row lands in the base set; the R step collects the streams with no
// activated control row at all; the Pi step is their union.

enum class SuccessorKind { Sigma, Pi, R };

struct SuccessorSet {
  DetOmegaAutomaton base;
  ControlSchedule controls;
  SuccessorKind kind = SuccessorKind::Sigma;
};

/// Activation data of x under a schedule: the least n whose even projection
/// lies in control(n), whether the following odd projection lies in `base`,
/// and how many row indices close the search.  Exact: the projections of an
/// ultimately periodic stream form finitely many classes, and the scan
/// covers one full joint recurrence block of (projection pair, control).
struct SuccessorWitness {
  std::optional<std::uint64_t> least;
  bool base_holds = false;
  std::uint64_t scanned = 0;
};

SuccessorWitness successor_witness(const ControlSchedule& controls,
                                   const DetOmegaAutomaton& base, const UPStream& x);

/// Exact membership of x in the successor set.
Membership successor_member(const SuccessorSet& s, const UPStream& x);

/// Doubled schedule: control n of the result equals control n/2 of the
/// input, so consecutive pairs of control rows share one set.
ControlSchedule hat_schedule(const ControlSchedule& controls);

/// Merge two row schemas into one schema for the doubled schedule: rows 4k
/// and 4k+1 come from sigma0's rows 2k and 2k+1, rows 4k+2 and 4k+3 from
/// sigma1's rows 2k and 2k+1.  The merged play only respects the activation
/// rule when sigma1 activates wherever sigma0 does not and x lies outside A;
/// each sample is checked against that chain and a breaking sample throws
/// WitnessFailure naming it.
CompositeStrategy successor_merge(const CompositeStrategy& sigma0,
                                  const CompositeStrategy& sigma1,
                                  const ControlSchedule& controls, const GameSpec& inner,
                                  const DetOmegaAutomaton& a,
                                  const std::vector<UPStream>& samples,
                                  std::uint64_t max_rows = 64);

}  // namespace rgames
