#include "rgames/degree.hpp"

#include <memory>
#include <numeric>
#include <string>

#include "rgames/errors.hpp"

namespace rgames {

namespace {

// Row indices scanned per membership query stay below this.
constexpr std::uint64_t kRowScanCap = 100000;

std::string render_stream(const UPStream& x) {
  const auto render = [](const FinSeq& seq) {
    std::string s = "(";
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(seq[i]);
    }
    return s + ")";
  };
  return render(x.prefix()) + render(x.period()) + "^w";
}

}  // namespace

SuccessorWitness successor_witness(const ControlSchedule& controls,
                                   const DetOmegaAutomaton& base, const UPStream& x) {
  controls.validate();
  ProjectionSpectrum sp(x);
  OrbitShape srec = controls.recurrence();

  // Both projections 2n and 2n+1 step through row classes with stride 2, so
  // their joint class of n repeats with period cycle/gcd(2, cycle) once
  // 2n >= stem; the schedule class joins with its own recurrence.
  std::uint64_t spcyc = sp.cycle() / std::gcd<std::uint64_t>(2, sp.cycle());
  std::uint64_t n0 = std::max((sp.stem() + 1) / 2, srec.tail);
  std::uint64_t d = std::lcm(std::max<std::uint64_t>(spcyc, 1),
                             std::max<std::uint64_t>(srec.cycle, 1));
  std::uint64_t bound = n0 + d;
  if (bound > kRowScanCap)
    throw GameError(ErrKind::Overflow, "successor_witness: joint recurrence block of " +
                                           std::to_string(bound) + " rows exceeds the scan cap");

  SuccessorWitness w;
  w.scanned = bound;
  for (std::uint64_t n = 0; n < bound; ++n) {
    if (membership_up(controls.control(n).automaton, sp.row(2 * n)) != Membership::In) continue;
    w.least = n;
    w.base_holds = membership_up(base, sp.row(2 * n + 1)) == Membership::In;
    break;
  }
  return w;
}

Membership successor_member(const SuccessorSet& s, const UPStream& x) {
  SuccessorWitness w = successor_witness(s.controls, s.base, x);
  bool sigma = w.least.has_value() && w.base_holds;
  bool rest = !w.least.has_value();
  bool in = false;
  switch (s.kind) {
    case SuccessorKind::Sigma: in = sigma; break;
    case SuccessorKind::R: in = rest; break;
    case SuccessorKind::Pi: in = sigma || rest; break;
  }
  return in ? Membership::In : Membership::Out;
}

ControlSchedule hat_schedule(const ControlSchedule& controls) {
  controls.validate();
  ControlSchedule hat;
  hat.tail = controls.tail;
  hat.sets.reserve(controls.sets.size() * 2);
  for (const ControlSet& c : controls.sets) {
    hat.sets.push_back(c);
    hat.sets.push_back(c);
  }
  // Doubling the list keeps class_of(n) == class_of(n / 2) of the input in
  // both tail modes: cycling mod 2k halves to cycling mod k, and clamping at
  // 2k - 1 halves to clamping at k - 1.
  return hat;
}

CompositeStrategy successor_merge(const CompositeStrategy& sigma0,
                                  const CompositeStrategy& sigma1,
                                  const ControlSchedule& controls, const GameSpec& inner,
                                  const DetOmegaAutomaton& a,
                                  const std::vector<UPStream>& samples,
                                  std::uint64_t max_rows) {
  controls.validate();
  if (!sigma0.tail || !sigma1.tail)
    throw GameError(ErrKind::InvalidArgument, "successor_merge: both schemas need a tail");

  for (const UPStream& x : samples) {
    ActivationProfile a0 = composite_activation(inner, controls, sigma0, x, max_rows);
    if (a0.least) continue;
    // sigma0 leaves every control row inactive on x, so the merged play can
    // only activate through sigma1; that needs x outside A (else sigma0 was
    // not winning-shaped to begin with) and sigma1 activated.
    if (membership_up(a, x) == Membership::In)
      throw GameError(ErrKind::WitnessFailure,
                      "successor_merge: sample " + render_stream(x) +
                          " lies in A yet activates no control row of sigma0");
    ActivationProfile a1 = composite_activation(inner, controls, sigma1, x, max_rows);
    if (!a1.least)
      throw GameError(ErrKind::WitnessFailure,
                      "successor_merge: sample " + render_stream(x) +
                          " activates no control row of either schema");
  }

  auto s0 = std::make_shared<CompositeStrategy>(sigma0);
  auto s1 = std::make_shared<CompositeStrategy>(sigma1);
  CompositeStrategy merged;
  merged.row_bound = 2 * std::max(sigma0.row_bound, sigma1.row_bound);
  merged.tail_cycle =
      2 * std::lcm(std::max<std::uint64_t>(sigma0.tail_cycle, 1),
                   std::max<std::uint64_t>(sigma1.tail_cycle, 1));
  merged.tail = [s0, s1](std::uint64_t r) {
    std::uint64_t q = r / 4;
    std::uint64_t c = r % 4;
    const CompositeStrategy& src = c < 2 ? *s0 : *s1;
    return src.row(2 * q + (c & 1));
  };
  return merged;
}

}  // namespace rgames
