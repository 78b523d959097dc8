#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgames/errors.hpp"
#include "rgames/machines.hpp"
#include "rgames/streams.hpp"

namespace rgames {

using State = std::uint32_t;

enum class Membership { In, Out };
enum class PrefixVerdict { Accepted, Rejected, Unknown };

/// Deterministic parity automaton over the digit alphabet ω. A run is
/// accepted iff the least priority visited infinitely often is even.
/// Totality over the infinite alphabet: explicit digit edges plus a
/// mandatory otherwise-edge per state.
struct DetOmegaAutomaton {
  struct Trans {
    std::map<Digit, State> edges;
    State otherwise = 0;
  };

  std::vector<Trans> trans;
  std::vector<std::uint64_t> priority;
  State initial = 0;

  std::size_t size() const { return trans.size(); }
  State step(State q, Digit d) const {
    const Trans& t = trans[q];
    auto it = t.edges.find(d);
    return it == t.edges.end() ? t.otherwise : it->second;
  }
  State run(State q, const FinSeq& s) const {
    for (Digit d : s) q = step(q, d);
    return q;
  }
  void validate() const;
};

Membership membership_up(const DetOmegaAutomaton& A, const UPStream& x);

/// Language emptiness from a given state.
bool nonempty_from(const DetOmegaAutomaton& A, State q);
inline bool nonempty(const DetOmegaAutomaton& A) { return nonempty_from(A, A.initial); }

/// Rejected iff no continuation is accepted, Accepted iff all are;
/// both verdicts are absorbing under extension.
PrefixVerdict prefix_verdict(const DetOmegaAutomaton& A, const FinSeq& s);

DetOmegaAutomaton complement(const DetOmegaAutomaton& A);
DetOmegaAutomaton intersect(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B);
DetOmegaAutomaton unite(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B);

/// {s followed by x : x in A}: a digit-checking chain into A, everything
/// off the chain falls into a rejecting sink.
DetOmegaAutomaton prepend(const FinSeq& s, const DetOmegaAutomaton& A);

/// Reachable trim plus order- and parity-preserving priority compression.
DetOmegaAutomaton normalize(const DetOmegaAutomaton& A);

/// Exact language equality of deterministic parity automata.
bool equivalent(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B);

/// Some accepted ultimately periodic stream, if the language is nonempty.
std::optional<UPStream> find_witness(const DetOmegaAutomaton& A);

DetOmegaAutomaton full_space();
DetOmegaAutomaton empty_set();
/// N_s: all streams extending the finite word s.
DetOmegaAutomaton cylinder(const FinSeq& s);

enum class RankTag { Closed, Pi02, User };

struct ControlSet {
  DetOmegaAutomaton automaton;
  RankTag declared_rank = RankTag::User;
  std::string name;

  /// Closed demands the language equal its safety closure; Pi02 demands
  /// Buechi shape (priorities within {0,1}).
  void validate_shape() const;
};

/// Z = {constant-0}, the canonical closed test set.
ControlSet canonical_pi1();
/// INF0 = {x : infinitely many zero digits}, the canonical rank-2 test set.
ControlSet canonical_pi2();

/// True iff the language equals its safety closure (never visit a state
/// with empty language).
bool is_safety_shape(const DetOmegaAutomaton& A);
/// True iff priorities stay within {0,1}.
bool is_buchi_shape(const DetOmegaAutomaton& A);

/// Letter-to-letter machine t with x in L(A) iff t(x) = constant-0:
/// emits 0 while the run can still be extended to an accepted one, 1 forever
/// after the first dead state.
MealyStrategy reduce_safety_to_Z(const DetOmegaAutomaton& A);

/// Letter-to-letter machine t with x in L(A) iff t(x) has infinitely many
/// zeros: emits 0 exactly on steps entering an accepting state.
MealyStrategy reduce_buchi_to_INF0(const DetOmegaAutomaton& A);

}  // namespace rgames
