#pragma once

#include <map>
#include <vector>

#include "rgames/errors.hpp"
#include "rgames/moves.hpp"

namespace rgames {

/// Finite-state machine for player II: state x I-digit -> state x Move.
/// Totality over the infinite digit alphabet comes from a mandatory
/// otherwise-edge per state. An edge may instead echo the input digit back
/// as Nat(d); without that, copying would need infinitely many edges.
struct MealyEdge {
  std::uint32_t next = 0;
  Move out;
  bool echo = false;  // out ignored; emits Nat(input digit)

  Move emit(Digit d) const { return echo ? Move::nat_move(d) : out; }
};

struct MealyNode {
  std::map<Digit, MealyEdge> edges;
  MealyEdge otherwise;
};

struct MealyStrategy {
  std::vector<MealyNode> nodes;
  std::uint32_t initial = 0;

  const MealyEdge& edge(std::uint32_t q, Digit d) const {
    const MealyNode& n = nodes.at(q);
    auto it = n.edges.find(d);
    return it == n.edges.end() ? n.otherwise : it->second;
  }
  void validate() const;
};

/// Finite-state machine for player I: each state fixes the digit I plays;
/// transitions consume II's reply.
struct MealyINode {
  Digit out = 0;
  std::map<Move, std::uint32_t> edges;
  std::uint32_t otherwise = 0;
};

struct MealyStrategyI {
  std::vector<MealyINode> nodes;
  std::uint32_t initial = 0;

  std::uint32_t step(std::uint32_t q, const Move& m) const {
    const MealyINode& n = nodes.at(q);
    auto it = n.edges.find(m);
    return it == n.edges.end() ? n.otherwise : it->second;
  }
  void validate() const;
};

/// Runs a letter-to-letter machine (every emission a digit) over an
/// ultimately periodic input, exactly: the joint (state, phase) orbit lassoes.
UPStream letter_transduce(const MealyStrategy& t, const UPStream& x);

/// One-state machine emitting a fixed digit forever.
MealyStrategy constant_mealy(Digit d);

/// One-state machine echoing every input digit.
MealyStrategy copy_mealy();

}  // namespace rgames
