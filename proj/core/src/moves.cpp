#include "rgames/moves.hpp"

#include <map>

#include "rgames/machines.hpp"

namespace rgames {

std::string to_string(const Move& m) {
  switch (m.kind) {
    case Move::Kind::Nat:
      return std::to_string(m.nat);
    case Move::Kind::Symbol:
      switch (m.sym) {
        case Sym::Pass:
          return "P";
        case Sym::Erase:
          return "E";
        case Sym::Bt:
          return "BT";
      }
      return "?";
    case Move::Kind::Row:
      if (m.inner_pass) return "r" + std::to_string(m.row) + ":P";
      return "r" + std::to_string(m.row) + ":" + std::to_string(m.nat);
  }
  return "?";
}

void MealyStrategy::validate() const {
  if (nodes.empty()) throw GameError(ErrKind::InvalidArgument, "mealy: no states");
  if (initial >= nodes.size()) throw GameError(ErrKind::InvalidArgument, "mealy: bad initial");
  for (const MealyNode& n : nodes) {
    if (n.otherwise.next >= nodes.size())
      throw GameError(ErrKind::InvalidArgument, "mealy: bad otherwise target");
    for (const auto& [d, e] : n.edges)
      if (e.next >= nodes.size()) throw GameError(ErrKind::InvalidArgument, "mealy: bad target");
  }
}

void MealyStrategyI::validate() const {
  if (nodes.empty()) throw GameError(ErrKind::InvalidArgument, "mealyI: no states");
  if (initial >= nodes.size()) throw GameError(ErrKind::InvalidArgument, "mealyI: bad initial");
  for (const MealyINode& n : nodes) {
    if (n.otherwise >= nodes.size())
      throw GameError(ErrKind::InvalidArgument, "mealyI: bad otherwise target");
    for (const auto& [m, q] : n.edges)
      if (q >= nodes.size()) throw GameError(ErrKind::InvalidArgument, "mealyI: bad target");
  }
}

UPStream letter_transduce(const MealyStrategy& t, const UPStream& x) {
  const std::uint64_t P = x.prefix().size();
  const std::uint64_t L = x.period().size();
  std::uint32_t q = t.initial;
  FinSeq out;
  // Prefix phase, then lasso on (state, period position).
  for (std::uint64_t i = 0; i < P; ++i) {
    const Digit d = x.at(i);
    const MealyEdge& e = t.edge(q, d);
    const Move m = e.emit(d);
    if (!m.is_nat())
      throw GameError(ErrKind::InvalidArgument, "letter_transduce: non-digit emission");
    out.push_back(m.nat);
    q = e.next;
  }
  std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint64_t> seen;
  std::uint64_t i = 0;
  for (;;) {
    auto key = std::pair{q, i % L};
    auto [it, fresh] = seen.emplace(key, i);
    if (!fresh) {
      const std::uint64_t start = it->second;
      FinSeq prefix(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(P + start));
      FinSeq period(out.begin() + static_cast<std::ptrdiff_t>(P + start), out.end());
      return UPStream(std::move(prefix), std::move(period));
    }
    const Digit d = x.at(P + i);
    const MealyEdge& e = t.edge(q, d);
    const Move m = e.emit(d);
    if (!m.is_nat())
      throw GameError(ErrKind::InvalidArgument, "letter_transduce: non-digit emission");
    out.push_back(m.nat);
    q = e.next;
    ++i;
  }
}

MealyStrategy constant_mealy(Digit d) {
  MealyStrategy t;
  t.nodes.resize(1);
  t.nodes[0].otherwise = MealyEdge{0, Move::nat_move(d), false};
  return t;
}

MealyStrategy copy_mealy() {
  MealyStrategy t;
  t.nodes.resize(1);
  t.nodes[0].otherwise = MealyEdge{0, Move(), true};
  return t;
}

}  // namespace rgames
