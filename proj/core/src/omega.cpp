#include "rgames/omega.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "graph_util.hpp"

namespace rgames {
namespace {

std::vector<std::vector<State>> successors(const DetOmegaAutomaton& A) {
  std::vector<std::vector<State>> adj(A.size());
  for (State q = 0; q < A.size(); ++q) {
    for (const auto& [d, t] : A.trans[q].edges) adj[q].push_back(t);
    adj[q].push_back(A.trans[q].otherwise);
  }
  return adj;
}

using graph::reachable_from;
using graph::scc_decompose;
using graph::SccResult;

std::set<std::uint64_t> even_priorities(const DetOmegaAutomaton& A, const std::vector<bool>& mask) {
  std::set<std::uint64_t> out;
  for (State q = 0; q < A.size(); ++q)
    if (mask[q] && A.priority[q] % 2 == 0) out.insert(A.priority[q]);
  return out;
}

/// Smallest digit routed through the otherwise-edge of q.
Digit fresh_digit(const DetOmegaAutomaton::Trans& t) {
  Digit d = 0;
  for (const auto& [k, tgt] : t.edges) {
    if (k == d)
      ++d;
    else
      break;
  }
  return d;
}

std::vector<std::pair<Digit, State>> labeled_successors(const DetOmegaAutomaton::Trans& t) {
  std::vector<std::pair<Digit, State>> out;
  out.reserve(t.edges.size() + 1);
  for (const auto& [d, q] : t.edges) out.emplace_back(d, q);
  out.emplace_back(fresh_digit(t), t.otherwise);
  return out;
}

}  // namespace

void DetOmegaAutomaton::validate() const {
  if (trans.empty()) throw GameError(ErrKind::InvalidArgument, "automaton: no states");
  if (trans.size() != priority.size())
    throw GameError(ErrKind::InvalidArgument, "automaton: priority size mismatch");
  if (initial >= trans.size()) throw GameError(ErrKind::InvalidArgument, "automaton: bad initial");
  for (const Trans& t : trans) {
    if (t.otherwise >= trans.size())
      throw GameError(ErrKind::InvalidArgument, "automaton: bad otherwise target");
    for (const auto& [d, q] : t.edges)
      if (q >= trans.size()) throw GameError(ErrKind::InvalidArgument, "automaton: bad target");
  }
}

Membership membership_up(const DetOmegaAutomaton& A, const UPStream& x) {
  State q = A.initial;
  for (std::uint64_t i = 0; i < x.prefix().size(); ++i) q = A.step(q, x.at(i));
  const std::uint64_t L = x.period().size();
  // Lasso on (state, period phase): the tail trajectory repeats exactly.
  std::map<std::pair<State, std::uint64_t>, std::uint64_t> seen;
  std::vector<State> traj{q};
  std::uint64_t t = 0;
  for (;;) {
    auto [it, fresh] = seen.emplace(std::pair{q, t % L}, t);
    if (!fresh) {
      const std::uint64_t t0 = it->second;
      std::uint64_t best = ~std::uint64_t{0};
      for (std::uint64_t i = t0; i < t; ++i) best = std::min(best, A.priority[traj[i]]);
      return best % 2 == 0 ? Membership::In : Membership::Out;
    }
    q = A.step(q, x.period()[t % L]);
    traj.push_back(q);
    ++t;
  }
}

bool nonempty_from(const DetOmegaAutomaton& A, State q0) {
  const auto adj = successors(A);
  const auto reach = reachable_from(adj, q0);
  for (std::uint64_t p : even_priorities(A, reach)) {
    std::vector<bool> active(A.size(), false);
    for (State q = 0; q < A.size(); ++q) active[q] = reach[q] && A.priority[q] >= p;
    SccResult scc = scc_decompose(adj, active);
    for (State q = 0; q < A.size(); ++q)
      if (active[q] && A.priority[q] == p && scc.has_cycle[scc.comp[q]]) return true;
  }
  return false;
}

PrefixVerdict prefix_verdict(const DetOmegaAutomaton& A, const FinSeq& s) {
  const State q = A.run(A.initial, s);
  if (!nonempty_from(A, q)) return PrefixVerdict::Rejected;
  if (!nonempty_from(complement(A), q)) return PrefixVerdict::Accepted;
  return PrefixVerdict::Unknown;
}

DetOmegaAutomaton complement(const DetOmegaAutomaton& A) {
  DetOmegaAutomaton C = A;
  for (auto& p : C.priority) ++p;
  return C;
}

DetOmegaAutomaton intersect(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  A.validate();
  B.validate();
  // Conjunction of the two parity conditions, phrased as request/grant pairs:
  // for each odd class o of a factor, seeing o infinitely often demands seeing
  // something below o infinitely often. A record of pair indices, moving
  // granted pairs to the front, turns that into a parity condition again:
  // each step emits by the deepest event position, grants even, requests odd.
  struct PairDef {
    int which;
    std::uint64_t odd;
  };
  std::vector<PairDef> pairs;
  for (int which = 0; which < 2; ++which) {
    const DetOmegaAutomaton& M = which == 0 ? A : B;
    std::set<std::uint64_t> odds;
    for (std::uint64_t p : M.priority)
      if (p % 2 == 1) odds.insert(p);
    for (std::uint64_t o : odds) pairs.push_back({which, o});
  }
  const std::size_t r = pairs.size();
  if (r > 60) throw GameError(ErrKind::Overflow, "intersect: too many priority classes");
  const std::uint64_t neutral = 2 * r;

  struct Key {
    State qa, qb;
    std::vector<std::uint8_t> perm;
    std::uint64_t em;
    bool operator<(const Key& o) const {
      return std::tie(qa, qb, perm, em) < std::tie(o.qa, o.qb, o.perm, o.em);
    }
  };
  std::map<Key, State> index;
  std::vector<Key> keys;
  DetOmegaAutomaton P;
  auto intern = [&](const Key& k) -> State {
    auto [it, fresh] = index.emplace(k, static_cast<State>(keys.size()));
    if (fresh) {
      keys.push_back(k);
      P.trans.emplace_back();
      P.priority.push_back(k.em);
      if (keys.size() > 300000) throw GameError(ErrKind::Overflow, "intersect: product too large");
    }
    return it->second;
  };
  std::vector<std::uint8_t> id_perm(r);
  std::iota(id_perm.begin(), id_perm.end(), std::uint8_t{0});
  P.initial = intern(Key{A.initial, B.initial, id_perm, neutral});

  for (State s = 0; s < keys.size(); ++s) {
    const Key k = keys[s];  // by value: keys grows below
    auto advance = [&](State na, State nb) -> State {
      std::uint64_t em = neutral;
      std::vector<bool> granted(r, false);
      for (std::size_t pos = 1; pos <= r; ++pos) {
        const std::uint8_t i = k.perm[pos - 1];
        const std::uint64_t prio =
            pairs[i].which == 0 ? A.priority[na] : B.priority[nb];
        if (prio < pairs[i].odd) {
          granted[i] = true;
          em = std::min(em, 2 * (r - pos));
        } else if (prio == pairs[i].odd) {
          em = std::min(em, 2 * (r - pos) + 1);
        }
      }
      std::vector<std::uint8_t> np;
      np.reserve(r);
      for (std::uint8_t i : k.perm)
        if (granted[i]) np.push_back(i);
      for (std::uint8_t i : k.perm)
        if (!granted[i]) np.push_back(i);
      return intern(Key{na, nb, std::move(np), em});
    };
    std::set<Digit> alpha;
    for (const auto& [d, t] : A.trans[k.qa].edges) alpha.insert(d);
    for (const auto& [d, t] : B.trans[k.qb].edges) alpha.insert(d);
    for (Digit d : alpha) {
      const State tgt = advance(A.step(k.qa, d), B.step(k.qb, d));
      P.trans[s].edges.emplace(d, tgt);
    }
    const State tgt = advance(A.trans[k.qa].otherwise, B.trans[k.qb].otherwise);
    P.trans[s].otherwise = tgt;
  }
  return normalize(P);
}

DetOmegaAutomaton unite(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  return normalize(complement(intersect(complement(A), complement(B))));
}

DetOmegaAutomaton prepend(const FinSeq& s, const DetOmegaAutomaton& A) {
  A.validate();
  if (s.empty()) return A;
  const State offset = static_cast<State>(s.size());
  const State sink = static_cast<State>(s.size() + A.size());
  DetOmegaAutomaton P;
  P.trans.resize(sink + 1);
  P.priority.assign(sink + 1, 1);
  P.initial = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const State next = i + 1 < s.size() ? static_cast<State>(i + 1) : offset + A.initial;
    P.trans[i].edges.emplace(s[i], next);
    P.trans[i].otherwise = sink;
  }
  for (State q = 0; q < A.size(); ++q) {
    for (const auto& [d, t] : A.trans[q].edges) P.trans[offset + q].edges.emplace(d, offset + t);
    P.trans[offset + q].otherwise = offset + A.trans[q].otherwise;
    P.priority[offset + q] = A.priority[q];
  }
  P.trans[sink].otherwise = sink;
  return P;
}

DetOmegaAutomaton normalize(const DetOmegaAutomaton& A) {
  A.validate();
  const auto adj = successors(A);
  const auto reach = reachable_from(adj, A.initial);
  std::vector<State> remap(A.size(), 0);
  std::vector<State> order;
  for (State q = 0; q < A.size(); ++q)
    if (reach[q]) {
      remap[q] = static_cast<State>(order.size());
      order.push_back(q);
    }
  // Compress priorities: collapse same-parity neighbors, keep order and parity.
  std::set<std::uint64_t> distinct;
  for (State q : order) distinct.insert(A.priority[q]);
  std::map<std::uint64_t, std::uint64_t> prio_map;
  std::uint64_t next_val = 0;
  bool first = true;
  std::uint64_t prev = 0;
  for (std::uint64_t v : distinct) {
    if (first) {
      next_val = v % 2;
      first = false;
    } else if (v % 2 != prev % 2) {
      ++next_val;
    }
    prio_map[v] = next_val;
    prev = v;
  }
  DetOmegaAutomaton N;
  N.trans.resize(order.size());
  N.priority.resize(order.size());
  N.initial = remap[A.initial];
  for (std::size_t i = 0; i < order.size(); ++i) {
    const State q = order[i];
    for (const auto& [d, t] : A.trans[q].edges) N.trans[i].edges.emplace(d, remap[t]);
    N.trans[i].otherwise = remap[A.trans[q].otherwise];
    N.priority[i] = prio_map[A.priority[q]];
  }
  return N;
}

bool equivalent(const DetOmegaAutomaton& A, const DetOmegaAutomaton& B) {
  return !nonempty(intersect(A, complement(B))) && !nonempty(intersect(B, complement(A)));
}

std::optional<UPStream> find_witness(const DetOmegaAutomaton& A) {
  A.validate();
  const auto adj = successors(A);
  const auto reach = reachable_from(adj, A.initial);
  for (std::uint64_t p : even_priorities(A, reach)) {
    std::vector<bool> active(A.size(), false);
    for (State q = 0; q < A.size(); ++q) active[q] = reach[q] && A.priority[q] >= p;
    SccResult scc = scc_decompose(adj, active);
    for (State target = 0; target < A.size(); ++target) {
      if (!active[target] || A.priority[target] != p || !scc.has_cycle[scc.comp[target]]) continue;
      // Stem: any path from the initial state to target.
      std::map<State, std::pair<State, Digit>> parent;
      std::vector<State> queue{A.initial};
      std::set<State> seen{A.initial};
      while (!queue.empty()) {
        std::vector<State> next_queue;
        for (State u : queue)
          for (const auto& [d, w] : labeled_successors(A.trans[u]))
            if (seen.insert(w).second) {
              parent[w] = {u, d};
              next_queue.push_back(w);
            }
        queue = std::move(next_queue);
      }
      FinSeq stem;
      for (State w = target; w != A.initial;) {
        auto [u, d] = parent.at(w);
        stem.push_back(d);
        w = u;
      }
      std::reverse(stem.begin(), stem.end());
      // Cycle through target inside its component: min priority is exactly p.
      const int comp = scc.comp[target];
      std::map<State, std::pair<State, Digit>> cpar;
      std::vector<State> cqueue;
      std::set<State> cseen;
      std::optional<FinSeq> cycle;
      auto expand = [&](State u) -> bool {
        for (const auto& [d, w] : labeled_successors(A.trans[u])) {
          if (w == target) {
            FinSeq c{d};
            for (State v = u; v != target;) {
              auto [pu, pd] = cpar.at(v);
              c.push_back(pd);
              v = pu;
            }
            std::reverse(c.begin(), c.end());
            cycle = std::move(c);
            return true;
          }
          if (active[w] && scc.comp[w] == comp && cseen.insert(w).second) {
            cpar[w] = {u, d};
            cqueue.push_back(w);
          }
        }
        return false;
      };
      if (!expand(target)) {
        for (std::size_t qi = 0; qi < cqueue.size() && !cycle; ++qi) expand(cqueue[qi]);
      }
      if (cycle) return UPStream(std::move(stem), std::move(*cycle));
    }
  }
  return std::nullopt;
}

DetOmegaAutomaton full_space() {
  DetOmegaAutomaton A;
  A.trans.resize(1);
  A.trans[0].otherwise = 0;
  A.priority = {0};
  return A;
}

DetOmegaAutomaton empty_set() {
  DetOmegaAutomaton A;
  A.trans.resize(1);
  A.trans[0].otherwise = 0;
  A.priority = {1};
  return A;
}

DetOmegaAutomaton cylinder(const FinSeq& s) { return prepend(s, full_space()); }

void ControlSet::validate_shape() const {
  automaton.validate();
  switch (declared_rank) {
    case RankTag::Closed:
      if (!is_safety_shape(automaton))
        throw GameError(ErrKind::InvalidArgument, "control set '" + name + "' is not closed");
      return;
    case RankTag::Pi02:
      if (!is_buchi_shape(automaton))
        throw GameError(ErrKind::InvalidArgument,
                        "control set '" + name + "' is not in Buechi shape");
      return;
    case RankTag::User:
      return;
  }
}

ControlSet canonical_pi1() {
  DetOmegaAutomaton Z;
  Z.trans.resize(2);
  Z.trans[0].edges.emplace(0, 0);
  Z.trans[0].otherwise = 1;
  Z.trans[1].otherwise = 1;
  Z.priority = {0, 1};
  Z.initial = 0;
  return ControlSet{Z, RankTag::Closed, "Z"};
}

ControlSet canonical_pi2() {
  DetOmegaAutomaton F;
  F.trans.resize(2);
  F.trans[0].edges.emplace(0, 0);
  F.trans[0].otherwise = 1;
  F.trans[1].edges.emplace(0, 0);
  F.trans[1].otherwise = 1;
  F.priority = {0, 1};
  F.initial = 1;
  return ControlSet{F, RankTag::Pi02, "INF0"};
}

bool is_safety_shape(const DetOmegaAutomaton& A) {
  DetOmegaAutomaton C = A;
  for (State q = 0; q < A.size(); ++q) C.priority[q] = nonempty_from(A, q) ? 0 : 1;
  return equivalent(A, C);
}

bool is_buchi_shape(const DetOmegaAutomaton& A) {
  for (std::uint64_t p : A.priority)
    if (p > 1) return false;
  return true;
}

MealyStrategy reduce_safety_to_Z(const DetOmegaAutomaton& A) {
  A.validate();
  if (!is_safety_shape(A))
    throw GameError(ErrKind::UnsupportedRegionShape, "reduce_safety_to_Z: not a closed set");
  std::vector<bool> alive(A.size());
  for (State q = 0; q < A.size(); ++q) alive[q] = nonempty_from(A, q);
  MealyStrategy t;
  t.nodes.resize(A.size());
  t.initial = A.initial;
  auto mark = [&](State tgt) { return Move::nat_move(alive[tgt] ? 0 : 1); };
  for (State q = 0; q < A.size(); ++q) {
    for (const auto& [d, tgt] : A.trans[q].edges)
      t.nodes[q].edges.emplace(d, MealyEdge{tgt, mark(tgt), false});
    const State tgt = A.trans[q].otherwise;
    t.nodes[q].otherwise = MealyEdge{tgt, mark(tgt), false};
  }
  return t;
}

MealyStrategy reduce_buchi_to_INF0(const DetOmegaAutomaton& A) {
  A.validate();
  if (!is_buchi_shape(A))
    throw GameError(ErrKind::UnsupportedRegionShape, "reduce_buchi_to_INF0: not Buechi-shaped");
  MealyStrategy t;
  t.nodes.resize(A.size());
  t.initial = A.initial;
  auto mark = [&](State tgt) { return Move::nat_move(A.priority[tgt] == 0 ? 0 : 1); };
  for (State q = 0; q < A.size(); ++q) {
    for (const auto& [d, tgt] : A.trans[q].edges)
      t.nodes[q].edges.emplace(d, MealyEdge{tgt, mark(tgt), false});
    const State tgt = A.trans[q].otherwise;
    t.nodes[q].otherwise = MealyEdge{tgt, mark(tgt), false};
  }
  return t;
}

}  // namespace rgames
