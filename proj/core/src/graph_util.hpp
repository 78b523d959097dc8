#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace rgames::graph {

using Node = std::uint32_t;

inline std::vector<bool> reachable_from(const std::vector<std::vector<Node>>& adj, Node start) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<Node> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    Node q = stack.back();
    stack.pop_back();
    for (Node t : adj[q])
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
  }
  return seen;
}

struct SccResult {
  std::vector<int> comp;        // -1 for inactive nodes
  std::vector<bool> has_cycle;  // per component: contains an internal edge
  int count = 0;
};

/// Iterative strongly-connected components over the active-node subgraph.
inline SccResult scc_decompose(const std::vector<std::vector<Node>>& adj,
                               const std::vector<bool>& active) {
  const std::size_t n = adj.size();
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<Node> stk;
  int next_index = 0;
  struct Frame {
    Node v;
    std::size_t ei;
  };
  for (Node root = 0; root < n; ++root) {
    if (!active[root] || idx[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    idx[root] = low[root] = next_index++;
    stk.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.ei < adj[f.v].size()) {
        Node w = adj[f.v][f.ei++];
        if (!active[w]) continue;
        if (idx[w] == -1) {
          idx[w] = low[w] = next_index++;
          stk.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], idx[w]);
        }
      } else {
        if (low[f.v] == idx[f.v]) {
          for (;;) {
            Node w = stk.back();
            stk.pop_back();
            on_stack[w] = false;
            r.comp[w] = r.count;
            if (w == f.v) break;
          }
          ++r.count;
        }
        Node child = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[child]);
      }
    }
  }
  r.has_cycle.assign(r.count, false);
  for (Node v = 0; v < n; ++v) {
    if (!active[v]) continue;
    for (Node w : adj[v])
      if (active[w] && r.comp[w] == r.comp[v]) r.has_cycle[r.comp[v]] = true;
  }
  return r;
}

}  // namespace rgames::graph
