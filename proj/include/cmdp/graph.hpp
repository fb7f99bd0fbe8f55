#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cmdp {

// Compressed adjacency: successors of v are targets[offsets[v] .. offsets[v+1]).
struct CsrGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> targets;

  std::size_t num_nodes() const { return offsets.size() - 1; }

  std::span<const std::size_t> successors(std::size_t v) const {
    return {targets.data() + offsets[v], targets.data() + offsets[v + 1]};
  }

  // Appends a node whose successors are [first, last).
  template <typename It>
  void add_node(It first, It last) {
    targets.insert(targets.end(), first, last);
    offsets.push_back(targets.size());
  }
};

struct SccDecomposition {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // component[v] is npos for nodes excluded from the decomposition.
  std::vector<std::size_t> component;
  std::size_t count = 0;
};

// Tarjan's algorithm without recursion. Only nodes with active[v] set take
// part, and edges into inactive nodes are ignored. Components are numbered in
// reverse topological order (sinks first).
inline SccDecomposition strongly_connected_components(const CsrGraph& g,
                                                      const std::vector<bool>* active = nullptr) {
  constexpr std::size_t npos = SccDecomposition::npos;
  const std::size_t n = g.num_nodes();
  auto is_active = [&](std::size_t v) { return active == nullptr || (*active)[v]; };

  SccDecomposition out;
  out.component.assign(n, npos);
  std::vector<std::size_t> index(n, npos), low(n, 0), stack, edge_pos(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> call;
  std::size_t next_index = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (!is_active(root) || index[root] != npos) continue;
    call.push_back(root);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    edge_pos[root] = g.offsets[root];

    while (!call.empty()) {
      const std::size_t v = call.back();
      if (edge_pos[v] < g.offsets[v + 1]) {
        const std::size_t w = g.targets[edge_pos[v]++];
        if (!is_active(w)) continue;
        if (index[w] == npos) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          edge_pos[w] = g.offsets[w];
          call.push_back(w);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call.pop_back();
      if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component[w] = out.count;
        } while (w != v);
        ++out.count;
      }
    }
  }
  return out;
}

// Nodes reachable from the given roots (roots included).
inline std::vector<bool> reachable_from(const CsrGraph& g, std::span<const std::size_t> roots) {
  std::vector<bool> seen(g.num_nodes(), false);
  std::vector<std::size_t> todo;
  for (auto r : roots) {
    if (!seen[r]) {
      seen[r] = true;
      todo.push_back(r);
    }
  }
  while (!todo.empty()) {
    const auto v = todo.back();
    todo.pop_back();
    for (auto w : g.successors(v)) {
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace cmdp
