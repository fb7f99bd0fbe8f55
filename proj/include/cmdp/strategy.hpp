#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cmdp/graph.hpp"
#include "cmdp/model.hpp"
#include "cmdp/selector.hpp"

namespace cmdp {

// ---------------------------------------------------------------------------
// Simulation

struct TraceStep {
  StateId state;
  // Action that led into `state`; empty for the initial entry.
  std::optional<ActionId> action;
  Level level;
};

enum class Termination { step_budget, exhaustion, selector_underflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::step_budget: return "step_budget";
    case Termination::exhaustion: return "exhaustion";
    case Termination::selector_underflow: return "selector_underflow";
  }
  return "?";
}

struct RunTrace {
  std::vector<TraceStep> steps;
  Termination termination = Termination::step_budget;
  // Step index (1-based) at which the selector had no applicable entry.
  std::optional<std::size_t> underflow_step;
};

namespace detail {

// Uniform double in [0,1) from the top 53 bits, independent of the
// standard library's distribution implementations.
inline double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline StateId sample_successor(const ActionEntry& a, std::mt19937_64& rng) {
  const double u = unit_interval(rng);
  double acc = 0.0;
  for (const auto& t : a.successors) {
    acc += t.prob;
    if (u < acc) return t.target;
  }
  return a.successors.back().target;
}

}  // namespace detail

/// Samples one run of the counter strategy from `s0` with initial load `d`.
/// Stops after `steps` actions, on exhaustion, or when the selector has no
/// entry at or below the current level.
inline RunTrace simulate(const Cmdp& m, const CounterSelector& sel, StateId s0, std::uint64_t d, std::size_t steps,
                         std::uint64_t seed) {
  if (d > m.capacity()) throw ModelError("initial load exceeds capacity");
  if (sel.num_states() != m.num_states()) throw ModelError("selector does not match the model");
  std::mt19937_64 rng(seed);
  RunTrace trace;
  trace.steps.push_back({s0, std::nullopt, d});
  StateId s = s0;
  Level level = d;
  for (std::size_t i = 1; i <= steps; ++i) {
    const auto choice = select_action(m, sel, s, *level);
    if (choice.fallback) {
      trace.termination = Termination::selector_underflow;
      trace.underflow_step = i;
      return trace;
    }
    const auto& a = m.action(s, choice.action);
    const auto t = detail::sample_successor(a, rng);
    level = memory_update(m, level, s, choice.action);
    trace.steps.push_back({t, choice.action, level});
    if (!level) {
      trace.termination = Termination::exhaustion;
      return trace;
    }
    s = t;
  }
  trace.termination = Termination::step_budget;
  return trace;
}

// ---------------------------------------------------------------------------
// Induced Markov chain

/// Finite graph over (state, level) pairs generated by a counter strategy.
/// Node 0 is the exhausted sink, node 1 the root.
struct InducedChain {
  static constexpr std::size_t sink = 0;
  static constexpr std::size_t root = 1;

  struct Node {
    StateId state = 0;
    std::uint64_t level = 0;
    ActionId action = 0;
    bool fallback = false;
  };

  std::vector<Node> nodes;
  CsrGraph graph;

  std::size_t size() const { return nodes.size(); }

  std::optional<std::size_t> find(StateId s, std::uint64_t level) const {
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i].state == s && nodes[i].level == level) return i;
    return std::nullopt;
  }

  bool any_fallback() const {
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i].fallback) return true;
    return false;
  }
};

/// Explores the chain reachable from (s0, d) breadth first.
inline InducedChain induced_chain(const Cmdp& m, const CounterSelector& sel, StateId s0, std::uint64_t d) {
  if (d > m.capacity()) throw ModelError("initial load exceeds capacity");
  if (sel.num_states() != m.num_states()) throw ModelError("selector does not match the model");
  InducedChain chain;
  chain.nodes.push_back({});
  std::map<std::pair<StateId, std::uint64_t>, std::size_t> index;
  auto intern = [&](StateId s, std::uint64_t level) {
    auto [it, inserted] = index.emplace(std::make_pair(s, level), chain.nodes.size());
    if (inserted) chain.nodes.push_back({s, level, 0, false});
    return it->second;
  };
  intern(s0, d);

  std::vector<std::vector<std::size_t>> adj(1, std::vector<std::size_t>{InducedChain::sink});
  for (std::size_t i = 1; i < chain.nodes.size(); ++i) {
    const auto s = chain.nodes[i].state;
    const auto level = chain.nodes[i].level;
    const auto choice = select_action(m, sel, s, level);
    chain.nodes[i].action = choice.action;
    chain.nodes[i].fallback = choice.fallback;
    const auto next = memory_update(m, level, s, choice.action);
    std::vector<std::size_t> succ;
    if (!next) {
      succ.push_back(InducedChain::sink);
    } else {
      for (const auto& t : m.action(s, choice.action).successors) succ.push_back(intern(t.target, *next));
    }
    adj.push_back(std::move(succ));
  }
  for (const auto& succ : adj) chain.graph.add_node(succ.begin(), succ.end());
  return chain;
}

enum class Objective { safe, positive_reach, buchi };

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::safe: return "safe";
    case Objective::positive_reach: return "posreach";
    case Objective::buchi: return "buchi";
  }
  return "?";
}

struct Verdict {
  bool holds = false;
  std::string reason;
};

/// Exact qualitative check of an objective on an induced chain.
///  safe:           the sink is unreachable from the root;
///  positive_reach: safe, and some node in T is reachable;
///  buchi:          safe, and every reachable bottom SCC contains a node in T.
inline Verdict verify(const InducedChain& chain, const StateMask& targets, Objective objective) {
  const std::size_t roots[] = {InducedChain::root};
  const auto reach = reachable_from(chain.graph, roots);
  if (reach[InducedChain::sink]) return {false, "exhausted level reachable"};
  if (objective == Objective::safe) return {true, "sink unreachable"};

  if (objective == Objective::positive_reach) {
    for (std::size_t i = 1; i < chain.size(); ++i)
      if (reach[i] && targets[chain.nodes[i].state]) return {true, "target reachable"};
    return {false, "no target reachable"};
  }

  const auto scc = strongly_connected_components(chain.graph, &reach);
  std::vector<bool> bottom(scc.count, true), has_target(scc.count, false);
  for (std::size_t v = 1; v < chain.size(); ++v) {
    if (!reach[v]) continue;
    const auto c = scc.component[v];
    if (targets[chain.nodes[v].state]) has_target[c] = true;
    for (auto w : chain.graph.successors(v))
      if (scc.component[w] != c) bottom[c] = false;
  }
  for (std::size_t c = 0; c < scc.count; ++c)
    if (bottom[c] && !has_target[c]) return {false, "bottom SCC without target"};
  return {true, "every bottom SCC visits a target"};
}

}  // namespace cmdp
