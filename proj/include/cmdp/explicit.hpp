#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmdp/error.hpp"
#include "cmdp/graph.hpp"
#include "cmdp/io.hpp"
#include "cmdp/model.hpp"
#include "cmdp/selector.hpp"

namespace cmdp {

inline constexpr std::size_t kDefaultNodeLimit = 5'000'000;

// Label of the sink's self-loop.
inline constexpr ActionId kSinkAction = std::numeric_limits<ActionId>::max();

/// The CMDP with resource levels folded into the state space: node
/// (s, e) for every state and level 0..cap, plus an absorbing sink that
/// collects every transition whose level would drop below zero.
class ExplicitMdp {
 public:
  std::size_t num_nodes() const { return action_begin_.size() - 1; }
  std::size_t num_states() const { return num_states_; }
  std::uint64_t capacity() const { return capacity_; }
  std::size_t sink() const { return num_nodes() - 1; }

  std::size_t node(StateId s, std::uint64_t level) const {
    return s * static_cast<std::size_t>(capacity_ + 1) + static_cast<std::size_t>(level);
  }
  StateId state_of(std::size_t v) const { return v / static_cast<std::size_t>(capacity_ + 1); }
  std::uint64_t level_of(std::size_t v) const { return v % static_cast<std::size_t>(capacity_ + 1); }

  std::size_t num_actions() const { return label_.size(); }
  std::size_t actions_begin(std::size_t v) const { return action_begin_[v]; }
  std::size_t actions_end(std::size_t v) const { return action_begin_[v + 1]; }
  std::size_t owner(std::size_t act) const { return owner_[act]; }
  ActionId label(std::size_t act) const { return label_[act]; }

  std::span<const std::size_t> successors(std::size_t act) const {
    return {succ_.data() + succ_begin_[act], succ_.data() + succ_begin_[act + 1]};
  }
  std::span<const double> probabilities(std::size_t act) const {
    return {prob_.data() + succ_begin_[act], prob_.data() + succ_begin_[act + 1]};
  }

  const Cmdp& model() const { return *model_; }

  std::string node_name(std::size_t v) const {
    if (v == sink()) return "sink";
    return model_->state_name(state_of(v)) + "@" + std::to_string(level_of(v));
  }

 private:
  friend ExplicitMdp unfold(const Cmdp&, std::size_t);

  std::optional<Cmdp> model_;
  std::size_t num_states_ = 0;
  std::uint64_t capacity_ = 0;
  std::vector<std::size_t> action_begin_{0};
  std::vector<std::size_t> owner_;
  std::vector<ActionId> label_;
  std::vector<std::size_t> succ_begin_{0};
  std::vector<std::size_t> succ_;
  std::vector<double> prob_;
};

/// Number of nodes of the unfolding: (cap+1)·|S| + 1.
inline std::size_t unfolded_node_count(std::size_t num_states, std::uint64_t capacity) {
  constexpr auto max = std::numeric_limits<std::size_t>::max();
  if (capacity >= max || num_states > (max - 1) / (static_cast<std::size_t>(capacity) + 1))
    throw SizeLimitError("unfolding size overflows");
  return num_states * (static_cast<std::size_t>(capacity) + 1) + 1;
}

inline ExplicitMdp unfold(const Cmdp& m, std::size_t node_limit = kDefaultNodeLimit) {
  const auto count = unfolded_node_count(m.num_states(), m.capacity());
  if (count > node_limit)
    throw SizeLimitError("unfolding needs " + std::to_string(count) + " nodes, limit is " + std::to_string(node_limit));

  ExplicitMdp x;
  x.model_ = m;
  x.num_states_ = m.num_states();
  x.capacity_ = m.capacity();
  const auto sink = count - 1;
  x.action_begin_.reserve(count + 1);

  auto push_action = [&](std::size_t owner, ActionId label) {
    x.owner_.push_back(owner);
    x.label_.push_back(label);
  };
  auto close_action = [&] { x.succ_begin_.push_back(x.succ_.size()); };

  for (StateId s = 0; s < m.num_states(); ++s) {
    for (std::uint64_t e = 0; e <= m.capacity(); ++e) {
      const auto v = x.node(s, e);
      for (const auto& a : m.actions_at(s)) {
        push_action(v, a.label);
        const auto next = step_level(m, e, s, a.consumption);
        if (!next) {
          x.succ_.push_back(sink);
          x.prob_.push_back(1.0);
        } else {
          for (const auto& t : a.successors) {
            x.succ_.push_back(x.node(t.target, *next));
            x.prob_.push_back(t.prob);
          }
        }
        close_action();
      }
      x.action_begin_.push_back(x.label_.size());
    }
  }
  push_action(sink, kSinkAction);
  x.succ_.push_back(sink);
  x.prob_.push_back(1.0);
  close_action();
  x.action_begin_.push_back(x.label_.size());
  return x;
}

/// The unfolding in the CMDP document format; node names are "state@level".
inline json explicit_to_json(const ExplicitMdp& x) {
  json doc;
  doc["capacity"] = x.capacity();
  doc["states"] = json::array();
  for (std::size_t v = 0; v < x.num_nodes(); ++v) doc["states"].push_back(x.node_name(v));
  doc["reload"] = json::array();
  doc["actions"] = json::array();
  for (std::size_t act = 0; act < x.num_actions(); ++act) {
    json entry;
    entry["source"] = x.node_name(x.owner(act));
    entry["label"] = x.label(act) == kSinkAction ? std::string("sink") : x.model().action_name(x.label(act));
    entry["consumption"] = 0;
    entry["successors"] = json::array();
    const auto succ = x.successors(act);
    const auto prob = x.probabilities(act);
    for (std::size_t i = 0; i < succ.size(); ++i)
      entry["successors"].push_back({{"state", x.node_name(succ[i])}, {"prob", prob[i]}});
    doc["actions"].push_back(std::move(entry));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Maximal end components

/// Nodes and the retained explicit actions (indices into the unfolding).
struct Mec {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> actions;
};

namespace detail {

// Iterative SCC refinement restricted to the given node and action masks.
// Both masks are narrowed in place to the union of all MECs.
inline std::vector<Mec> mecs_within(const ExplicitMdp& x, std::vector<bool>& node_on, std::vector<bool>& action_on,
                                    std::size_t* rounds = nullptr) {
  const auto n = x.num_nodes();
  for (std::size_t v = 0; v < n; ++v) {
    if (!node_on[v]) continue;
    bool any = false;
    for (auto act = x.actions_begin(v); act < x.actions_end(v); ++act) any = any || action_on[act];
    if (!any) node_on[v] = false;
  }

  SccDecomposition scc;
  std::size_t round = 0;
  for (;;) {
    ++round;
    CsrGraph g;
    g.offsets.reserve(n + 1);
    std::vector<std::size_t> succ;
    for (std::size_t v = 0; v < n; ++v) {
      succ.clear();
      if (node_on[v])
        for (auto act = x.actions_begin(v); act < x.actions_end(v); ++act)
          if (action_on[act])
            for (auto w : x.successors(act)) succ.push_back(w);
      g.add_node(succ.begin(), succ.end());
    }
    scc = strongly_connected_components(g, &node_on);

    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (!node_on[v]) continue;
      bool any = false;
      for (auto act = x.actions_begin(v); act < x.actions_end(v); ++act) {
        if (!action_on[act]) continue;
        for (auto w : x.successors(act)) {
          if (!node_on[w] || scc.component[w] != scc.component[v]) {
            action_on[act] = false;
            changed = true;
            break;
          }
        }
        any = any || action_on[act];
      }
      if (!any) {
        node_on[v] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (rounds) *rounds = round;

  std::vector<std::size_t> slot(scc.count, SccDecomposition::npos);
  std::vector<Mec> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (!node_on[v]) continue;
    auto& k = slot[scc.component[v]];
    if (k == SccDecomposition::npos) {
      k = out.size();
      out.emplace_back();
    }
    out[k].nodes.push_back(v);
    for (auto act = x.actions_begin(v); act < x.actions_end(v); ++act)
      if (action_on[act]) out[k].actions.push_back(act);
  }
  return out;
}

}  // namespace detail

/// All maximal end components, ordered by their smallest node.
inline std::vector<Mec> mec_decomposition(const ExplicitMdp& x, std::size_t* rounds = nullptr) {
  std::vector<bool> node_on(x.num_nodes(), true), action_on(x.num_actions(), true);
  return detail::mecs_within(x, node_on, action_on, rounds);
}

// ---------------------------------------------------------------------------
// Qualitative oracles on the unfolding. Only supports are used.

struct OracleResult {
  // Minimal winning level per CMDP state, infinity if none.
  ValueVector levels;
  std::vector<bool> winning;
};

namespace detail {

struct Reverse {
  // For node w, explicit actions having w as a successor.
  std::vector<std::size_t> begin;
  std::vector<std::size_t> actions;
};

inline Reverse reverse_edges(const ExplicitMdp& x) {
  Reverse r;
  r.begin.assign(x.num_nodes() + 1, 0);
  for (std::size_t act = 0; act < x.num_actions(); ++act)
    for (auto w : x.successors(act)) ++r.begin[w + 1];
  for (std::size_t v = 0; v < x.num_nodes(); ++v) r.begin[v + 1] += r.begin[v];
  r.actions.resize(r.begin.back());
  auto fill = r.begin;
  for (std::size_t act = 0; act < x.num_actions(); ++act)
    for (auto w : x.successors(act)) r.actions[fill[w]++] = act;
  return r;
}

// Greatest set of nodes avoiding the sink forever; `safe_action` marks
// actions whose support stays inside it.
inline std::vector<bool> safe_region(const ExplicitMdp& x, const Reverse& rev, std::vector<bool>& safe_action) {
  const auto n = x.num_nodes();
  std::vector<bool> win(n, true);
  safe_action.assign(x.num_actions(), true);
  std::vector<std::size_t> good(n);
  for (std::size_t v = 0; v < n; ++v) good[v] = x.actions_end(v) - x.actions_begin(v);
  std::vector<std::size_t> queue{x.sink()};
  win[x.sink()] = false;
  while (!queue.empty()) {
    const auto w = queue.back();
    queue.pop_back();
    for (auto i = rev.begin[w]; i < rev.begin[w + 1]; ++i) {
      const auto act = rev.actions[i];
      if (!safe_action[act]) continue;
      safe_action[act] = false;
      const auto v = x.owner(act);
      if (win[v] && --good[v] == 0) {
        win[v] = false;
        queue.push_back(v);
      }
    }
  }
  return win;
}

// Nodes inside `region` that reach `goal` through actions in `allowed`
// whose owners lie in `region`, within `max_steps` steps if given.
inline std::vector<bool> backward_reach(const ExplicitMdp& x, const Reverse& rev, const std::vector<bool>& region,
                                        const std::vector<bool>& allowed, const std::vector<bool>& goal,
                                        std::optional<std::size_t> max_steps = std::nullopt) {
  std::vector<bool> in(x.num_nodes(), false);
  std::vector<std::size_t> frontier;
  for (std::size_t v = 0; v < x.num_nodes(); ++v) {
    if (region[v] && goal[v]) {
      in[v] = true;
      frontier.push_back(v);
    }
  }
  for (std::size_t step = 0; !frontier.empty() && (!max_steps || step < *max_steps); ++step) {
    std::vector<std::size_t> next;
    for (auto w : frontier) {
      for (auto i = rev.begin[w]; i < rev.begin[w + 1]; ++i) {
        const auto act = rev.actions[i];
        const auto v = x.owner(act);
        if (allowed[act] && region[v] && !in[v]) {
          in[v] = true;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return in;
}

inline std::vector<bool> lift_targets(const ExplicitMdp& x, const StateMask& targets) {
  std::vector<bool> goal(x.num_nodes(), false);
  for (std::size_t v = 0; v + 1 < x.num_nodes(); ++v) goal[v] = targets[x.state_of(v)];
  return goal;
}

// Minimal winning level per state. Winning sets must be upward closed in the
// level and independent of it at reload states.
inline OracleResult summarize(const ExplicitMdp& x, std::vector<bool> winning) {
  OracleResult out{ValueVector(x.num_states(), kInfinity), std::move(winning)};
  for (StateId s = 0; s < x.num_states(); ++s) {
    bool seen = false;
    for (std::uint64_t e = 0; e <= x.capacity(); ++e) {
      const bool w = out.winning[x.node(s, e)];
      if (seen && !w) throw std::logic_error("oracle: winning set not monotone in the level");
      if (w && !seen) {
        seen = true;
        out.levels[s] = ExtNat(e);
      }
    }
    if (x.model().is_reload(s) && out.levels[s].is_finite() && out.levels[s] != ExtNat(0))
      throw std::logic_error("oracle: reload state winning status depends on the level");
  }
  return out;
}

}  // namespace detail

/// Minimal level from which the sink can be avoided forever.
inline OracleResult safety_levels_oracle(const ExplicitMdp& x) {
  const auto rev = detail::reverse_edges(x);
  std::vector<bool> safe_action;
  return detail::summarize(x, detail::safe_region(x, rev, safe_action));
}

/// Minimal level from which a sink-avoiding strategy has a path into T
/// (within `max_steps` steps, if given).
inline OracleResult positive_reach_oracle(const ExplicitMdp& x, const StateMask& targets,
                                          std::optional<std::size_t> max_steps = std::nullopt) {
  const auto rev = detail::reverse_edges(x);
  std::vector<bool> safe_action;
  const auto region = detail::safe_region(x, rev, safe_action);
  return detail::summarize(x, detail::backward_reach(x, rev, region, safe_action, detail::lift_targets(x, targets), max_steps));
}

/// Minimal level from which T can be visited infinitely often with
/// probability 1 without ever reaching the sink: safety combined with
/// almost-sure reachability of end components that contain a target.
inline OracleResult almost_sure_buchi_oracle(const ExplicitMdp& x, const StateMask& targets) {
  const auto rev = detail::reverse_edges(x);
  std::vector<bool> safe_action;
  const auto region = detail::safe_region(x, rev, safe_action);

  auto node_on = region;
  auto action_on = safe_action;
  const auto target_nodes = detail::lift_targets(x, targets);
  std::vector<bool> goal(x.num_nodes(), false);
  for (const auto& mec : detail::mecs_within(x, node_on, action_on)) {
    bool accepting = false;
    for (auto v : mec.nodes) accepting = accepting || target_nodes[v];
    if (accepting)
      for (auto v : mec.nodes) goal[v] = true;
  }

  auto z = region;
  for (;;) {
    std::vector<bool> allowed(x.num_actions(), false);
    for (std::size_t act = 0; act < x.num_actions(); ++act) {
      if (!safe_action[act] || !z[x.owner(act)]) continue;
      bool inside = true;
      for (auto w : x.successors(act)) inside = inside && z[w];
      allowed[act] = inside;
    }
    auto y = detail::backward_reach(x, rev, z, allowed, goal);
    if (y == z) break;
    z = std::move(y);
  }
  return detail::summarize(x, std::move(z));
}

}  // namespace cmdp
