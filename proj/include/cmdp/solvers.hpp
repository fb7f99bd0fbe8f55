#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cmdp/error.hpp"
#include "cmdp/ext_nat.hpp"
#include "cmdp/model.hpp"
#include "cmdp/selector.hpp"

namespace cmdp {

/// How safety requirements of successor states are read.
///
/// `truncated` treats a reload state with a finite safe value as requiring
/// level 0 on arrival (the level is reset when the state is left). `literal`
/// uses the safe vector as computed, including at reload states.
enum class Semantics { truncated, literal };

// Called with (iteration, current vector); iteration 0 is the initial vector.
using IterationObserver = std::function<void(std::size_t, const ValueVector&)>;

struct FixpointResult {
  ValueVector values;
  // Number of operator applications that changed the vector.
  std::size_t iterations = 0;
};

namespace detail {

inline ExtNat max_over_successors(const ActionEntry& a, const ValueVector& v) {
  ExtNat worst(0);
  for (const auto& t : a.successors) worst = std::max(worst, v[t.target]);
  return worst;
}

inline void check_bound(std::size_t iterations, std::size_t bound, const char* what) {
  if (iterations > bound)
    throw IterationBoundError(std::string(what) + ": " + std::to_string(iterations) +
                              " iterations exceed the bound " + std::to_string(bound));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Minimum cost reachability

inline ValueVector reach_initial_vector(const StateMask& targets) {
  ValueVector x(targets.size(), kInfinity);
  for (std::size_t s = 0; s < targets.size(); ++s)
    if (targets[s]) x[s] = ExtNat(0);
  return x;
}

/// One application of the Bellman-style operator for worst-case reachability
/// cost: targets are 0, other states take the cheapest action against the
/// most expensive successor.
inline ValueVector apply_min_reach_operator(const Cmdp& m, const StateMask& targets, const ValueVector& v) {
  ValueVector out(m.num_states(), kInfinity);
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (targets[s]) {
      out[s] = ExtNat(0);
      continue;
    }
    for (const auto& a : m.actions_at(s))
      out[s] = std::min(out[s], ExtNat(a.consumption) + detail::max_over_successors(a, v));
  }
  return out;
}

/// MinReach: the minimal consumption with which T can be reached surely.
inline FixpointResult min_reach(const Cmdp& m, const StateMask& targets, const IterationObserver& observer = {}) {
  FixpointResult r{reach_initial_vector(targets), 0};
  if (observer) observer(0, r.values);
  for (;;) {
    auto next = apply_min_reach_operator(m, targets, r.values);
    if (next == r.values) break;
    detail::check_bound(++r.iterations, m.num_states(), "min_reach");
    r.values = std::move(next);
    if (observer) observer(r.iterations, r.values);
  }
  return r;
}

/// Memoryless optimal strategy for MinReach built by ranking: targets get
/// rank 0, and a state gets the next rank once one of its good actions has
/// all successors ranked. Ranked states play the action that ranked them;
/// everything else plays its first available action.
inline std::vector<ActionId> min_reach_strategy(const Cmdp& m, const StateMask& targets, const ValueVector& values) {
  constexpr auto unranked = std::numeric_limits<std::size_t>::max();
  const auto n = m.num_states();
  std::vector<std::size_t> rank(n, unranked);
  std::vector<ActionId> choice(n);
  for (StateId s = 0; s < n; ++s) {
    choice[s] = m.actions_at(s).empty() ? 0 : m.actions_at(s).front().label;
    if (targets[s]) rank[s] = 0;
  }
  for (std::size_t level = 1;; ++level) {
    std::vector<std::pair<StateId, ActionId>> fresh;
    for (StateId s = 0; s < n; ++s) {
      if (rank[s] != unranked || values[s].is_infinite()) continue;
      for (const auto& a : m.actions_at(s)) {
        const bool good = ExtNat(a.consumption) + detail::max_over_successors(a, values) <= values[s];
        const bool progressing = std::all_of(a.successors.begin(), a.successors.end(),
                                             [&](const Transition& t) { return rank[t.target] != unranked; });
        if (good && progressing) {
          fresh.emplace_back(s, a.label);
          break;
        }
      }
    }
    if (fresh.empty()) break;
    for (auto [s, a] : fresh) {
      rank[s] = level;
      choice[s] = a;
    }
  }
  return choice;
}

/// The model with a non-reloading copy of every state appended. Copy of
/// state s has index n + s and the same actions as s.
inline Cmdp duplicate_model(const Cmdp& m) {
  const auto n = m.num_states();
  std::vector<std::string> names(m.state_names().begin(), m.state_names().end());
  std::vector<std::vector<ActionEntry>> available;
  available.reserve(2 * n);
  for (StateId s = 0; s < n; ++s) available.emplace_back(m.actions_at(s).begin(), m.actions_at(s).end());
  for (StateId s = 0; s < n; ++s) {
    names.push_back(m.state_name(s) + "~");
    available.emplace_back(m.actions_at(s).begin(), m.actions_at(s).end());
  }
  StateMask reload = m.reload_mask();
  reload.resize(2 * n, false);
  return Cmdp(std::move(names), {m.action_names().begin(), m.action_names().end()}, std::move(available),
              std::move(reload), m.capacity());
}

/// MinReach+ (reach T in at least one step) via MinReach on the duplicated
/// model, read at the copies.
inline ValueVector min_reach_plus_oracle(const Cmdp& m, const StateMask& targets) {
  const auto n = m.num_states();
  const auto dup = duplicate_model(m);
  StateMask dup_targets = targets;
  dup_targets.resize(2 * n, false);
  const auto all = min_reach(dup, dup_targets).values;
  return {all.begin() + static_cast<std::ptrdiff_t>(n), all.end()};
}

// ---------------------------------------------------------------------------
// Minimal initial consumption and safety

// One-sided truncation: 0 at reload states.
inline ValueVector reload_truncate(const Cmdp& m, ValueVector v) {
  for (StateId s = 0; s < m.num_states(); ++s)
    if (m.is_reload(s)) v[s] = ExtNat(0);
  return v;
}

/// The truncated operator whose fixpoint from all-infinity is MinInitCons.
inline ValueVector apply_min_init_cons_operator(const Cmdp& m, const ValueVector& v) {
  const auto truncated = reload_truncate(m, v);
  ValueVector out(m.num_states(), kInfinity);
  for (StateId s = 0; s < m.num_states(); ++s)
    for (const auto& a : m.actions_at(s))
      out[s] = std::min(out[s], ExtNat(a.consumption) + detail::max_over_successors(a, truncated));
  return out;
}

/// MinInitCons: minimal load that surely reaches a reload state in at least
/// one step. Jacobi iteration from the all-infinity vector.
inline FixpointResult min_init_cons(const Cmdp& m, const IterationObserver& observer = {}) {
  FixpointResult r{ValueVector(m.num_states(), kInfinity), 0};
  if (observer) observer(0, r.values);
  for (;;) {
    const auto c = apply_min_init_cons_operator(m, r.values);
    auto next = r.values;
    for (StateId s = 0; s < m.num_states(); ++s)
      if (c[s] < next[s]) next[s] = c[s];
    if (next == r.values) break;
    detail::check_bound(++r.iterations, m.num_states(), "min_init_cons");
    r.values = std::move(next);
    if (observer) observer(r.iterations, r.values);
  }
  return r;
}

struct SafeResult {
  ValueVector values;
  // Reload states that survived the pruning.
  StateMask reloads;
  // Rounds that removed at least one reload state.
  std::size_t outer_iterations = 0;
  std::size_t max_inner_iterations = 0;
};

/// Safe: the minimal initial load admitting a strategy that never exhausts
/// the resource. Reload states from which no reload state is reachable
/// within capacity are repeatedly demoted, recomputing MinInitCons each time.
inline SafeResult safe(const Cmdp& m) {
  SafeResult out;
  out.reloads = m.reload_mask();
  const auto cap = m.capacity();
  ValueVector mic;
  for (;;) {
    const auto restricted = m.with_reloads(out.reloads);
    auto inner = min_init_cons(restricted);
    out.max_inner_iterations = std::max(out.max_inner_iterations, inner.iterations);
    mic = std::move(inner.values);
    bool removed = false;
    for (StateId r = 0; r < m.num_states(); ++r) {
      if (out.reloads[r] && mic[r] > cap) {
        out.reloads[r] = false;
        removed = true;
      }
    }
    if (!removed) break;
    detail::check_bound(++out.outer_iterations, m.num_reloads(), "safe");
  }
  out.values = std::move(mic);
  for (auto& v : out.values)
    if (v > cap) v = kInfinity;
  return out;
}

/// Load a successor must arrive with to stay safe.
inline ExtNat safe_requirement(const Cmdp& m, const ValueVector& safe_values, StateId t, Semantics mode) {
  if (mode == Semantics::truncated && m.is_reload(t) && safe_values[t].is_finite()) return ExtNat(0);
  return safe_values[t];
}

inline bool is_safe_action(const Cmdp& m, const ValueVector& safe_values, StateId s, const ActionEntry& a,
                           Semantics mode) {
  if (safe_values[s].is_infinite()) return true;
  ExtNat need(a.consumption);
  for (const auto& t : a.successors) need = std::max(need, ExtNat(a.consumption) + safe_requirement(m, safe_values, t.target, mode));
  if (m.is_reload(s)) return need <= m.capacity();
  return need <= safe_values[s];
}

/// Actions that keep the resource safe from `s`; all actions when Safe(s) is
/// infinite.
inline std::vector<ActionId> safe_actions(const Cmdp& m, const ValueVector& safe_values, StateId s, Semantics mode) {
  std::vector<ActionId> out;
  for (const auto& a : m.actions_at(s))
    if (is_safe_action(m, safe_values, s, a, mode)) out.push_back(a.label);
  return out;
}

struct SafeSelector {
  CounterSelector selector;
  // States with finite Safe but no safe action (possible in literal mode).
  std::vector<StateId> states_without_safe_action;
};

/// Memoryless safe strategy as a counter selector: one rule per state with
/// finite Safe, mapping its safety threshold to the first safe action.
inline SafeSelector safe_selector(const Cmdp& m, const ValueVector& safe_values, Semantics mode) {
  SafeSelector out{CounterSelector(m.num_states()), {}};
  out.selector.initial = safe_values;
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (safe_values[s].is_infinite()) continue;
    const auto acts = safe_actions(m, safe_values, s, mode);
    if (acts.empty()) {
      out.states_without_safe_action.push_back(s);
      continue;
    }
    out.selector.rules[s][safe_requirement(m, safe_values, s, mode).value()] = acts.front();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Safe positive reachability

/// Minimal load needed to play `a` in `s`, hit some successor t with at least
/// x(t), and survive every other outcome.
inline ExtNat spr_value(const Cmdp& m, StateId s, const ActionEntry& a, const ValueVector& x,
                        const ValueVector& safe_values, Semantics mode) {
  // Largest and second largest safety requirement among the successors.
  ExtNat top(0), second(0);
  std::size_t top_index = 0;
  for (std::size_t i = 0; i < a.successors.size(); ++i) {
    const auto req = safe_requirement(m, safe_values, a.successors[i].target, mode);
    if (i == 0 || req > top) {
      second = i == 0 ? ExtNat(0) : top;
      top = req;
      top_index = i;
    } else if (req > second) {
      second = req;
    }
  }
  (void)s;
  ExtNat best = kInfinity;
  for (std::size_t i = 0; i < a.successors.size(); ++i) {
    const auto others = a.successors.size() == 1 ? ExtNat(0) : (i == top_index ? second : top);
    best = std::min(best, std::max(x[a.successors[i].target], others));
  }
  return ExtNat(a.consumption) + best;
}

inline ExtNat spr_value(const Cmdp& m, StateId s, ActionId a, const ValueVector& x, const ValueVector& safe_values,
                        Semantics mode) {
  return spr_value(m, s, m.action(s, a), x, safe_values, mode);
}

// Two-sided truncation: infinity above capacity, 0 at reload states otherwise.
inline ValueVector capacity_truncate(const Cmdp& m, ValueVector v) {
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (v[s] > m.capacity())
      v[s] = kInfinity;
    else if (m.is_reload(s))
      v[s] = ExtNat(0);
  }
  return v;
}

/// y_T: Safe at targets, infinity elsewhere. Truncated mode also truncates
/// it, so reload targets start at 0 like every later iterate.
inline ValueVector positive_reach_initial_vector(const Cmdp& m, const StateMask& targets,
                                                 const ValueVector& safe_values, Semantics mode) {
  ValueVector r(targets.size(), kInfinity);
  for (StateId t = 0; t < targets.size(); ++t)
    if (targets[t]) r[t] = safe_values[t];
  return mode == Semantics::truncated ? capacity_truncate(m, std::move(r)) : r;
}

/// One application of the truncated safe-positive-reachability operator.
/// `argmin`, when given, receives the minimizing action per non-target state.
inline ValueVector apply_positive_reach_operator(const Cmdp& m, const StateMask& targets,
                                                 const ValueVector& safe_values, const ValueVector& r,
                                                 Semantics mode, std::vector<ActionId>* argmin = nullptr) {
  ValueVector out(m.num_states(), kInfinity);
  if (argmin) argmin->assign(m.num_states(), 0);
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (targets[s]) {
      out[s] = safe_values[s];
      continue;
    }
    bool first = true;
    for (const auto& a : m.actions_at(s)) {
      const auto v = spr_value(m, s, a, r, safe_values, mode);
      if (first || v < out[s]) {
        out[s] = v;
        if (argmin) (*argmin)[s] = a.label;
      }
      first = false;
    }
  }
  return capacity_truncate(m, std::move(out));
}

struct PositiveReachResult {
  ValueVector values;
  CounterSelector selector;
  std::size_t iterations = 0;
  ValueVector safe_values;
  std::vector<StateId> states_without_safe_action;
};

// K = |R| + (|R|+1)(|S|-|R|+1)
inline std::size_t positive_reach_bound(const Cmdp& m) {
  const auto s = m.num_states();
  const auto r = m.num_reloads();
  return r + (r + 1) * (s - r + 1);
}

namespace detail {

// The iterate stays above the safety requirement: at non-reload states
// r >= Safe, at reload states r is 0 only where Safe is finite.
inline void check_above_safe(const Cmdp& m, const ValueVector& r, const ValueVector& safe_values) {
  for (StateId s = 0; s < m.num_states(); ++s) {
    const bool ok = m.is_reload(s) ? (r[s].is_infinite() || safe_values[s].is_finite()) : r[s] >= safe_values[s];
    if (!ok) throw std::logic_error("positive_reachability: iterate dropped below Safe at '" + m.state_name(s) + "'");
  }
}

}  // namespace detail

/// Safe positive reachability with a witness counter selector, given the
/// Safe vector of `m`.
inline PositiveReachResult positive_reachability(const Cmdp& m, const StateMask& targets,
                                                 const ValueVector& safe_values, Semantics mode,
                                                 const IterationObserver& observer = {}) {
  auto seeds = safe_selector(m, safe_values, mode);
  PositiveReachResult out;
  out.selector = std::move(seeds.selector);
  out.states_without_safe_action = std::move(seeds.states_without_safe_action);
  out.safe_values = safe_values;

  auto r = positive_reach_initial_vector(m, targets, safe_values, mode);
  if (observer) observer(0, r);
  const auto bound = positive_reach_bound(m);
  std::vector<ActionId> argmin;
  for (;;) {
    auto next = apply_positive_reach_operator(m, targets, safe_values, r, mode, &argmin);
    if (next == r) break;
    detail::check_bound(++out.iterations, bound, "positive_reachability");
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (next[s] > r[s]) throw std::logic_error("positive_reachability: iterate increased");
      if (!targets[s] && next[s] < r[s]) out.selector.rules[s][next[s].value()] = argmin[s];
    }
    detail::check_above_safe(m, next, safe_values);
    r = std::move(next);
    if (observer) observer(out.iterations, r);
  }
  out.values = r;
  out.selector.initial = std::move(r);
  return out;
}

inline PositiveReachResult positive_reachability(const Cmdp& m, const StateMask& targets, Semantics mode,
                                                 const IterationObserver& observer = {}) {
  return positive_reachability(m, targets, safe(m).values, mode, observer);
}

// ---------------------------------------------------------------------------
// Almost-sure Büchi

struct BuchiResult {
  ValueVector values;
  CounterSelector selector;
  StateMask reloads;
  std::size_t outer_iterations = 0;
  std::size_t max_inner_iterations = 0;
  std::size_t total_inner_iterations = 0;
  std::vector<StateId> states_without_safe_action;
};

/// Minimal loads for visiting T infinitely often with probability 1 while
/// never exhausting the resource, with the witness selector. Reload states
/// from which T cannot be reached positively within capacity are demoted
/// until stable.
inline BuchiResult buchi(const Cmdp& m, const StateMask& targets, Semantics mode = Semantics::truncated) {
  BuchiResult out;
  out.reloads = m.reload_mask();
  for (;;) {
    const auto restricted = m.with_reloads(out.reloads);
    auto pr = positive_reachability(restricted, targets, mode);
    out.max_inner_iterations = std::max(out.max_inner_iterations, pr.iterations);
    out.total_inner_iterations += pr.iterations;
    bool removed = false;
    for (StateId r = 0; r < m.num_states(); ++r) {
      if (out.reloads[r] && pr.values[r] > m.capacity()) {
        out.reloads[r] = false;
        removed = true;
      }
    }
    if (!removed) {
      out.values = std::move(pr.values);
      out.selector = std::move(pr.selector);
      out.states_without_safe_action = std::move(pr.states_without_safe_action);
      break;
    }
    detail::check_bound(++out.outer_iterations, m.num_reloads(), "buchi");
  }
  return out;
}

struct Decision {
  bool satisfiable = false;
  // The Büchi selector with initial load d at the queried state.
  std::optional<CounterSelector> strategy;
};

/// Is there a strategy from `s` with initial load `d` that is safe and
/// visits T infinitely often almost surely?
inline Decision decide(const Cmdp& m, const StateMask& targets, StateId s, std::uint64_t d, Semantics mode = Semantics::truncated) {
  if (d > m.capacity()) throw ModelError("initial load exceeds capacity");
  auto res = buchi(m, targets, mode);
  Decision out;
  out.satisfiable = res.values[s] <= d;
  if (out.satisfiable) {
    res.selector.initial[s] = ExtNat(d);
    out.strategy = std::move(res.selector);
  }
  return out;
}

}  // namespace cmdp
