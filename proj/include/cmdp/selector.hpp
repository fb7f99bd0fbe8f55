#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cmdp/ext_nat.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

// Partial map from resource levels to actions. Lookup picks the entry with
// the largest threshold not above the current level.
using SelectionRule = std::map<std::uint64_t, ActionId>;

using ValueVector = std::vector<ExtNat>;

// A selection rule per state plus the initial-load vector. Together they
// describe a finite counter strategy.
struct CounterSelector {
  std::vector<SelectionRule> rules;
  ValueVector initial;

  CounterSelector() = default;
  explicit CounterSelector(std::size_t num_states) : rules(num_states), initial(num_states, kInfinity) {}

  std::size_t num_states() const { return rules.size(); }

  bool operator==(const CounterSelector&) const = default;
};

struct RuleChoice {
  ActionId action;
  // True when no threshold was at or below the level and the fallback was used.
  bool fallback;
};

inline RuleChoice rule_lookup(const SelectionRule& rule, std::uint64_t level, ActionId fallback) {
  auto it = rule.upper_bound(level);
  if (it == rule.begin()) return {fallback, true};
  return {std::prev(it)->second, false};
}

// The fixed action used when a rule has no applicable entry: the first
// action available in the state.
inline ActionId fallback_action(const Cmdp& m, StateId s) {
  const auto acts = m.actions_at(s);
  if (acts.empty()) throw ModelError("state '" + m.state_name(s) + "' has no available action");
  return acts.front().label;
}

inline RuleChoice select_action(const Cmdp& m, const CounterSelector& sel, StateId s, std::uint64_t level) {
  return rule_lookup(sel.rules.at(s), level, fallback_action(m, s));
}

/// Counter update after playing `a` in `s`. Mirrors the level dynamics.
inline Level memory_update(const Cmdp& m, Level level, StateId s, ActionId a) {
  return step_level(m, level, s, m.action(s, a).consumption);
}

}  // namespace cmdp
