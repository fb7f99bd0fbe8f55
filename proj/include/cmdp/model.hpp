#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cmdp/error.hpp"
#include "cmdp/ext_nat.hpp"
#include "cmdp/graph.hpp"

namespace cmdp {

using StateId = std::size_t;
using ActionId = std::size_t;

// Per-state membership flags, indexed by StateId.
using StateMask = std::vector<bool>;

struct Transition {
  StateId target;
  double prob;
};

// An action available in one state. `label` indexes Cmdp::action_names().
struct ActionEntry {
  ActionId label;
  std::uint64_t consumption;
  std::vector<Transition> successors;
};

// Resource level: nullopt is the exhausted level (bottom).
using Level = std::optional<std::uint64_t>;

inline constexpr std::nullopt_t kExhausted = std::nullopt;

/// A consumption MDP.
///
/// States and action labels keep their declaration order, and every
/// iteration or argmin in the library follows that order. Only the actions
/// available in a state are stored. The transition structure is shared
/// between copies, so changing the reload set (see restrict_reloads) is cheap.
class Cmdp {
 public:
  struct Structure {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    // available[s] sorted by label.
    std::vector<std::vector<ActionEntry>> available;
    std::unordered_map<std::string, StateId> index;
    std::unordered_map<std::string, ActionId> action_index;
  };

  Cmdp(std::vector<std::string> state_names, std::vector<std::string> action_names,
       std::vector<std::vector<ActionEntry>> available, StateMask reload, std::uint64_t capacity)
      : reload_(std::move(reload)), capacity_(capacity) {
    auto s = std::make_shared<Structure>();
    s->state_names = std::move(state_names);
    s->action_names = std::move(action_names);
    s->available = std::move(available);
    const auto n = s->state_names.size();
    if (s->available.size() != n || reload_.size() != n)
      throw ModelError("Cmdp: per-state tables disagree with the number of states");
    for (auto& acts : s->available) {
      std::stable_sort(acts.begin(), acts.end(),
                       [](const ActionEntry& a, const ActionEntry& b) { return a.label < b.label; });
      for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts[i].label >= s->action_names.size())
          throw ModelError("Cmdp: action label index out of range");
        if (i > 0 && acts[i].label == acts[i - 1].label)
          throw ModelError("Cmdp: duplicate action '" + s->action_names[acts[i].label] + "'");
        for (const auto& t : acts[i].successors)
          if (t.target >= n) throw ModelError("Cmdp: successor index out of range");
      }
    }
    for (std::size_t i = 0; i < n; ++i) s->index.emplace(s->state_names[i], i);
    for (std::size_t i = 0; i < s->action_names.size(); ++i) s->action_index.emplace(s->action_names[i], i);
    structure_ = std::move(s);
  }

  std::size_t num_states() const { return structure_->state_names.size(); }
  std::size_t num_actions() const { return structure_->action_names.size(); }
  std::uint64_t capacity() const { return capacity_; }

  const std::string& state_name(StateId s) const { return structure_->state_names[s]; }
  const std::string& action_name(ActionId a) const { return structure_->action_names[a]; }
  std::span<const std::string> state_names() const { return structure_->state_names; }
  std::span<const std::string> action_names() const { return structure_->action_names; }

  std::optional<StateId> find_state(std::string_view name) const {
    auto it = structure_->index.find(std::string(name));
    if (it == structure_->index.end()) return std::nullopt;
    return it->second;
  }

  std::optional<ActionId> find_action_label(std::string_view name) const {
    auto it = structure_->action_index.find(std::string(name));
    if (it == structure_->action_index.end()) return std::nullopt;
    return it->second;
  }

  StateId state(std::string_view name) const {
    if (auto s = find_state(name)) return *s;
    throw ModelError("unknown state '" + std::string(name) + "'");
  }

  ActionId action_label(std::string_view name) const {
    if (auto a = find_action_label(name)) return *a;
    throw ModelError("unknown action '" + std::string(name) + "'");
  }

  std::span<const ActionEntry> actions_at(StateId s) const { return structure_->available[s]; }

  // nullptr when `label` is not available in `s`.
  const ActionEntry* find_action(StateId s, ActionId label) const {
    for (const auto& e : structure_->available[s])
      if (e.label == label) return &e;
    return nullptr;
  }

  const ActionEntry& action(StateId s, ActionId label) const {
    if (const auto* e = find_action(s, label)) return *e;
    throw ModelError("action '" + action_name(label) + "' is not available in state '" + state_name(s) + "'");
  }

  bool is_reload(StateId s) const { return reload_[s]; }
  const StateMask& reload_mask() const { return reload_; }

  std::size_t num_reloads() const {
    return static_cast<std::size_t>(std::count(reload_.begin(), reload_.end(), true));
  }

  // Same transition structure with a different reload set; no subset check.
  Cmdp with_reloads(StateMask reload) const {
    if (reload.size() != num_states()) throw ModelError("reload mask has wrong size");
    Cmdp copy = *this;
    copy.reload_ = std::move(reload);
    return copy;
  }

  Cmdp with_capacity(std::uint64_t capacity) const {
    Cmdp copy = *this;
    copy.capacity_ = capacity;
    return copy;
  }

  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& acts : structure_->available)
      for (const auto& a : acts) n += a.successors.size();
    return n;
  }

 private:
  std::shared_ptr<const Structure> structure_;
  StateMask reload_;
  std::uint64_t capacity_;
};

// Incremental construction by name. States and labels are numbered in order
// of first mention.
class CmdpBuilder {
 public:
  explicit CmdpBuilder(std::uint64_t capacity = 0) : capacity_(capacity) {}

  void set_capacity(std::uint64_t capacity) { capacity_ = capacity; }

  StateId add_state(const std::string& name) {
    auto [it, inserted] = states_.emplace(name, state_names_.size());
    if (inserted) {
      state_names_.push_back(name);
      available_.emplace_back();
      reload_.push_back(false);
    }
    return it->second;
  }

  bool has_state(const std::string& name) const { return states_.contains(name); }

  ActionId add_label(const std::string& name) {
    auto [it, inserted] = labels_.emplace(name, action_names_.size());
    if (inserted) action_names_.push_back(name);
    return it->second;
  }

  void set_reload(StateId s, bool reload = true) { reload_.at(s) = reload; }

  CmdpBuilder& add_action(StateId source, const std::string& label, std::uint64_t consumption,
                          std::vector<Transition> successors) {
    const auto id = add_label(label);
    for (const auto& e : available_.at(source))
      if (e.label == id)
        throw ModelError("duplicate action '" + label + "' in state '" + state_names_[source] + "'");
    available_[source].push_back(ActionEntry{id, consumption, std::move(successors)});
    return *this;
  }

  CmdpBuilder& add_action(const std::string& source, const std::string& label, std::uint64_t consumption,
                          const std::vector<std::pair<std::string, double>>& successors) {
    const auto s = add_state(source);
    std::vector<Transition> ts;
    for (const auto& [name, p] : successors) ts.push_back({add_state(name), p});
    return add_action(s, label, consumption, std::move(ts));
  }

  std::size_t num_states() const { return state_names_.size(); }

  Cmdp build() const { return Cmdp(state_names_, action_names_, available_, reload_, capacity_); }

 private:
  std::uint64_t capacity_;
  std::vector<std::string> state_names_;
  std::vector<std::string> action_names_;
  std::vector<std::vector<ActionEntry>> available_;
  StateMask reload_;
  std::unordered_map<std::string, StateId> states_;
  std::unordered_map<std::string, ActionId> labels_;
};

inline StateMask make_mask(const Cmdp& m, std::span<const StateId> states) {
  StateMask mask(m.num_states(), false);
  for (auto s : states) mask.at(s) = true;
  return mask;
}

inline StateMask make_mask(const Cmdp& m, std::initializer_list<std::string_view> names) {
  StateMask mask(m.num_states(), false);
  for (auto n : names) mask[m.state(n)] = true;
  return mask;
}

/// M(R'): the model with its reload set replaced by `subset`, which must
/// contain reload states only.
inline Cmdp restrict_reloads(const Cmdp& m, const StateMask& subset) {
  if (subset.size() != m.num_states()) throw ModelError("restrict_reloads: mask has wrong size");
  for (StateId s = 0; s < m.num_states(); ++s)
    if (subset[s] && !m.is_reload(s))
      throw ModelError("restrict_reloads: '" + m.state_name(s) + "' is not a reload state");
  return m.with_reloads(subset);
}

// ---------------------------------------------------------------------------
// Histories and resource levels

/// Finite path s1 a1 s2 ... sn; `actions` holds action labels and is one
/// shorter than `states`.
struct History {
  std::vector<StateId> states;
  std::vector<ActionId> actions;

  static History single(StateId s) { return History{{s}, {}}; }

  std::size_t length() const { return actions.size(); }
  StateId first() const { return states.front(); }
  StateId last() const { return states.back(); }

  History& append(ActionId a, StateId t) {
    actions.push_back(a);
    states.push_back(t);
    return *this;
  }

  // Prefix with `steps` actions.
  History prefix(std::size_t steps) const {
    return History{{states.begin(), states.begin() + static_cast<std::ptrdiff_t>(steps) + 1},
                   {actions.begin(), actions.begin() + static_cast<std::ptrdiff_t>(steps)}};
  }

  // Suffix starting at state index i.
  History suffix(std::size_t i) const {
    return History{{states.begin() + static_cast<std::ptrdiff_t>(i), states.end()},
                   {actions.begin() + static_cast<std::ptrdiff_t>(i), actions.end()}};
  }

  // this ⊙ other, requires last() == other.first().
  History join(const History& other) const {
    if (last() != other.first()) throw ModelError("History::join: endpoints do not match");
    History h = *this;
    h.states.insert(h.states.end(), other.states.begin() + 1, other.states.end());
    h.actions.insert(h.actions.end(), other.actions.begin(), other.actions.end());
    return h;
  }

  bool operator==(const History&) const = default;
};

inline bool is_valid(const Cmdp& m, const History& h) {
  if (h.states.empty() || h.states.size() != h.actions.size() + 1) return false;
  for (std::size_t i = 0; i < h.actions.size(); ++i) {
    const auto* e = m.find_action(h.states[i], h.actions[i]);
    if (e == nullptr) return false;
    bool found = false;
    for (const auto& t : e->successors) found = found || t.target == h.states[i + 1];
    if (!found) return false;
  }
  return true;
}

/// One step of the level dynamics: leaving a reload state resets the level to
/// cap - C, leaving any other state deducts C; bottom is absorbing.
inline Level step_level(const Cmdp& m, Level level, StateId s, std::uint64_t consumption) {
  if (!level) return kExhausted;
  if (m.is_reload(s)) {
    if (consumption <= m.capacity()) return m.capacity() - consumption;
    return kExhausted;
  }
  if (consumption <= *level) return *level - consumption;
  return kExhausted;
}

/// Resource level after `h` with initial load `d`.
inline Level energy_level(const Cmdp& m, const History& h, std::uint64_t d) {
  if (d > m.capacity()) throw ModelError("initial load exceeds capacity");
  if (!is_valid(m, h)) throw ModelError("history is not a path of the model");
  Level level = d;
  for (std::size_t i = 0; i < h.actions.size(); ++i)
    level = step_level(m, level, h.states[i], m.action(h.states[i], h.actions[i]).consumption);
  return level;
}

/// Sum of step consumptions along `h`, ignoring reloads.
inline ExtNat consumption(const Cmdp& m, const History& h) {
  ExtNat total(0);
  for (std::size_t i = 0; i < h.actions.size(); ++i)
    total = total + ExtNat(m.action(h.states[i], h.actions[i]).consumption);
  return total;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string rule;
  std::optional<StateId> state;
  std::optional<ActionId> action;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

inline constexpr double kProbabilityTolerance = 1e-9;

/// Checks distributions, action availability and the decreasing property.
/// An empty report means the model is well formed.
inline ValidationReport validate(const Cmdp& m) {
  ValidationReport report;
  const auto n = m.num_states();
  for (StateId s = 0; s < n; ++s) {
    const auto acts = m.actions_at(s);
    if (acts.empty())
      report.push_back({"no actions", s, std::nullopt, "state '" + m.state_name(s) + "' has no available action"});
    for (const auto& a : acts) {
      const auto where = "'" + m.state_name(s) + "'/'" + m.action_name(a.label) + "'";
      if (a.successors.empty()) {
        report.push_back({"distribution sum", s, a.label, where + ": empty distribution"});
        continue;
      }
      double sum = 0.0;
      std::vector<bool> seen(n, false);
      for (const auto& t : a.successors) {
        if (!(t.prob > 0.0) || !std::isfinite(t.prob))
          report.push_back({"probability", s, a.label,
                            where + ": probability of '" + m.state_name(t.target) + "' is not positive"});
        if (seen[t.target])
          report.push_back({"duplicate successor", s, a.label,
                            where + ": successor '" + m.state_name(t.target) + "' listed twice"});
        seen[t.target] = true;
        sum += t.prob;
      }
      if (std::abs(sum - 1.0) > kProbabilityTolerance)
        report.push_back({"distribution sum", s, a.label, where + ": probabilities sum to " + std::to_string(sum)});
    }
  }

  // Zero-consumption edges must not close a cycle.
  CsrGraph zero;
  std::vector<bool> self_loop(n, false);
  for (StateId s = 0; s < n; ++s) {
    std::vector<std::size_t> succ;
    for (const auto& a : m.actions_at(s)) {
      if (a.consumption != 0) continue;
      for (const auto& t : a.successors) {
        succ.push_back(t.target);
        if (t.target == s) self_loop[s] = true;
      }
    }
    zero.add_node(succ.begin(), succ.end());
  }
  const auto scc = strongly_connected_components(zero);
  std::vector<std::size_t> size(scc.count, 0);
  for (StateId s = 0; s < n; ++s) ++size[scc.component[s]];
  std::vector<bool> reported(scc.count, false);
  for (StateId s = 0; s < n; ++s) {
    const auto c = scc.component[s];
    if ((size[c] > 1 || self_loop[s]) && !reported[c]) {
      reported[c] = true;
      report.push_back({"not decreasing", s, std::nullopt,
                        "state '" + m.state_name(s) + "' lies on a cycle of zero consumption"});
    }
  }
  return report;
}

}  // namespace cmdp
