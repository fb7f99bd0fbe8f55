#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmdp/error.hpp"
#include "cmdp/model.hpp"
#include "cmdp/selector.hpp"

namespace cmdp {

using json = nlohmann::ordered_json;

/// A model document: the CMDP plus its optional default target set.
struct ModelFile {
  Cmdp model;
  StateMask targets;
};

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

inline std::uint64_t as_count(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ParseError(where + ": expected a non-negative integer");
}

inline const std::string& as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get_ref<const std::string&>();
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline json encode(ExtNat v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

inline ExtNat decode_ext_nat(const json& j, const std::string& where) {
  if (j.is_string() && j.get_ref<const std::string&>() == "inf") return kInfinity;
  return ExtNat(as_count(j, where));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CMDP documents

/// Parses {"capacity", "states", "reload", "targets"?, "actions": [...]}.
inline ModelFile parse_model(const std::string& text) {
  const auto doc = detail::parse_document(text);
  CmdpBuilder b(detail::as_count(detail::require(doc, "capacity", "$"), "$.capacity"));

  const auto& states = detail::require(doc, "states", "$");
  if (!states.is_array()) throw ParseError("$.states: expected an array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto where = "$.states[" + std::to_string(i) + "]";
    const auto& name = detail::as_string(states[i], where);
    if (b.has_state(name)) throw ParseError(where + ": duplicate state '" + name + "'");
    b.add_state(name);
  }
  auto lookup = [&](const json& j, const std::string& where) {
    const auto& name = detail::as_string(j, where);
    if (!b.has_state(name)) throw ParseError(where + ": unknown state '" + name + "'");
    return b.add_state(name);
  };

  const auto& reload = detail::require(doc, "reload", "$");
  if (!reload.is_array()) throw ParseError("$.reload: expected an array");
  for (std::size_t i = 0; i < reload.size(); ++i) b.set_reload(lookup(reload[i], "$.reload[" + std::to_string(i) + "]"));

  std::vector<StateId> targets;
  if (auto it = doc.find("targets"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("$.targets: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      targets.push_back(lookup((*it)[i], "$.targets[" + std::to_string(i) + "]"));
  }

  const auto& actions = detail::require(doc, "actions", "$");
  if (!actions.is_array()) throw ParseError("$.actions: expected an array");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto where = "$.actions[" + std::to_string(i) + "]";
    const auto& a = actions[i];
    const auto source = lookup(detail::require(a, "source", where), where + ".source");
    const auto& label = detail::as_string(detail::require(a, "label", where), where + ".label");
    const auto cons = detail::as_count(detail::require(a, "consumption", where), where + ".consumption");
    const auto& succ = detail::require(a, "successors", where);
    if (!succ.is_array()) throw ParseError(where + ".successors: expected an array");
    std::vector<Transition> ts;
    for (std::size_t k = 0; k < succ.size(); ++k) {
      const auto w = where + ".successors[" + std::to_string(k) + "]";
      const auto t = lookup(detail::require(succ[k], "state", w), w + ".state");
      const auto& p = detail::require(succ[k], "prob", w);
      if (!p.is_number()) throw ParseError(w + ".prob: expected a number");
      ts.push_back({t, p.get<double>()});
    }
    try {
      b.add_action(source, label, cons, std::move(ts));
    } catch (const ModelError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }

  auto model = b.build();
  auto mask = make_mask(model, targets);
  return ModelFile{std::move(model), std::move(mask)};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ModelFile load_model(const std::string& path) {
  try {
    return parse_model(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline json model_to_json(const Cmdp& m, const StateMask* targets = nullptr) {
  json doc;
  doc["capacity"] = m.capacity();
  doc["states"] = json::array();
  for (const auto& s : m.state_names()) doc["states"].push_back(s);
  doc["reload"] = json::array();
  for (StateId s = 0; s < m.num_states(); ++s)
    if (m.is_reload(s)) doc["reload"].push_back(m.state_name(s));
  if (targets) {
    doc["targets"] = json::array();
    for (StateId s = 0; s < m.num_states(); ++s)
      if ((*targets)[s]) doc["targets"].push_back(m.state_name(s));
  }
  doc["actions"] = json::array();
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const auto& a : m.actions_at(s)) {
      json entry;
      entry["source"] = m.state_name(s);
      entry["label"] = m.action_name(a.label);
      entry["consumption"] = a.consumption;
      entry["successors"] = json::array();
      for (const auto& t : a.successors) entry["successors"].push_back({{"state", m.state_name(t.target)}, {"prob", t.prob}});
      doc["actions"].push_back(std::move(entry));
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Value vectors: {"state": n | "inf", ...} in state order

inline json values_to_json(const Cmdp& m, const ValueVector& v) {
  json doc = json::object();
  for (StateId s = 0; s < m.num_states(); ++s) doc[m.state_name(s)] = detail::encode(v[s]);
  return doc;
}

// ---------------------------------------------------------------------------
// Strategy documents:
//   {"initial": {state: n | "inf"}, "selector": {state: [{"threshold", "action"}, ...]}}

inline json strategy_to_json(const Cmdp& m, const CounterSelector& sel) {
  json doc;
  doc["initial"] = json::object();
  doc["selector"] = json::object();
  for (StateId s = 0; s < sel.num_states(); ++s) doc["initial"][m.state_name(s)] = detail::encode(sel.initial[s]);
  for (StateId s = 0; s < sel.num_states(); ++s) {
    if (sel.rules[s].empty()) continue;
    json rule = json::array();
    for (const auto& [threshold, action] : sel.rules[s])
      rule.push_back({{"threshold", threshold}, {"action", m.action_name(action)}});
    doc["selector"][m.state_name(s)] = std::move(rule);
  }
  return doc;
}

inline std::string export_strategy(const Cmdp& m, const CounterSelector& sel) {
  return strategy_to_json(m, sel).dump(2) + "\n";
}

/// Parses a strategy document against `m`. States missing from "initial"
/// get an infinite initial load.
inline CounterSelector import_strategy(const Cmdp& m, const std::string& text) {
  const auto doc = detail::parse_document(text);
  CounterSelector sel(m.num_states());
  auto state_of = [&](const std::string& name, const std::string& where) {
    if (auto s = m.find_state(name)) return *s;
    throw ParseError(where + ": unknown state '" + name + "'");
  };

  const auto& initial = detail::require(doc, "initial", "$");
  if (!initial.is_object()) throw ParseError("$.initial: expected an object");
  for (const auto& [name, value] : initial.items()) {
    const auto where = "$.initial." + name;
    const auto v = detail::decode_ext_nat(value, where);
    if (v.is_finite() && v.value() > m.capacity()) throw ParseError(where + ": initial load exceeds capacity");
    sel.initial[state_of(name, where)] = v;
  }

  const auto& selector = detail::require(doc, "selector", "$");
  if (!selector.is_object()) throw ParseError("$.selector: expected an object");
  for (const auto& [name, rule] : selector.items()) {
    const auto where = "$.selector." + name;
    const auto s = state_of(name, where);
    if (!rule.is_array()) throw ParseError(where + ": expected an array");
    std::optional<std::uint64_t> previous;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto w = where + "[" + std::to_string(i) + "]";
      const auto threshold = detail::as_count(detail::require(rule[i], "threshold", w), w + ".threshold");
      if (threshold > m.capacity()) throw ParseError(w + ".threshold: exceeds capacity");
      if (previous && threshold <= *previous) throw ParseError(w + ".threshold: thresholds must increase");
      previous = threshold;
      const auto& label = detail::as_string(detail::require(rule[i], "action", w), w + ".action");
      const auto a = m.find_action_label(label);
      if (!a || m.find_action(s, *a) == nullptr)
        throw ParseError(w + ".action: '" + label + "' is not available in '" + name + "'");
      sel.rules[s][threshold] = *a;
    }
  }
  return sel;
}

}  // namespace cmdp
