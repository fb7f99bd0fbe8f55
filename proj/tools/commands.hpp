#pragma once

// Subcommand implementations. Each returns the process exit code:
// 0 success, 1 negative answer (decision "no", failed verification, invalid
// model), 2 input error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"

namespace cmdp::cli {

enum Exit : int { kOk = 0, kNo = 1, kInputError = 2 };

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline Objective parse_objective(const std::string& s) {
  if (s == "safe") return Objective::safe;
  if (s == "posreach") return Objective::positive_reach;
  if (s == "buchi") return Objective::buchi;
  throw ParseError("unknown objective '" + s + "'");
}

inline Semantics parse_semantics(const std::string& s) {
  if (s == "truncated") return Semantics::truncated;
  if (s == "literal") return Semantics::literal;
  throw ParseError("unknown semantics '" + s + "'");
}

// Comma-separated state names, or the model file's targets when empty.
inline StateMask resolve_targets(const ModelFile& f, const std::optional<std::string>& list) {
  if (!list) return f.targets;
  StateMask mask(f.model.num_states(), false);
  for (const auto& name : split_list(*list)) {
    const auto s = f.model.find_state(name);
    if (!s) throw ParseError("unknown target state '" + name + "'");
    mask[*s] = true;
  }
  return mask;
}

inline StateId resolve_state(const Cmdp& m, const std::string& name) {
  if (auto s = m.find_state(name)) return *s;
  throw ParseError("unknown state '" + name + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

// Loads a model and refuses it unless validation passes.
inline ModelFile load_valid_model(const std::string& path) {
  auto f = load_model(path);
  const auto report = validate(f.model);
  if (!report.empty()) throw ModelError(path + ": invalid model: " + report.front().message);
  return f;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const SizeLimitError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

// ---------------------------------------------------------------------------

inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_model(path);
    const auto report = validate(f.model);
    for (const auto& v : report) out << v.rule << ": " << v.message << '\n';
    if (report.empty()) out << "ok\n";
    return report.empty() ? kOk : kNo;
  });
}

struct SolveOptions {
  std::string model;
  std::string objective = "buchi";
  std::optional<std::string> targets;
  std::string semantics = "truncated";
  std::optional<std::string> state;
  std::optional<std::uint64_t> initial_load;
  std::optional<std::string> strategy_out;
};

struct Solution {
  ValueVector values;
  CounterSelector selector;
  std::vector<StateId> states_without_safe_action;
};

inline Solution solve(const Cmdp& m, const StateMask& targets, Objective objective, Semantics mode) {
  switch (objective) {
    case Objective::safe: {
      const auto sv = safe(m).values;
      auto seeds = safe_selector(m, sv, mode);
      return {sv, std::move(seeds.selector), std::move(seeds.states_without_safe_action)};
    }
    case Objective::positive_reach: {
      auto r = positive_reachability(m, targets, mode);
      return {std::move(r.values), std::move(r.selector), std::move(r.states_without_safe_action)};
    }
    case Objective::buchi: {
      auto r = buchi(m, targets, mode);
      return {std::move(r.values), std::move(r.selector), std::move(r.states_without_safe_action)};
    }
  }
  throw std::logic_error("unreachable");
}

inline int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_valid_model(o.model);
    const auto& m = f.model;
    const auto objective = parse_objective(o.objective);
    const auto mode = parse_semantics(o.semantics);
    const auto targets = resolve_targets(f, o.targets);
    if (o.state.has_value() != o.initial_load.has_value())
      throw ParseError("--state and --initial-load must be given together");
    std::optional<StateId> query;
    if (o.state) {
      query = resolve_state(m, *o.state);
      if (*o.initial_load > m.capacity()) throw ParseError("--initial-load exceeds capacity");
    }

    auto sol = solve(m, targets, objective, mode);
    for (auto s : sol.states_without_safe_action)
      err << "warning: no safe action in '" << m.state_name(s) << "' under " << o.semantics << " semantics\n";

    if (!query) {
      out << values_to_json(m, sol.values).dump() << '\n';
      if (o.strategy_out) write_text(*o.strategy_out, export_strategy(m, sol.selector));
      return kOk;
    }
    // Any finite requirement at a reload state is met by every initial load.
    const auto need = capacity_truncate(m, sol.values)[*query];
    const bool yes = need <= *o.initial_load;
    out << (yes ? "yes" : "no") << '\n';
    if (yes && o.strategy_out) {
      sol.selector.initial[*query] = ExtNat(*o.initial_load);
      write_text(*o.strategy_out, export_strategy(m, sol.selector));
    }
    return yes ? kOk : kNo;
  });
}

struct SimulateOptions {
  std::string model;
  std::string strategy;
  std::string state;
  std::optional<std::uint64_t> load;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
};

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_valid_model(o.model);
    const auto& m = f.model;
    const auto sel = import_strategy(m, read_file(o.strategy));
    const auto s0 = resolve_state(m, o.state);
    std::uint64_t d;
    if (o.load) {
      d = *o.load;
    } else {
      const auto init = sel.initial[s0];
      if (!(init <= m.capacity())) throw ParseError("no finite initial load for '" + o.state + "'; pass --load");
      d = init.value();
    }
    if (d > m.capacity()) throw ParseError("--load exceeds capacity");
    err << "seed: " << o.seed << '\n';
    const auto trace = simulate(m, sel, s0, d, o.steps, o.seed);
    json doc;
    doc["seed"] = o.seed;
    doc["termination"] = to_string(trace.termination);
    if (trace.underflow_step) doc["underflow_step"] = *trace.underflow_step;
    doc["steps"] = json::array();
    for (const auto& st : trace.steps) {
      json j;
      j["state"] = m.state_name(st.state);
      j["action"] = st.action ? json(m.action_name(*st.action)) : json(nullptr);
      j["level"] = st.level ? json(*st.level) : json(nullptr);
      doc["steps"].push_back(std::move(j));
    }
    out << doc.dump() << '\n';
    return kOk;
  });
}

struct VerifyOptions {
  std::string model;
  std::string strategy;
  std::string objective = "buchi";
  std::optional<std::string> targets;
};

/// Checks the objective on the induced chain from every state whose initial
/// load in the strategy is finite.
inline int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_valid_model(o.model);
    const auto& m = f.model;
    const auto sel = import_strategy(m, read_file(o.strategy));
    const auto objective = parse_objective(o.objective);
    const auto targets = resolve_targets(f, o.targets);
    bool all = true;
    std::size_t checked = 0;
    for (StateId s = 0; s < m.num_states(); ++s) {
      const auto d = sel.initial[s];
      if (!(d <= m.capacity())) continue;
      const auto chain = induced_chain(m, sel, s, d.value());
      auto verdict = verify(chain, targets, objective);
      if (verdict.holds && chain.any_fallback()) verdict = {false, "selector underflow"};
      out << m.state_name(s) << ' ' << d << ' ' << (verdict.holds ? "holds" : "fails") << " (" << verdict.reason << ")\n";
      all = all && verdict.holds;
      ++checked;
    }
    out << (all ? "verified " : "FAILED ") << to_string(objective) << " from " << checked << " states\n";
    return all ? kOk : kNo;
  });
}

struct UnfoldOptions {
  std::string model;
  std::optional<std::string> out;
  std::size_t node_limit = kDefaultNodeLimit;
};

inline int cmd_unfold(const UnfoldOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_valid_model(o.model);
    const auto text = explicit_to_json(unfold(f.model, o.node_limit)).dump(2) + "\n";
    if (o.out)
      write_text(*o.out, text);
    else
      out << text;
    return kOk;
  });
}

inline int cmd_mec(const std::string& path, std::size_t node_limit, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto f = load_valid_model(path);
    const auto x = unfold(f.model, node_limit);
    std::size_t rounds = 0;
    const auto mecs = mec_decomposition(x, &rounds);
    json doc;
    doc["nodes"] = x.num_nodes();
    doc["rounds"] = rounds;
    doc["mecs"] = json::array();
    for (const auto& mec : mecs) {
      json names = json::array();
      for (auto v : mec.nodes) names.push_back(x.node_name(v));
      doc["mecs"].push_back(std::move(names));
    }
    out << doc.dump() << '\n';
    return kOk;
  });
}

inline int emit_model(const ModelFile& f, const std::optional<std::string>& path, std::ostream& out) {
  const auto text = model_to_json(f.model, &f.targets).dump(2) + "\n";
  if (path)
    write_text(*path, text);
  else
    out << text;
  return kOk;
}

inline int cmd_gen_grid(const GridSpec& spec, const std::optional<std::string>& path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    err << "seed: " << spec.seed << '\n';
    return emit_model(gen_grid(spec), path, out);
  });
}

inline int cmd_gen_streets(const StreetSpec& spec, const std::optional<std::string>& path, std::ostream& out,
                           std::ostream& err) {
  return guarded(err, [&] {
    err << "seed: " << spec.seed << '\n';
    return emit_model(gen_streets(spec), path, out);
  });
}

inline int cmd_gen_random(const RandomSpec& spec, const std::optional<std::string>& path, std::ostream& out,
                          std::ostream& err) {
  return guarded(err, [&] {
    err << "seed: " << spec.seed << '\n';
    return emit_model(gen_random(spec), path, out);
  });
}

inline int cmd_bench(const BenchSpec& spec, const std::optional<std::string>& csv, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    err << "seed: " << spec.seed << '\n';
    const auto records = run_bench(spec);
    if (csv) {
      std::ofstream file(*csv, std::ios::binary);
      if (!file) throw ParseError("cannot write '" + *csv + "'");
      write_bench_csv(file, records);
    } else {
      write_bench_csv(out, records);
    }
    return kOk;
  });
}

}  // namespace cmdp::cli
