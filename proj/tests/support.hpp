#pragma once

#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"

namespace cmdp::testing {

inline std::string model_path(const std::string& file) { return std::string(CMDP_MODELS_DIR) + "/" + file; }

inline ModelFile running_example() { return load_model(model_path("running_example.json")); }

// Small random models: |S| <= 8, |A| <= 3, cap <= 12.
inline RandomSpec corpus_spec(std::uint64_t i) {
  RandomSpec sp;
  sp.states = 1 + i % 8;
  sp.actions = 1 + (i / 8) % 3;
  sp.max_successors = 1 + i % 3;
  sp.reload_fraction = 0.2 + 0.1 * static_cast<double>(i % 5);
  sp.target_fraction = 0.3;
  sp.cap_min = 0;
  sp.cap_max = 12;
  sp.seed = 1000 + i;
  return sp;
}

inline std::vector<ModelFile> corpus(std::size_t count, std::uint64_t offset = 0) {
  std::vector<ModelFile> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(gen_random(corpus_spec(offset + i)));
  return out;
}

// Solver vectors keep a finite requirement at reload states while the
// unfolding assigns them level 0; both encode "winning from any level".
inline bool matches_oracle(const Cmdp& m, StateId s, ExtNat solver, ExtNat oracle) {
  if (!m.is_reload(s)) return solver == oracle;
  return (oracle == ExtNat(0)) == (solver <= m.capacity()) && (oracle.is_infinite() || oracle == ExtNat(0));
}

inline std::vector<StateId> oracle_mismatches(const Cmdp& m, const ValueVector& solver, const ValueVector& oracle) {
  std::vector<StateId> bad;
  for (StateId s = 0; s < m.num_states(); ++s)
    if (!matches_oracle(m, s, solver[s], oracle[s])) bad.push_back(s);
  return bad;
}

}  // namespace cmdp::testing
