#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmdp/explicit.hpp"
#include "cmdp/gen.hpp"
#include "cmdp/solvers.hpp"

namespace cmdp {

struct BenchRecord {
  std::string model_id;
  std::size_t states = 0;
  std::size_t reloads = 0;
  std::uint64_t capacity = 0;
  std::string solver;  // "cmdp-buchi" or "explicit-mec"
  double time_ms = 0.0;
  std::size_t iterations = 0;
  std::size_t nodes = 0;
};

inline constexpr const char* kBenchHeader = "model_id,states,reloads,capacity,solver,time_ms,iterations,nodes";

struct BenchSpec {
  std::vector<std::size_t> grid_n{3};
  std::vector<std::uint64_t> caps{10, 20, 40, 80};
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

namespace detail {

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Solves the same grid model with the counter-based Büchi solver and with the
/// explicit unfolding + MEC oracle. One record per (model, capacity, solver);
/// time is the mean over the repeats.
inline std::vector<BenchRecord> run_bench(const BenchSpec& spec) {
  if (spec.repeats == 0) throw ModelError("bench: repeats must be at least 1");
  std::vector<BenchRecord> out;
  for (auto n : spec.grid_n) {
    GridSpec g;
    g.n = n;
    g.seed = spec.seed;
    const auto base = gen_grid(g);
    const auto id = "grid-n" + std::to_string(n) + "-s" + std::to_string(spec.seed);
    for (auto cap : spec.caps) {
      const auto m = base.model.with_capacity(cap);
      BenchRecord cmdp{id, m.num_states(), m.num_reloads(), cap, "cmdp-buchi", 0.0, 0, m.num_states()};
      BenchRecord expl{id, m.num_states(), m.num_reloads(), cap, "explicit-mec", 0.0, 0, 0};
      for (std::size_t r = 0; r < spec.repeats; ++r) {
        cmdp.time_ms += detail::time_ms([&] { cmdp.iterations = buchi(m, base.targets).total_inner_iterations; });
        expl.time_ms += detail::time_ms([&] {
          const auto x = unfold(m);
          std::size_t rounds = 0;
          mec_decomposition(x, &rounds);
          expl.iterations = rounds;
          expl.nodes = x.num_nodes();
        });
      }
      cmdp.time_ms /= static_cast<double>(spec.repeats);
      expl.time_ms /= static_cast<double>(spec.repeats);
      out.push_back(std::move(cmdp));
      out.push_back(std::move(expl));
    }
  }
  return out;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << kBenchHeader << '\n';
  for (const auto& r : records) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(3) << r.time_ms;
    os << r.model_id << ',' << r.states << ',' << r.reloads << ',' << r.capacity << ',' << r.solver << ',' << t.str()
       << ',' << r.iterations << ',' << r.nodes << '\n';
  }
}

}  // namespace cmdp
