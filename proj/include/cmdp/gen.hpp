#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cmdp/error.hpp"
#include "cmdp/io.hpp"
#include "cmdp/model.hpp"

namespace cmdp {

namespace detail {

// Uniform integer in [lo, hi] by rejection; the same stream on every platform.
inline std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) return rng();
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return lo + x % range;
}

inline bool coin(std::mt19937_64& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_int(rng, 0, i - 1)]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Helicopter / rover grid world

struct GridSpec {
  std::size_t n = 3;
  // Rover moves in the intended heading with 1 - slip, each perpendicular
  // direction with slip / 2.
  double slip = 0.2;
  std::uint64_t heli_cost = 2;
  std::uint64_t hover_cost = 1;
  std::uint64_t capacity = 20;
  // Helicopter target cells as (x, y); empty means the far corner.
  std::vector<std::pair<std::size_t, std::size_t>> targets;
  std::uint64_t seed = 0;
  std::size_t max_states = 1'000'000;
};

/// Joint model of a battery-limited helicopter and a rover with unlimited
/// energy on an n×n grid. States are (helicopter cell, rover cell). Each
/// action pairs a deterministic helicopter move (or hover) with a rover
/// command: "drive" follows a seeded heading field with slips, "park" keeps
/// the rover in place. The helicopter recharges when it shares a cell with
/// the rover. Targets are states with the helicopter on a target cell.
inline ModelFile gen_grid(const GridSpec& spec) {
  const auto n = spec.n;
  if (n < 2) throw ModelError("gen_grid: n must be at least 2");
  if (spec.heli_cost < 1 || spec.hover_cost < 1) throw ModelError("gen_grid: costs must be at least 1");
  if (!(spec.slip >= 0.0 && spec.slip < 1.0)) throw ModelError("gen_grid: slip must lie in [0, 1)");
  const auto cells = n * n;
  if (n > 1000 || cells * cells > spec.max_states)
    throw SizeLimitError("gen_grid: n=" + std::to_string(n) + " exceeds the state budget of " +
                         std::to_string(spec.max_states));

  // Directions: north, south, east, west.
  constexpr std::array<std::pair<int, int>, 4> delta{{{0, 1}, {0, -1}, {1, 0}, {-1, 0}}};
  auto move = [&](std::size_t cell, int d, bool& inside) {
    const auto x = static_cast<long>(cell % n) + delta[d].first;
    const auto y = static_cast<long>(cell / n) + delta[d].second;
    inside = x >= 0 && y >= 0 && x < static_cast<long>(n) && y < static_cast<long>(n);
    return inside ? static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x) : cell;
  };

  std::mt19937_64 rng(spec.seed);
  std::vector<int> heading(cells);
  for (auto& h : heading) h = static_cast<int>(detail::uniform_int(rng, 0, 3));

  // Rover distribution per cell, merged when moves collapse at the border.
  std::vector<std::vector<std::pair<std::size_t, double>>> rover(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const int d = heading[c];
    const int perp1 = d < 2 ? 2 : 0;
    const int perp2 = d < 2 ? 3 : 1;
    const std::array<std::pair<int, double>, 3> outcomes{
        {{d, 1.0 - spec.slip}, {perp1, spec.slip / 2}, {perp2, spec.slip / 2}}};
    for (auto [dir, p] : outcomes) {
      if (p <= 0.0) continue;
      bool inside;
      const auto to = move(c, dir, inside);
      auto it = std::find_if(rover[c].begin(), rover[c].end(), [&](const auto& e) { return e.first == to; });
      if (it == rover[c].end())
        rover[c].emplace_back(to, p);
      else
        it->second += p;
    }
  }

  auto cell_name = [&](std::size_t c) { return std::to_string(c % n) + "_" + std::to_string(c / n); };
  std::vector<std::string> names;
  names.reserve(cells * cells);
  for (std::size_t h = 0; h < cells; ++h)
    for (std::size_t r = 0; r < cells; ++r) names.push_back("h" + cell_name(h) + "-r" + cell_name(r));

  std::vector<std::string> labels;
  for (const char* h : {"north", "south", "east", "west", "hover"})
    for (const char* r : {"drive", "park"}) labels.push_back(std::string(h) + "/" + r);
  std::vector<std::vector<ActionEntry>> available(cells * cells);
  StateMask reload(cells * cells, false);
  for (std::size_t h = 0; h < cells; ++h) {
    for (std::size_t r = 0; r < cells; ++r) {
      const auto s = h * cells + r;
      reload[s] = h == r;
      auto& acts = available[s];
      for (int d = 0; d <= 4; ++d) {
        std::size_t h2 = h;
        if (d < 4) {
          bool inside;
          h2 = move(h, d, inside);
          if (!inside) continue;
        }
        const auto cost = d < 4 ? spec.heli_cost : spec.hover_cost;
        ActionEntry drive{static_cast<ActionId>(2 * d), cost, {}};
        for (auto [r2, p] : rover[r]) drive.successors.push_back({h2 * cells + r2, p});
        acts.push_back(std::move(drive));
        acts.push_back(ActionEntry{static_cast<ActionId>(2 * d + 1), cost, {{h2 * cells + r, 1.0}}});
      }
    }
  }

  Cmdp model(std::move(names), std::move(labels), std::move(available), std::move(reload), spec.capacity);
  StateMask targets(model.num_states(), false);
  std::vector<std::size_t> target_cells;
  if (spec.targets.empty()) target_cells.push_back(cells - 1);
  for (auto [x, y] : spec.targets) {
    if (x >= n || y >= n) throw ModelError("gen_grid: target cell outside the grid");
    target_cells.push_back(y * n + x);
  }
  for (auto c : target_cells)
    for (std::size_t r = 0; r < cells; ++r) targets[c * cells + r] = true;
  return ModelFile{std::move(model), std::move(targets)};
}

// ---------------------------------------------------------------------------
// Street networks with stochastic consumption

struct ConsumptionOutcome {
  std::uint64_t consumption;
  double prob;
};

/// Adds a move `from` -> `to` whose consumption is random: a zero-cost action
/// branches into one intermediate state per outcome, and each intermediate
/// state moves on to `to` paying that outcome's consumption.
inline CmdpBuilder& add_stochastic_edge(CmdpBuilder& b, StateId from, StateId to, const std::string& label,
                                        const std::vector<ConsumptionOutcome>& outcomes,
                                        const std::string& dummy_prefix) {
  if (outcomes.empty()) throw ModelError("add_stochastic_edge: no outcomes");
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.consumption == 0) throw ModelError("add_stochastic_edge: consumption must be at least 1");
    if (!(o.prob > 0.0)) throw ModelError("add_stochastic_edge: probabilities must be positive");
    sum += o.prob;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) throw ModelError("add_stochastic_edge: probabilities must sum to 1");

  std::vector<Transition> branch;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto dummy = b.add_state(dummy_prefix + "#" + std::to_string(i));
    b.add_action(dummy, "go", outcomes[i].consumption, {{to, 1.0}});
    branch.push_back({dummy, outcomes[i].prob});
  }
  b.add_action(from, label, 0, std::move(branch));
  return b;
}

struct StreetSpec {
  std::size_t rows = 2;
  std::size_t cols = 2;
  std::uint64_t capacity = 30;
  // Outcome probabilities shared by every street segment.
  std::array<double, 3> probs{0.2, 0.6, 0.2};
  // Base consumption of a segment is drawn from [min_cost, max_cost].
  std::uint64_t min_cost = 1;
  std::uint64_t max_cost = 5;
  double station_fraction = 0.25;
  double one_way_fraction = 0.3;
  double target_fraction = 0.25;
  std::uint64_t seed = 0;
};

/// Synthetic street grid: intersections joined to their neighbours, some
/// segments one-way, each segment with three consumption outcomes
/// (base - 1, base, base + 1..3) through intermediate states.
inline ModelFile gen_streets(const StreetSpec& spec) {
  if (spec.rows * spec.cols < 2) throw ModelError("gen_streets: need at least two intersections");
  if (spec.min_cost < 1 || spec.max_cost < spec.min_cost) throw ModelError("gen_streets: invalid cost range");
  std::mt19937_64 rng(spec.seed);
  const auto count = spec.rows * spec.cols;
  CmdpBuilder b(spec.capacity);
  std::vector<StateId> inter(count);
  auto name = [&](std::size_t i) { return "I" + std::to_string(i / spec.cols) + "_" + std::to_string(i % spec.cols); };
  for (std::size_t i = 0; i < count; ++i) inter[i] = b.add_state(name(i));

  struct Segment {
    std::size_t from, to;
    const char* label;
  };
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < count; ++i) {
    const auto r = i / spec.cols, c = i % spec.cols;
    auto add_pair = [&](std::size_t j, const char* fwd, const char* back) {
      if (detail::coin(rng, spec.one_way_fraction)) {
        if (detail::coin(rng, 0.5))
          segments.push_back({i, j, fwd});
        else
          segments.push_back({j, i, back});
      } else {
        segments.push_back({i, j, fwd});
        segments.push_back({j, i, back});
      }
    };
    if (c + 1 < spec.cols) add_pair(i + 1, "east", "west");
    if (r + 1 < spec.rows) add_pair(i + spec.cols, "north", "south");
  }
  // Every intersection needs a way out.
  std::vector<bool> has_out(count, false);
  for (const auto& s : segments) has_out[s.from] = true;
  const auto original = segments.size();
  for (std::size_t k = 0; k < original; ++k) {
    const auto s = segments[k];
    if (!has_out[s.to]) {
      const char* back = std::string(s.label) == "east"    ? "west"
                         : std::string(s.label) == "west"  ? "east"
                         : std::string(s.label) == "north" ? "south"
                                                           : "north";
      segments.push_back({s.to, s.from, back});
      has_out[s.to] = true;
    }
  }

  for (const auto& s : segments) {
    const auto base = detail::uniform_int(rng, spec.min_cost, spec.max_cost);
    const std::vector<ConsumptionOutcome> outcomes{{std::max<std::uint64_t>(1, base - 1), spec.probs[0]},
                                                   {base, spec.probs[1]},
                                                   {base + detail::uniform_int(rng, 1, 3), spec.probs[2]}};
    add_stochastic_edge(b, inter[s.from], inter[s.to], s.label, outcomes, name(s.from) + ">" + name(s.to));
  }

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  detail::shuffle(order, rng);
  const auto stations = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spec.station_fraction * count)));
  for (std::size_t k = 0; k < stations && k < count; ++k) b.set_reload(inter[order[k]]);
  detail::shuffle(order, rng);
  const auto ntargets = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spec.target_fraction * count)));
  std::vector<StateId> targets;
  for (std::size_t k = 0; k < ntargets && k < count; ++k) targets.push_back(inter[order[k]]);

  auto model = b.build();
  auto mask = make_mask(model, targets);
  return ModelFile{std::move(model), std::move(mask)};
}

// ---------------------------------------------------------------------------
// Random models for property tests

struct RandomSpec {
  std::size_t states = 5;
  std::size_t actions = 2;
  double reload_fraction = 0.4;
  std::uint64_t cap_min = 10;
  std::uint64_t cap_max = 10;
  std::size_t max_successors = 3;
  double target_fraction = 0.3;
  std::uint64_t seed = 0;
};

/// Random decreasing CMDP. A hidden state ranking decides which actions may
/// be free: zero consumption is only kept when every successor ranks higher,
/// so zero-consumption edges form a DAG. Targets are a random subset.
inline ModelFile gen_random(const RandomSpec& spec) {
  if (spec.states < 1 || spec.actions < 1 || spec.max_successors < 1) throw ModelError("gen_random: sizes must be positive");
  if (spec.cap_max < spec.cap_min) throw ModelError("gen_random: empty capacity range");
  std::mt19937_64 rng(spec.seed);
  const auto n = spec.states;
  const auto cap = detail::uniform_int(rng, spec.cap_min, spec.cap_max);

  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = i;
  detail::shuffle(rank, rng);

  std::vector<std::string> names, labels;
  for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i < spec.actions; ++i) labels.push_back("a" + std::to_string(i));

  std::vector<std::vector<ActionEntry>> available(n);
  const std::uint64_t max_cons = cap / 2 + 1;
  for (StateId s = 0; s < n; ++s) {
    for (ActionId a = 0; a < spec.actions; ++a) {
      if (a > 0 && !detail::coin(rng, 0.7)) continue;
      const auto k = detail::uniform_int(rng, 1, std::min(spec.max_successors, n));
      std::vector<StateId> pool(n);
      for (std::size_t i = 0; i < n; ++i) pool[i] = i;
      detail::shuffle(pool, rng);
      std::vector<std::uint64_t> weight(k);
      std::uint64_t total = 0;
      for (auto& w : weight) total += (w = detail::uniform_int(rng, 1, 4));
      ActionEntry e{a, detail::uniform_int(rng, 0, max_cons), {}};
      bool forward = true;
      for (std::size_t i = 0; i < k; ++i) {
        e.successors.push_back({pool[i], static_cast<double>(weight[i]) / static_cast<double>(total)});
        forward = forward && rank[pool[i]] > rank[s];
      }
      if (e.consumption == 0 && !forward) e.consumption = 1;
      available[s].push_back(std::move(e));
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  detail::shuffle(order, rng);
  StateMask reload(n, false);
  const auto nreload = static_cast<std::size_t>(std::lround(spec.reload_fraction * static_cast<double>(n)));
  for (std::size_t k = 0; k < nreload && k < n; ++k) reload[order[k]] = true;
  detail::shuffle(order, rng);
  StateMask targets(n, false);
  const auto ntargets = static_cast<std::size_t>(std::lround(spec.target_fraction * static_cast<double>(n)));
  for (std::size_t k = 0; k < ntargets && k < n; ++k) targets[order[k]] = true;

  Cmdp model(std::move(names), std::move(labels), std::move(available), std::move(reload), cap);
  return ModelFile{std::move(model), std::move(targets)};
}

}  // namespace cmdp
