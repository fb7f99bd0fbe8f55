#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace cmdp;
using cmdp::testing::corpus;
using cmdp::testing::running_example;

namespace {

// Closed under some action at every node and strongly connected using those
// actions.
bool is_end_component(const ExplicitMdp& x, const std::set<std::size_t>& nodes) {
  if (nodes.empty()) return false;
  CsrGraph g;
  std::vector<std::size_t> local(x.num_nodes(), 0);
  std::vector<std::size_t> order(nodes.begin(), nodes.end());
  for (std::size_t i = 0; i < order.size(); ++i) local[order[i]] = i;
  for (auto v : order) {
    std::vector<std::size_t> succ;
    bool any = false;
    for (auto act = x.actions_begin(v); act < x.actions_end(v); ++act) {
      bool inside = true;
      for (auto w : x.successors(act)) inside = inside && nodes.count(w);
      if (!inside) continue;
      any = true;
      for (auto w : x.successors(act)) succ.push_back(local[w]);
    }
    if (!any) return false;
    g.add_node(succ.begin(), succ.end());
  }
  return strongly_connected_components(g).count == 1;
}

}  // namespace

TEST(Unfold, NodeCounts) {
  const auto m = running_example().model;
  const auto x = unfold(m);
  EXPECT_EQ(x.num_nodes(), 106u);
  EXPECT_EQ(x.sink(), 105u);
  EXPECT_EQ(unfold(m.with_capacity(0)).num_nodes(), 6u);
  EXPECT_EQ(unfolded_node_count(7378, 95), 7378u * 96 + 1);
}

TEST(Unfold, SizeGuard) {
  const auto m = running_example().model;
  try {
    unfold(m, 100);
    FAIL();
  } catch (const SizeLimitError& e) {
    EXPECT_NE(std::string(e.what()).find("106"), std::string::npos) << e.what();
  }
  EXPECT_THROW(unfolded_node_count(std::numeric_limits<std::size_t>::max() / 2, 10), SizeLimitError);
}

TEST(Unfold, DynamicsFollowLevels) {
  const auto m = running_example().model;
  const auto x = unfold(m);
  const auto s1 = m.state("s1"), s2 = m.state("s2"), s3 = m.state("s3"), s5 = m.state("s5");
  // s1 at level 7 under a1 (cost 5) lands at level 2 in s2 and s3.
  const auto v = x.node(s1, 7);
  ASSERT_EQ(x.actions_end(v) - x.actions_begin(v), 2u);
  const auto act = x.actions_begin(v);
  EXPECT_EQ(x.label(act), m.action_label("a1"));
  const std::set<std::size_t> succ(x.successors(act).begin(), x.successors(act).end());
  EXPECT_EQ(succ, (std::set<std::size_t>{x.node(s2, 2), x.node(s3, 2)}));
  // Underflow goes to the sink.
  const auto low = x.actions_begin(x.node(s1, 4));
  EXPECT_EQ(x.successors(low).size(), 1u);
  EXPECT_EQ(x.successors(low)[0], x.sink());
  // Reload nodes ignore their level.
  for (std::uint64_t e = 0; e <= 20; ++e) {
    EXPECT_EQ(x.successors(x.actions_begin(x.node(s5, e)))[0], x.node(s1, 19));
  }
  EXPECT_EQ(x.node_name(x.node(s3, 4)), "s3@4");
  EXPECT_EQ(x.node_name(x.sink()), "sink");
}

TEST(Unfold, JsonDumpIsAModel) {
  const auto m = running_example().model.with_capacity(3);
  const auto doc = explicit_to_json(unfold(m));
  const auto back = parse_model(doc.dump());
  EXPECT_EQ(back.model.num_states(), 21u);
  // Levels live in the state names, so every edge is free: the dump is an
  // ordinary MDP and only the zero-cycle check objects to it.
  for (const auto& v : validate(back.model)) {
    EXPECT_EQ(v.rule, "not decreasing");
  }
  EXPECT_EQ(back.model.state_name(back.model.num_states() - 1), "sink");
}

TEST(Mec, SelfLoopAndSink) {
  CmdpBuilder b(0);
  b.add_action("s", "a", 0, {{"t", 1.0}});
  b.add_action("t", "a", 1, {{"t", 1.0}});
  const auto x = unfold(b.build());
  const auto mecs = mec_decomposition(x);
  // t underflows immediately at capacity 0, so only the sink survives.
  ASSERT_EQ(mecs.size(), 1u);
  EXPECT_EQ(mecs[0].nodes, std::vector<std::size_t>{x.sink()});

  CmdpBuilder c(3);
  c.add_action("r", "a", 1, {{"r", 1.0}});
  c.set_reload(0);
  const auto y = unfold(c.build());
  const auto m2 = mec_decomposition(y);
  ASSERT_EQ(m2.size(), 2u);
  EXPECT_EQ(m2[0].nodes, std::vector<std::size_t>{y.node(0, 2)});
  EXPECT_EQ(m2[1].nodes, std::vector<std::size_t>{y.sink()});
}

TEST(Mec, ExampleReloadLoop) {
  const auto m = running_example().model;
  const auto x = unfold(m);
  const auto mecs = mec_decomposition(x);
  bool found = false;
  for (const auto& mec : mecs)
    found = found || mec.nodes == std::vector<std::size_t>{x.node(m.state("s2"), 19)};
  EXPECT_TRUE(found);
}

TEST(MecProperties, DisjointClosedConnectedMaximal) {
  for (const auto& f : corpus(150)) {
    const auto x = unfold(f.model);
    const auto mecs = mec_decomposition(x);
    std::vector<int> owner(x.num_nodes(), -1);
    std::size_t prev_min = 0;
    for (std::size_t i = 0; i < mecs.size(); ++i) {
      const auto& mec = mecs[i];
      const std::set<std::size_t> nodes(mec.nodes.begin(), mec.nodes.end());
      ASSERT_FALSE(nodes.empty());
      if (i > 0) {
        ASSERT_GT(*nodes.begin(), prev_min);
      }
      prev_min = *nodes.begin();
      for (auto v : nodes) {
        ASSERT_EQ(owner[v], -1);
        owner[v] = static_cast<int>(i);
      }
      for (auto act : mec.actions) {
        ASSERT_TRUE(nodes.count(x.owner(act)));
        for (auto w : x.successors(act)) {
          ASSERT_TRUE(nodes.count(w));
        }
      }
      ASSERT_TRUE(is_end_component(x, nodes));
    }
    for (std::size_t i = 0; i < mecs.size(); ++i) {
      const std::set<std::size_t> nodes(mecs[i].nodes.begin(), mecs[i].nodes.end());
      for (std::size_t v = 0; v < x.num_nodes(); ++v) {
        if (nodes.count(v)) continue;
        auto bigger = nodes;
        if (owner[v] >= 0)
          bigger.insert(mecs[owner[v]].nodes.begin(), mecs[owner[v]].nodes.end());
        else
          bigger.insert(v);
        ASSERT_FALSE(is_end_component(x, bigger));
      }
    }
    for (std::size_t v = 0; v < x.num_nodes(); ++v)
      if (owner[v] < 0) {
        ASSERT_FALSE(is_end_component(x, {v}));
      }
  }
}

TEST(Oracles, RunningExample) {
  const auto f = running_example();
  const auto x = unfold(f.model);
  const auto expected = ValueVector{ExtNat(2), ExtNat(0), ExtNat(5), ExtNat(4), ExtNat(0)};
  EXPECT_EQ(safety_levels_oracle(x).levels, expected);
  EXPECT_EQ(positive_reach_oracle(x, f.targets).levels, expected);
  EXPECT_EQ(almost_sure_buchi_oracle(x, f.targets).levels, expected);
}

TEST(Oracles, NoReloadCycleIsHopeless) {
  const auto m = running_example().model.with_reloads(StateMask(5, false));
  for (auto v : safety_levels_oracle(unfold(m)).levels) EXPECT_EQ(v, kInfinity);
}

TEST(Oracles, TargetExtremes) {
  for (const auto& f : corpus(200)) {
    const auto x = unfold(f.model);
    const auto n = f.model.num_states();
    const auto safety = safety_levels_oracle(x).levels;
    for (auto v : positive_reach_oracle(x, StateMask(n, false)).levels) {
      ASSERT_EQ(v, kInfinity);
    }
    for (auto v : almost_sure_buchi_oracle(x, StateMask(n, false)).levels) {
      ASSERT_EQ(v, kInfinity);
    }
    ASSERT_EQ(positive_reach_oracle(x, StateMask(n, true)).levels, safety);
    ASSERT_EQ(almost_sure_buchi_oracle(x, StateMask(n, true)).levels, safety);
  }
}

// Winning sets are upward closed in the level and level-independent at
// reload states; summarising throws otherwise.
TEST(OracleProperties, MonotoneAndReloadIndependent) {
  for (const auto& f : corpus(300)) {
    const auto x = unfold(f.model);
    const auto check = [&](const OracleResult& r) {
      for (StateId s = 0; s < f.model.num_states(); ++s)
        for (std::uint64_t e = 0; e <= x.capacity(); ++e)
          ASSERT_EQ(r.winning[x.node(s, e)], r.levels[s] <= e);
    };
    check(safety_levels_oracle(x));
    check(positive_reach_oracle(x, f.targets));
    check(almost_sure_buchi_oracle(x, f.targets));
  }
}

TEST(OracleProperties, ObjectivesAreNested) {
  for (const auto& f : corpus(300)) {
    const auto x = unfold(f.model);
    const auto s = safety_levels_oracle(x).levels;
    const auto p = positive_reach_oracle(x, f.targets).levels;
    const auto b = almost_sure_buchi_oracle(x, f.targets).levels;
    for (StateId i = 0; i < s.size(); ++i) {
      ASSERT_LE(s[i], p[i]);
      ASSERT_LE(p[i], b[i]);
    }
  }
}
