#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace cmdp;
using cmdp::testing::corpus;
using cmdp::testing::running_example;

namespace {

struct ExampleFixture : ::testing::Test {
  ModelFile f = running_example();
  const Cmdp& m = f.model;
  StateId s1 = m.state("s1"), s2 = m.state("s2"), s5 = m.state("s5");
  ActionId a1 = m.action_label("a1"), a2 = m.action_label("a2");
};

}  // namespace

TEST(RuleLookup, LargestThresholdAtOrBelowLevel) {
  const SelectionRule rule{{2, 1}, {10, 0}};
  EXPECT_EQ(rule_lookup(rule, 9, 7).action, 1u);
  EXPECT_EQ(rule_lookup(rule, 10, 7).action, 0u);
  EXPECT_EQ(rule_lookup(rule, 20, 7).action, 0u);
  EXPECT_FALSE(rule_lookup(rule, 2, 7).fallback);
  const auto under = rule_lookup(SelectionRule{{5, 1}}, 3, 7);
  EXPECT_TRUE(under.fallback);
  EXPECT_EQ(under.action, 7u);
}

TEST_F(ExampleFixture, MemoryUpdate) {
  EXPECT_EQ(memory_update(m, Level(2), s1, a2), Level(0));
  EXPECT_EQ(memory_update(m, Level(0), s5, a1), Level(19));
  EXPECT_EQ(memory_update(m, Level(4), s1, a1), kExhausted);
  EXPECT_EQ(memory_update(m, kExhausted, s5, a1), kExhausted);
}

TEST_F(ExampleFixture, FallbackIsOrderFirstAction) {
  EXPECT_EQ(fallback_action(m, s1), a1);
  CounterSelector sel(m.num_states());
  const auto c = select_action(m, sel, s1, 5);
  EXPECT_TRUE(c.fallback);
  EXPECT_EQ(c.action, a1);
}

TEST_F(ExampleFixture, SimulateBuchiSelectorNeverExhausts) {
  const auto sel = buchi(m, f.targets).selector;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = simulate(m, sel, s1, 2, 1000, seed);
    EXPECT_EQ(t.termination, Termination::step_budget);
    EXPECT_EQ(t.steps.size(), 1001u);
    bool visited = false;
    for (const auto& st : t.steps) {
      ASSERT_TRUE(st.level.has_value());
      visited = visited || st.state == s2;
    }
    EXPECT_TRUE(visited);
  }
}

TEST_F(ExampleFixture, SimulateEdgeCases) {
  const auto sel = buchi(m, f.targets).selector;
  const auto t = simulate(m, sel, s1, 2, 0, 1);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].state, s1);
  EXPECT_FALSE(t.steps[0].action);
  EXPECT_EQ(t.steps[0].level, Level(2));

  const auto under = simulate(m, sel, s1, 1, 10, 1);
  EXPECT_EQ(under.termination, Termination::selector_underflow);
  EXPECT_EQ(under.underflow_step, 1u);
  EXPECT_THROW(simulate(m, sel, s1, 21, 10, 1), ModelError);
}

TEST_F(ExampleFixture, SimulationIsDeterministicInTheSeed) {
  const auto sel = buchi(m, f.targets).selector;
  const auto a = simulate(m, sel, s1, 15, 300, 42);
  const auto b = simulate(m, sel, s1, 15, 300, 42);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].state, b.steps[i].state);
    EXPECT_EQ(a.steps[i].level, b.steps[i].level);
  }
}

TEST_F(ExampleFixture, InducedChainOfBuchiSelector) {
  const auto sel = buchi(m, f.targets).selector;
  const auto chain = induced_chain(m, sel, s1, 2);
  EXPECT_FALSE(chain.any_fallback());
  EXPECT_TRUE(verify(chain, f.targets, Objective::safe).holds);
  EXPECT_TRUE(verify(chain, f.targets, Objective::positive_reach).holds);
  EXPECT_TRUE(verify(chain, f.targets, Objective::buchi).holds);
  EXPECT_FALSE(verify(chain, StateMask(5, false), Objective::buchi).holds);
  EXPECT_TRUE(chain.find(s1, 2).has_value());
}

TEST_F(ExampleFixture, AlwaysA2IsSafeButNeverReaches) {
  CounterSelector sel(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) sel.rules[s][0] = a2;
  const auto chain = induced_chain(m, sel, s1, 2);
  EXPECT_TRUE(verify(chain, f.targets, Objective::safe).holds);
  EXPECT_FALSE(verify(chain, f.targets, Objective::positive_reach).holds);
  EXPECT_FALSE(verify(chain, f.targets, Objective::buchi).holds);
}

TEST_F(ExampleFixture, AlwaysA1IsUnsafeFromLowLevels) {
  CounterSelector sel(m.num_states());
  for (StateId s = 0; s < m.num_states(); ++s) sel.rules[s][0] = a1;
  EXPECT_FALSE(verify(induced_chain(m, sel, s1, 2), f.targets, Objective::safe).holds);
  EXPECT_FALSE(verify(induced_chain(m, sel, s1, 20), f.targets, Objective::safe).holds);
}

TEST_F(ExampleFixture, StrategyRoundTrip) {
  const auto sel = buchi(m, f.targets).selector;
  const auto text = export_strategy(m, sel);
  const auto back = import_strategy(m, text);
  EXPECT_EQ(back, sel);
  EXPECT_EQ(export_strategy(m, back), text);
}

TEST_F(ExampleFixture, EmptySelectorDocument) {
  CounterSelector sel(m.num_states());
  const auto doc = strategy_to_json(m, sel);
  EXPECT_TRUE(doc["selector"].empty());
  EXPECT_EQ(doc["initial"]["s1"], "inf");
  EXPECT_EQ(import_strategy(m, doc.dump()), sel);
}

TEST_F(ExampleFixture, ImportRejectsBadDocuments) {
  auto reject = [&](const std::string& text) { EXPECT_THROW(import_strategy(m, text), ParseError) << text; };
  reject(R"({"initial": {}, "selector": {"s1": [{"threshold": 21, "action": "a1"}]}})");
  reject(R"({"initial": {}, "selector": {"s1": [{"threshold": 5, "action": "a1"}, {"threshold": 5, "action": "a2"}]}})");
  reject(R"({"initial": {}, "selector": {"s9": [{"threshold": 5, "action": "a1"}]}})");
  reject(R"({"initial": {}, "selector": {"s1": [{"threshold": 5, "action": "a9"}]}})");
  reject(R"({"initial": {"s1": 30}, "selector": {}})");
  reject(R"({"initial": {}, "selector": {"s1": [{"threshold": 5}]}})");
  reject(R"({"selector": {}})");
  reject("{");
}

// Every simulated trace is a path of the induced chain.
TEST(StrategyProperties, SimulationStaysInInducedChain) {
  std::size_t checked = 0;
  for (const auto& f : corpus(200)) {
    const auto& m = f.model;
    const auto r = buchi(m, f.targets);
    for (StateId s = 0; s < m.num_states(); ++s) {
      if (!(r.values[s] <= m.capacity())) continue;
      const auto d = r.values[s].value();
      const auto chain = induced_chain(m, r.selector, s, d);
      const auto trace = simulate(m, r.selector, s, d, 60, s * 31 + 7);
      auto node = chain.find(s, d);
      ASSERT_TRUE(node);
      for (std::size_t i = 1; i < trace.steps.size(); ++i) {
        const auto& st = trace.steps[i];
        ASSERT_TRUE(st.level);
        const auto next = chain.find(st.state, *st.level);
        ASSERT_TRUE(next);
        const auto succ = chain.graph.successors(*node);
        ASSERT_NE(std::find(succ.begin(), succ.end(), *next), succ.end());
        ASSERT_EQ(chain.nodes[*node].action, *st.action);
        node = next;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 100u);
}

// Fixing one safe action per state is enough to stay safe.
TEST(StrategyProperties, MemorylessSafeStrategy) {
  for (const auto& f : corpus(300)) {
    const auto& m = f.model;
    const auto sv = safe(m).values;
    CounterSelector sel(m.num_states());
    for (StateId s = 0; s < m.num_states(); ++s) {
      const auto acts = safe_actions(m, sv, s, Semantics::truncated);
      ASSERT_FALSE(acts.empty());
      sel.rules[s][0] = acts.front();
    }
    for (StateId s = 0; s < m.num_states(); ++s) {
      const auto need = safe_requirement(m, sv, s, Semantics::truncated);
      if (!(need <= m.capacity())) continue;
      const auto chain = induced_chain(m, sel, s, need.value());
      ASSERT_TRUE(verify(chain, f.targets, Objective::safe).holds) << m.state_name(s);
    }
  }
}

TEST(StrategyProperties, RoundTripOnCorpus) {
  for (const auto& f : corpus(200)) {
    const auto sel = buchi(f.model, f.targets).selector;
    ASSERT_EQ(import_strategy(f.model, export_strategy(f.model, sel)), sel);
  }
}
