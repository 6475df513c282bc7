#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "edge_oracle.hpp"
#include "egin/graph_edges.hpp"
#include "test_util.hpp"

using namespace egin;
using egin::testing::click;
using egin::testing::query;
using egin::testing::sorted;

namespace {

Edge ii(EntityId a, EntityId b) { return {EdgeKind::I2I, a, b, EntityType::Item, EntityType::Item}; }
Edge qq(EntityId a, EntityId b) { return {EdgeKind::Q2Q, a, b, EntityType::Query, EntityType::Query}; }
Edge qi(EntityId q, EntityId i) { return {EdgeKind::Q2I, q, i, EntityType::Query, EntityType::Item}; }
Edge iq(EntityId i, EntityId q) { return {EdgeKind::Q2I, i, q, EntityType::Item, EntityType::Query}; }

EdgeConfig no_seeds() {
  EdgeConfig cfg;
  cfg.seeds_mix_rate = 0.0;
  return cfg;
}

std::size_t count_kind(const std::vector<Edge>& edges, EdgeKind kind) {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.kind == kind; }));
}

}  // namespace

TEST_CASE("i2i: window of 2 over three clicks connects every pair") {
  Rng rng(1);
  const std::vector<BehaviorEvent> clicks{click(1, 1), click(2, 2), click(3, 3)};
  const auto edges = build_i2i_edges(clicks, {}, no_seeds(), rng);
  CHECK(sorted(edges) == sorted({ii(1, 2), ii(2, 1), ii(1, 3), ii(3, 1), ii(2, 3), ii(3, 2)}));
}

TEST_CASE("i2i: a single click yields nothing") {
  Rng rng(1);
  CHECK(build_i2i_edges({click(1, 1)}, {}, no_seeds(), rng).empty());
}

TEST_CASE("i2i: repeated ids at distance <= w are not self-connected") {
  Rng rng(1);
  auto cfg = no_seeds();
  cfg.window = 1;
  const auto edges = build_i2i_edges({click(1, 1), click(1, 2), click(2, 3)}, {}, cfg, rng);
  CHECK(sorted(edges) == sorted({ii(1, 2), ii(2, 1)}));
}

TEST_CASE("i2i: seeds_mix_rate 1 always uses the seeds sequence") {
  Rng rng(1);
  EdgeConfig cfg;
  cfg.seeds_mix_rate = 1.0;
  const auto edges = build_i2i_edges({click(1, 1), click(2, 2)}, {click(5, 1), click(6, 2)}, cfg, rng);
  CHECK(sorted(edges) == sorted({ii(5, 6), ii(6, 5)}));
}

TEST_CASE("i2i: the seeds source is picked at the configured rate") {
  Rng rng(99);
  EdgeConfig cfg;  // rate 0.2
  const std::vector<BehaviorEvent> clicks{click(1, 1), click(2, 2)};
  const std::vector<BehaviorEvent> seeds{click(5, 1), click(6, 2)};
  int from_seeds = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) from_seeds += build_i2i_edges(clicks, seeds, cfg, rng).front().anchor_id >= 5;
  CHECK(static_cast<double>(from_seeds) / n == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("sessions: split on time gaps and on disjoint categories") {
  EdgeConfig cfg;
  cfg.session_gap = 100;
  const std::vector<BehaviorEvent> close{query(1, 0, {1}), query(2, 50, {1, 2}), query(3, 100, {2})};
  CHECK(segment_query_sessions(close, cfg).size() == 1);

  const std::vector<BehaviorEvent> far{query(1, 0, {1}), query(2, 500, {1}), query(3, 1000, {1})};
  const auto singletons = segment_query_sessions(far, cfg);
  REQUIRE(singletons.size() == 3);
  for (const auto& s : singletons) CHECK(s.size() == 1);

  const std::vector<BehaviorEvent> topics{query(1, 0, {1}), query(2, 10, {1}), query(3, 20, {2})};
  const auto by_topic = segment_query_sessions(topics, cfg);
  REQUIRE(by_topic.size() == 2);
  CHECK(by_topic[0] == std::vector<BehaviorEvent>{topics[0], topics[1]});
  CHECK(by_topic[1] == std::vector<BehaviorEvent>{topics[2]});
}

TEST_CASE("q2q: complete digraph over distinct ids per session") {
  CHECK(build_q2q_edges({{query(1, 0), query(2, 1), query(3, 2)}}).size() == 6);
  CHECK(build_q2q_edges({{query(1, 0)}}).empty());
  CHECK(build_q2q_edges({{query(1, 0), query(1, 5)}}).empty());
  const auto two = build_q2q_edges({{query(1, 0), query(2, 1)}, {query(3, 2), query(4, 3)}});
  CHECK(sorted(two) == sorted({qq(1, 2), qq(2, 1), qq(3, 4), qq(4, 3)}));
}

TEST_CASE("q2i: time window and category constraint") {
  EdgeConfig cfg;
  cfg.q2i_timespan = 100;
  const auto edges = build_q2i_edges({query(9, 100, {3})}, {click(1, 150, {3})}, cfg);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == qi(9, 1));
  CHECK(edges[1] == iq(1, 9));

  CHECK(build_q2i_edges({query(9, 100, {3})}, {click(1, 150, {4})}, cfg).empty());

  // Click before the query: only the symmetric reading connects them.
  CHECK(build_q2i_edges({query(9, 150, {3})}, {click(1, 100, {3})}, cfg).size() == 2);
  cfg.symmetric_q2i_time = false;
  CHECK(build_q2i_edges({query(9, 150, {3})}, {click(1, 100, {3})}, cfg).empty());

  // Bounds are strict on both ends.
  cfg.symmetric_q2i_time = true;
  CHECK(build_q2i_edges({query(9, 100, {3})}, {click(1, 200, {3})}, cfg).empty());
  CHECK(build_q2i_edges({query(9, 100, {3})}, {click(1, 100, {3})}, cfg).empty());
}

TEST_CASE("build_all_edges: empty and click-only samples") {
  Rng rng(1);
  TrainingSample empty;
  empty.current_query = query(1, 10);
  CHECK(build_all_edges(empty, no_seeds(), rng).empty());

  TrainingSample clicks_only;
  clicks_only.click_seq = {click(1, 1, {1}), click(2, 2, {1}), click(3, 3, {1})};
  clicks_only.current_query = query(7, 5000, {9});
  const auto edges = build_all_edges(clicks_only, no_seeds(), rng);
  CHECK_FALSE(edges.empty());
  for (const auto& e : edges) CHECK(e.kind == EdgeKind::I2I);
}

TEST_CASE("build_all_edges: three query sessions and a window-2 item chain, enumerated by hand") {
  // Items i1..i6, queries q1..q5 (q5 is the current query).
  //   q1@50{1} q2@150{1} | q3@1900{2} | q4@4800{3} q5@4900{3}
  //   i1@100{1} i2@200{1} i3@300{2} i4@2000{2} i5@2100{3} i6@5000{3}
  TrainingSample s;
  s.click_seq = {click(1, 100, {1}), click(2, 200, {1}), click(3, 300, {2}),
                 click(4, 2000, {2}), click(5, 2100, {3}), click(6, 5000, {3})};
  s.query_seq = {query(11, 50, {1}), query(12, 150, {1}), query(13, 1900, {2}), query(14, 4800, {3})};
  s.current_query = query(15, 4900, {3});
  s.target_item = click(7, 6000, {3});

  EdgeConfig cfg = no_seeds();  // w=2, session_gap=1800, T=900, symmetric
  Rng rng(3);
  const auto edges = build_all_edges(s, cfg, rng);

  // i2i: 5 adjacent + 4 distance-two pairs, both directions.
  CHECK(count_kind(edges, EdgeKind::I2I) == 18);
  // q2q: sessions {q1,q2}, {q3}, {q4,q5}.
  std::vector<Edge> q2q;
  std::copy_if(edges.begin(), edges.end(), std::back_inserter(q2q), [](const Edge& e) { return e.kind == EdgeKind::Q2Q; });
  CHECK(sorted(q2q) == sorted({qq(11, 12), qq(12, 11), qq(14, 15), qq(15, 14)}));
  // q2i: q1-i1, q1-i2, q2-i1, q2-i2, q3-i4, q4-i6, q5-i6.
  std::vector<Edge> q2i;
  std::copy_if(edges.begin(), edges.end(), std::back_inserter(q2i), [](const Edge& e) { return e.kind == EdgeKind::Q2I; });
  std::vector<Edge> expected;
  for (auto [q, i] : std::vector<std::pair<EntityId, EntityId>>{{11, 1}, {11, 2}, {12, 1}, {12, 2}, {13, 4}, {14, 6}, {15, 6}}) {
    expected.push_back(qi(q, i));
    expected.push_back(iq(i, q));
  }
  CHECK(sorted(q2i) == sorted(expected));
  CHECK(edges.size() == 18 + 4 + 14);

  // The literal one-sided time rule drops q2-i1 (click 50 s before the query).
  cfg.symmetric_q2i_time = false;
  CHECK(count_kind(build_all_edges(s, cfg, rng), EdgeKind::Q2I) == 12);
}

TEST_CASE("build_all_edges: use_query_edges=false keeps only i2i") {
  Rng rng(1);
  Rng orng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = egin::testing::random_edge_sample(orng, 10);
    auto cfg = egin::testing::random_edge_config(orng);
    cfg.use_query_edges = false;
    for (const auto& e : build_all_edges(s, cfg, rng)) CHECK(e.kind == EdgeKind::I2I);
  }
}

TEST_CASE("build_all_edges matches the all-pairs oracle, with kinds in i2i, q2q, q2i order") {
  Rng gen(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto s = egin::testing::random_edge_sample(gen, 8);
    const auto cfg = egin::testing::random_edge_config(gen);
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto expected = egin::testing::oracle_all_edges(s, cfg, rng);
    const auto edges = build_all_edges(s, cfg, rng);
    REQUIRE(sorted(edges) == sorted(expected));
    CHECK(std::is_sorted(edges.begin(), edges.end(),
                         [](const Edge& a, const Edge& b) { return a.kind < b.kind; }));
  }
}

TEST_CASE("edge invariants: mirrors, no self-edges, type routing, count bounds") {
  Rng gen(77);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = egin::testing::random_edge_sample(gen, 16);
    const auto cfg = egin::testing::random_edge_config(gen);
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto edges = build_all_edges(s, cfg, rng);

    std::map<std::tuple<EdgeKind, EntityId, EntityId, EntityType, EntityType>, int> balance;
    for (const auto& e : edges) {
      ++balance[{e.kind, e.anchor_id, e.positive_id, e.anchor_type, e.positive_type}];
      --balance[{e.kind, e.positive_id, e.anchor_id, e.positive_type, e.anchor_type}];
      if (e.anchor_type == e.positive_type) CHECK(e.anchor_id != e.positive_id);
      switch (e.kind) {
        case EdgeKind::I2I:
          CHECK((e.anchor_type == EntityType::Item && e.positive_type == EntityType::Item));
          break;
        case EdgeKind::Q2Q:
          CHECK((e.anchor_type == EntityType::Query && e.positive_type == EntityType::Query));
          break;
        case EdgeKind::Q2I:
          CHECK(e.anchor_type != e.positive_type);
          break;
      }
    }
    for (const auto& [key, b] : balance) CHECK(b == 0);

    const auto longest = std::max(s.click_seq.size(), s.seeds_seq.size());
    CHECK(count_kind(edges, EdgeKind::I2I) <= 2 * cfg.window * longest);

    auto qs = s.query_seq;
    qs.push_back(s.current_query);
    std::size_t q2q_bound = 0;
    for (const auto& session : segment_query_sessions(qs, cfg)) {
      std::set<EntityId> ids;
      for (const auto& q : session) ids.insert(q.entity_id);
      q2q_bound += ids.size() * (ids.size() - 1);
    }
    CHECK(count_kind(edges, EdgeKind::Q2Q) == q2q_bound);
  }
}

TEST_CASE("build_all_edges is deterministic for a fixed rng seed") {
  Rng gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = egin::testing::random_edge_sample(gen, 12);
    const auto cfg = egin::testing::random_edge_config(gen);
    Rng a(trial);
    Rng b(trial);
    CHECK(build_all_edges(s, cfg, a) == build_all_edges(s, cfg, b));
  }
}

TEST_CASE("EdgeConfig validation") {
  EdgeConfig cfg;
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EdgeConfig{};
  cfg.q2i_timespan = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EdgeConfig{};
  cfg.seeds_mix_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
