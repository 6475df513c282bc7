#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "egin/multi_interest.hpp"
#include "fd_oracle.hpp"

using namespace egin;
using egin::testing::random_vector;

namespace {

std::vector<BehaviorEvent> clicks_of(const std::vector<EntityId>& ids) {
  std::vector<BehaviorEvent> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({EventKind::Click, ids[i], Timestamp(i), {0}});
  return out;
}

}  // namespace

TEST_CASE("cosine_sim examples") {
  const std::vector<double> u{1.0, 2.0};
  const std::vector<double> v{2.0, 1.0};
  CHECK(cosine_sim(u, u) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_sim(u, v) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(cosine_sim(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(cosine_sim(std::vector<double>{0, 0}, v) == 0.0);
  CHECK(cosine_sim(std::vector<double>{1e-13, 0}, v) == 0.0);
  CHECK_THROWS_AS(cosine_sim(u, std::vector<double>{1, 2, 3}), ContractViolation);
}

TEST_CASE("binning boundaries and a worked value") {
  BinningScheme s;  // B = 20
  CHECK(s.bin(1.0) == 19);
  CHECK(s.bin(-1.0) == 0);
  CHECK(s.bin(0.214) == 12);
  CHECK(s.bin(0.0) == 10);
  CHECK(s.pad_bin() == 20);
  CHECK(s.pad_position() == 100);
}

TEST_CASE("binning is monotone and stays in range") {
  BinningScheme s;
  Rng rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double a = u(rng);
    double b = u(rng);
    if (a > b) std::swap(a, b);
    CHECK(s.bin(a) <= s.bin(b));
    CHECK(s.bin(b) < s.num_bins);
    // floor((s+1)/2 * B) away from the clamp boundaries
    if (b < 1.0) CHECK(s.bin(b) == static_cast<std::size_t>(std::floor((b + 1.0) / 2.0 * 20.0)));
  }
}

TEST_CASE("top_k returns fewer entries for short sequences") {
  Rng rng(2);
  const auto t = random_vector(rng, 4, 1.0);
  std::vector<std::vector<double>> seq{random_vector(rng, 4, 1.0), random_vector(rng, 4, 1.0), random_vector(rng, 4, 1.0)};
  CHECK(top_k(t, {seq.begin(), seq.end()}, 10).size() == 3);
  CHECK(top_k(t, {}, 10).empty());
}

TEST_CASE("top_k ties go to the smaller index") {
  const std::vector<double> t{1.0, 0.0};
  std::vector<std::vector<double>> seq(15, std::vector<double>{1.0, 1.0});
  const auto r = top_k(t, {seq.begin(), seq.end()}, 10);
  REQUIRE(r.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r[i].index == i);
}

TEST_CASE("top_k matches a sort-everything oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_vector(rng, 5, 1.0);
    std::vector<std::vector<double>> seq;
    for (int i = 0; i < 30; ++i) {
      // Duplicate some rows to force ties.
      seq.push_back(i % 7 == 6 ? seq[static_cast<std::size_t>(i - 3)] : random_vector(rng, 5, 1.0));
    }
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < seq.size(); ++i) all.push_back({-cosine_sim(t, seq[i]), i});
    std::sort(all.begin(), all.end());
    const auto k = static_cast<std::size_t>(trial % 12);
    const auto r = top_k(t, {seq.begin(), seq.end()}, k);
    REQUIRE(r.size() == std::min(k, seq.size()));
    for (std::size_t j = 0; j < r.size(); ++j) {
      CHECK(r[j].index == all[j].second);
      CHECK(r[j].similarity == -all[j].first);
    }
  }
}

TEST_CASE("retrieval and bins are invariant to positive rescaling of the embeddings") {
  Rng rng(4);
  BinningScheme scheme;
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_vector(rng, 6, 1.0);
    std::vector<std::vector<double>> seq;
    for (int i = 0; i < 20; ++i) seq.push_back(random_vector(rng, 6, 1.0));
    const auto before = top_k(t, {seq.begin(), seq.end()}, 10);
    const double c = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    for (auto& x : t) x *= c;
    for (auto& v : seq) {
      for (auto& x : v) x *= c;
    }
    const auto after = top_k(t, {seq.begin(), seq.end()}, 10);
    for (std::size_t j = 0; j < 10; ++j) {
      CHECK(before[j].index == after[j].index);
      CHECK(scheme.bin(before[j].similarity) == scheme.bin(after[j].similarity));
    }
  }
}

TEST_CASE("sim_extract: bin plus position embeddings, concatenated in rank order") {
  BinningScheme scheme{20, 8};
  GraphTables graph(4, 1);
  FeatureTables features(4, scheme, 2);
  Rng rng(5);
  for (EntityId id = 0; id < 6; ++id) {
    const auto v = random_vector(rng, 4, 1.0);
    graph.items.set(id, v);
  }
  const auto seq = clicks_of({1, 2, 3, 4, 5});
  const auto f = sim_extract(0, EntityType::Item, seq, EntityType::Item, graph, features, scheme, 3);
  const auto r = top_k(0, EntityType::Item, seq, EntityType::Item, graph, 3);
  REQUIRE(f.entries.size() == 3);
  REQUIRE(f.vector.size() == 12);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(f.entries[j].first == scheme.bin(r[j].similarity));
    CHECK(f.entries[j].second == r[j].index);
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(f.vector[j * 4 + d] == features.bins.at(f.entries[j].first)[d] + features.positions.at(f.entries[j].second)[d]);
    }
  }
}

TEST_CASE("sim_extract: empty sequence is k pad entries") {
  BinningScheme scheme{20, 8};
  GraphTables graph(4, 1);
  FeatureTables features(4, scheme, 2);
  const auto f = sim_extract(0, EntityType::Item, {}, EntityType::Item, graph, features, scheme, 5);
  REQUIRE(f.entries.size() == 5);
  for (const auto& [b, p] : f.entries) {
    CHECK(b == 20);
    CHECK(p == 8);
  }
  CHECK(f.vector == padded_feature(features, scheme, 5).vector);
  CHECK(f.vector == sim_extract(3, EntityType::Item, {}, EntityType::Item, graph, features, scheme, 5).vector);

  // Short sequences are padded after the real entries.
  const auto g = sim_extract(0, EntityType::Item, clicks_of({1, 2}), EntityType::Item, graph, features, scheme, 5);
  CHECK(g.entries[1].first != 20);
  CHECK(g.entries[2] == std::pair<std::size_t, std::size_t>{20, 8});
}

TEST_CASE("build_features: three features of constant size, padded q2q for an empty query history") {
  BinningScheme scheme{20, 30};
  GraphTables graph(4, 1);
  FeatureTables features(4, scheme, 2);
  FeatureOptions options;
  options.k = 10;
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    TrainingSample s;
    s.click_seq = clicks_of(std::vector<EntityId>(static_cast<std::size_t>(trial % 25), 3));
    for (int i = 0; i < trial % 4; ++i) s.query_seq.push_back({EventKind::Query, EntityId(i), i, {0}});
    s.current_query = {EventKind::Query, 9, 100, {0}};
    s.target_item = {EventKind::Click, 1, 101, {0}};
    const auto f = build_features(s, graph, features, scheme, options);
    CHECK(f.i2i.vector.size() + f.q2q.vector.size() + f.q2i.vector.size() == 3 * 10 * 4);
    if (s.query_seq.empty()) CHECK(f.q2q.vector == padded_feature(features, scheme, 10).vector);
  }
}

TEST_CASE("build_features: q2i reads the query table for the anchor and the item table for the sequence") {
  BinningScheme scheme{20, 10};
  GraphTables graph(2, 1);
  FeatureTables features(2, scheme, 2);
  graph.queries.set(5, std::vector<double>{1.0, 0.0});
  graph.items.set(5, std::vector<double>{-1.0, 0.0});  // same id, opposite direction
  graph.items.set(7, std::vector<double>{1.0, 0.0});
  TrainingSample s;
  s.click_seq = clicks_of({7});
  s.current_query = {EventKind::Query, 5, 100, {0}};
  s.target_item = {EventKind::Click, 5, 101, {0}};
  FeatureOptions options;
  options.k = 1;
  const auto f = build_features(s, graph, features, scheme, options);
  CHECK(f.q2i.entries[0].first == 19);  // cos(query 5, item 7) = 1
  CHECK(f.i2i.entries[0].first == 0);   // cos(item 5, item 7) = -1
}

TEST_CASE("build_features: without the query branch q2q and q2i are padded") {
  BinningScheme scheme{20, 10};
  GraphTables graph(2, 1);
  FeatureTables features(2, scheme, 2);
  TrainingSample s;
  s.click_seq = clicks_of({1, 2, 3});
  s.query_seq = {{EventKind::Query, 4, 0, {0}}};
  s.current_query = {EventKind::Query, 5, 100, {0}};
  s.target_item = {EventKind::Click, 6, 101, {0}};
  FeatureOptions options;
  options.k = 4;
  options.use_query = false;
  const auto f = build_features(s, graph, features, scheme, options);
  CHECK(f.q2q.vector == padded_feature(features, scheme, 4).vector);
  CHECK(f.q2i.vector == padded_feature(features, scheme, 4).vector);
}

TEST_CASE("with zeroed positions, permuting the sequence leaves the feature unchanged") {
  BinningScheme scheme{20, 40};
  GraphTables graph(6, 1);
  FeatureTables features(6, scheme, 2);
  features.positions.fill_zero();
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EntityId> ids;
    for (int i = 0; i < 25; ++i) ids.push_back(std::uniform_int_distribution<EntityId>(0, 60)(rng));
    const auto a = sim_extract(99, EntityType::Item, clicks_of(ids), EntityType::Item, graph, features, scheme, 10);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto b = sim_extract(99, EntityType::Item, clicks_of(ids), EntityType::Item, graph, features, scheme, 10);
    CHECK(a.vector == b.vector);
  }
}

TEST_CASE("sim_extract rejects an index beyond the position table") {
  BinningScheme scheme{20, 3};
  GraphTables graph(2, 1);
  FeatureTables features(2, scheme, 2);
  CHECK_THROWS_AS(sim_extract(0, EntityType::Item, clicks_of({1, 2, 3, 4}), EntityType::Item, graph, features, scheme, 4),
                  ContractViolation);
}
