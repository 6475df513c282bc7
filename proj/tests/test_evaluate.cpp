#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "auc_oracle.hpp"
#include "egin/datagen.hpp"
#include "egin/evaluate.hpp"
#include "relaimpr_rows.hpp"

using namespace egin;

TEST_CASE("auc: separated and all-equal scores") {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  CHECK(auc(s, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auc(s, std::vector<int>{1, 1, 0, 0}) == 0.0);
  CHECK(auc(std::vector<double>(6, 0.3), std::vector<int>{0, 1, 0, 1, 1, 0}) == 0.5);
  CHECK(auc({{0.4, 1}, {0.4, 0}, {0.9, 1}}) == 0.75);
}

TEST_CASE("auc: single class is undefined") {
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
  CHECK_THROWS_AS(auc(std::vector<double>{}, std::vector<int>{}), UndefinedMetric);
}

TEST_CASE("auc: matches the pairwise oracle exactly, ties included") {
  Rng rng(1);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int trial = 0; trial < 300; ++trial) {
    egin::testing::random_scored_set(rng, 300, scores, labels);
    CHECK(auc(scores, labels) == egin::testing::pairwise_auc(scores, labels));
  }
}

TEST_CASE("auc: invariant under strictly monotone transforms") {
  Rng rng(2);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int trial = 0; trial < 100; ++trial) {
    egin::testing::random_scored_set(rng, 200, scores, labels);
    auto t = scores;
    for (auto& x : t) x = std::exp(3.0 * x) - 7.0;
    CHECK(auc(scores, labels) == auc(t, labels));
  }
}

TEST_CASE("relaimpr reproduces the published rows") {
  for (const auto& r : egin::testing::kRelaImprRows) {
    INFO(r.name);
    CHECK(std::abs(relaimpr(r.auc_model, r.auc_base) - r.expected_pct) <= 0.01);
  }
  CHECK(relaimpr(0.8833, 0.8715) == doctest::Approx(3.1763).epsilon(1e-4));
}

TEST_CASE("relaimpr identities and domain") {
  for (double x : {0.5001, 0.6, 0.75, 0.99, 1.0}) CHECK(relaimpr(x, x) == 0.0);
  CHECK(relaimpr(0.5, 0.75) == -100.0);
  CHECK_THROWS_AS(relaimpr(0.7, 0.5), UndefinedMetric);
  CHECK_THROWS_AS(relaimpr(0.7, 0.3), UndefinedMetric);
}

namespace {

std::map<EntityId, CategoryId> two_by_n(std::size_t n_categories, std::size_t per) {
  std::map<EntityId, CategoryId> m;
  for (std::size_t c = 0; c < n_categories; ++c) {
    for (std::size_t i = 0; i < per; ++i) m[EntityId(c * per + i)] = CategoryId(c);
  }
  return m;
}

}  // namespace

TEST_CASE("similarity report: identical embeddings") {
  EmbeddingTable t(EntityType::Item, 3, 1, 0.1);
  const auto cats = two_by_n(3, 4);
  for (const auto& [id, c] : cats) t.set(id, std::vector<double>{1.0, 2.0, 3.0});
  Rng rng(3);
  const auto r = category_similarity_report(t, cats, 500, rng);
  CHECK(r.intra == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.inter == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pairs == 500);
}

TEST_CASE("similarity report: one-hot per category") {
  EmbeddingTable t(EntityType::Item, 4, 1, 0.1);
  const auto cats = two_by_n(4, 5);
  for (const auto& [id, c] : cats) {
    std::vector<double> v(4, 0.0);
    v[c] = 1.0 + 0.1 * static_cast<double>(id);
    t.set(id, v);
  }
  Rng rng(4);
  const auto r = category_similarity_report(t, cats, 1000, rng);
  CHECK(r.intra == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.inter == 0.0);
}

TEST_CASE("similarity report is invariant to per-vector positive rescaling") {
  EmbeddingTable a(EntityType::Item, 5, 7, 0.5);
  const auto cats = two_by_n(3, 10);
  for (const auto& [id, c] : cats) a.ensure(id);
  EmbeddingTable b = a;
  Rng scale_rng(5);
  std::uniform_real_distribution<double> scale(0.01, 50.0);
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const double k = scale(scale_rng);
    for (auto& x : b.row(r)) x *= k;
  }
  Rng r1(6);
  Rng r2(6);
  const auto ra = category_similarity_report(a, cats, 2000, r1);
  const auto rb = category_similarity_report(b, cats, 2000, r2);
  CHECK(ra.intra == doctest::Approx(rb.intra).epsilon(1e-12));
  CHECK(ra.inter == doctest::Approx(rb.inter).epsilon(1e-12));
}

TEST_CASE("similarity report needs two categories with two items") {
  EmbeddingTable t(EntityType::Item, 2, 1, 0.5);
  Rng rng(7);
  CHECK_THROWS_AS(category_similarity_report(t, two_by_n(1, 10), 10, rng), Error);
  CHECK_THROWS_AS(category_similarity_report(t, {{1, 0}, {2, 0}, {3, 1}}, 10, rng), Error);
  CHECK_NOTHROW(category_similarity_report(t, {{1, 0}, {2, 0}, {3, 1}, {4, 1}}, 10, rng));
}

TEST_CASE("item_categories collects clicks and targets") {
  TrainingSample s;
  s.click_seq = {{EventKind::Click, 4, 0, {2, 5}}};
  s.target_item = {EventKind::Click, 9, 1, {3}};
  const auto m = item_categories(std::vector<TrainingSample>{s});
  CHECK(m.at(4) == 2);
  CHECK(m.at(9) == 3);
  CHECK(m.size() == 2);
}

namespace {

const LabeledSplit& small_split() {
  static const LabeledSplit split = [] {
    GenConfig g;
    g.num_users = 300;
    g.num_items = 400;
    g.num_queries = 80;
    g.num_categories = 4;
    g.items_per_category = 100;
    g.seq_len_max = 40;
    g.seed = 5;
    return generate_split(g, generate_log(g));
  }();
  return split;
}

TrainConfig small_train() {
  TrainConfig c;
  c.dim = 6;
  c.hidden = {16, 8};
  c.n_neg = 10;
  c.limits.max_click_len = 20;
  c.limits.max_query_len = 20;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("ablation configs") {
  const auto base = small_train();
  const auto g = ablation_config(base, Ablation::NoGraph);
  CHECK(g.alpha == 0.0);
  CHECK(g.beta == 0.0);
  CHECK(g.gamma == 0.0);
  CHECK(g.freeze_graph);
  CHECK(!ablation_config(base, Ablation::NoQuery).edges.use_query_edges);
  CHECK(!ablation_config(base, Ablation::NoPosEmb).use_pos_emb);
  const auto f = ablation_config(base, Ablation::Full);
  CHECK(f.alpha == base.alpha);
  CHECK(f.edges.use_query_edges);
  CHECK(f.use_pos_emb);
  CHECK(to_string(Ablation::NoGraph) == "EGIN w/o graph");
}

TEST_CASE("run_ablations: four rows, diffs relative to the full model") {
  const auto report = run_ablations(small_train(), small_split().train, small_split().valid);
  REQUIRE(report.ablations.size() == 4);
  CHECK(report.ablations[0].name == "EGIN");
  CHECK(report.ablations[0].diff_pct == 0.0);
  CHECK(report.auc == report.ablations[0].auc);
  for (const auto& row : report.ablations) {
    CHECK(row.auc >= 0.0);
    CHECK(row.auc <= 1.0);
    CHECK(row.diff_pct == doctest::Approx((row.auc - report.auc) * 100.0).epsilon(1e-12));
  }
  std::ostringstream out;
  write_report(out, report);
  CHECK(out.str().find("Method\tAUC\tDiff %") != std::string::npos);
  CHECK(out.str().find("EGIN w/o pos_emb\t") != std::string::npos);
}

TEST_CASE("evaluate_scores and the report line") {
  std::vector<TrainingSample> samples(4);
  for (std::size_t i = 0; i < 4; ++i) samples[i].label = static_cast<int>(i % 2);
  auto r = evaluate_scores(std::vector<double>{0.1, 0.9, 0.2, 0.8}, samples);
  CHECK(r.auc == 1.0);
  CHECK(r.n_pos == 2);
  CHECK(r.n_neg == 2);
  r.relaimpr_vs = {"dnn", relaimpr(r.auc, 0.75)};
  std::ostringstream out;
  write_report(out, r);
  CHECK(out.str().find("auc=1") != std::string::npos);
  CHECK(out.str().find("relaimpr_vs_dnn=100") != std::string::npos);
}

TEST_CASE("DNN pooling: empty click sequence pools to zero") {
  auto cfg = small_train();
  DnnPoolingModel m(cfg, 2);
  TrainingSample s;
  s.target_item = {EventKind::Click, 3, 0, {0}};
  s.current_query = {EventKind::Query, 1, 0, {0}};
  s.other_features = {0.5, -0.5};
  const auto x = m.input(s);
  REQUIRE(x.size() == 3 * 6 + 2);
  for (Eigen::Index d = 0; d < 6; ++d) CHECK(x[d] == 0.0);
  CHECK(x[18] == 0.5);

  s.click_seq = {{EventKind::Click, 3, 0, {0}}, {EventKind::Click, 3, 1, {0}}};
  const auto y = m.input(s);
  for (Eigen::Index d = 0; d < 6; ++d) CHECK(y[d] == 2.0 * y[6 + d]);
}

TEST_CASE("DNN pooling baseline trains and is deterministic") {
  const auto a = dnn_pooling_baseline(small_split().train, small_split().valid, small_train());
  const auto b = dnn_pooling_baseline(small_split().train, small_split().valid, small_train());
  CHECK(a.auc == b.auc);
  CHECK(a.auc > 0.0);
  CHECK(a.auc < 1.0);
  CHECK(a.n_pos + a.n_neg == small_split().valid.size());
}
