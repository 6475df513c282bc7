#include "egin/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace egin {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractViolation("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U of the positives, kept integral so the result
  // matches a pairwise count exactly.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    twice_u += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    n_pos += pos;
    n_neg += neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("auc needs at least one positive and one negative");
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

double auc(const std::vector<std::pair<double, int>>& scored) {
  std::vector<double> s;
  std::vector<int> l;
  s.reserve(scored.size());
  l.reserve(scored.size());
  for (const auto& [score, label] : scored) {
    s.push_back(score);
    l.push_back(label);
  }
  return auc(s, l);
}

double relaimpr(double auc_model, double auc_base) {
  if (!(auc_base > 0.5)) throw UndefinedMetric("relaimpr needs a baseline AUC above 0.5");
  return ((auc_model - 0.5) / (auc_base - 0.5) - 1.0) * 100.0;
}

SimilarityReport category_similarity_report(const EmbeddingTable& table,
                                            const std::map<EntityId, CategoryId>& categories,
                                            std::size_t n_pairs, Rng& rng) {
  std::map<CategoryId, std::vector<EntityId>> members;
  for (const auto& [id, c] : categories) members[c].push_back(id);
  std::vector<EntityId> all;
  std::vector<EntityId> pairable;  // items whose category has a second member
  std::size_t rich_categories = 0;
  for (const auto& [c, ids] : members) {
    all.insert(all.end(), ids.begin(), ids.end());
    if (ids.size() >= 2) {
      ++rich_categories;
      pairable.insert(pairable.end(), ids.begin(), ids.end());
    }
  }
  if (members.size() < 2 || rich_categories < 2) {
    throw Error("category similarity needs at least two categories with two or more items each");
  }

  auto pick = [&](const std::vector<EntityId>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::vector<double> sa;
  std::vector<double> sb;
  auto cos = [&](EntityId a, EntityId b) { return cosine_sim(table.view(a, sa), table.view(b, sb)); };

  SimilarityReport report;
  report.pairs = n_pairs;
  double intra = 0.0;
  double inter = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto a = pick(pairable);
    const auto& same = members[categories.at(a)];
    EntityId b = a;
    while (b == a) b = pick(same);
    intra += cos(a, b);

    const auto x = pick(all);
    EntityId y = x;
    while (categories.at(y) == categories.at(x)) y = pick(all);
    inter += cos(x, y);
  }
  report.intra = n_pairs ? intra / static_cast<double>(n_pairs) : 0.0;
  report.inter = n_pairs ? inter / static_cast<double>(n_pairs) : 0.0;
  return report;
}

std::map<EntityId, CategoryId> item_categories(const std::vector<TrainingSample>& samples) {
  std::map<EntityId, CategoryId> out;
  for (const auto& s : samples) {
    out.emplace(s.target_item.entity_id, s.target_item.categories.front());
    for (const auto& c : s.click_seq) out.emplace(c.entity_id, c.categories.front());
  }
  return out;
}

std::map<EntityId, CategoryId> item_categories(const std::vector<BehaviorSequence>& log) {
  std::map<EntityId, CategoryId> out;
  for (const auto& seq : log) {
    for (const auto& ev : seq.events) {
      if (ev.kind == EventKind::Click) out.emplace(ev.entity_id, ev.categories.front());
    }
  }
  return out;
}

EvalReport evaluate_scores(std::span<const double> scores, const std::vector<TrainingSample>& samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  EvalReport r;
  for (const auto& s : samples) {
    labels.push_back(s.label);
    (s.label == 1 ? r.n_pos : r.n_neg) += 1;
  }
  r.auc = auc(scores, labels);
  return r;
}

EvalReport evaluate_model(const EginModel& model, const std::vector<TrainingSample>& samples) {
  const auto scores = model.predict(samples);
  return evaluate_scores(scores, samples);
}

void write_report(std::ostream& out, const EvalReport& r) {
  const auto prec = out.precision();
  out << std::setprecision(6);
  out << "auc=" << r.auc << '\n';
  if (r.n_pos + r.n_neg > 0) out << "n_pos=" << r.n_pos << "\nn_neg=" << r.n_neg << '\n';
  if (r.relaimpr_vs) out << "relaimpr_vs_" << r.relaimpr_vs->first << '=' << r.relaimpr_vs->second << "%\n";
  if (!r.ablations.empty()) {
    out << "\nMethod\tAUC\tDiff %\n";
    for (std::size_t i = 0; i < r.ablations.size(); ++i) {
      const auto& row = r.ablations[i];
      out << row.name << '\t' << std::fixed << std::setprecision(4) << row.auc << '\t';
      if (i == 0) {
        out << '\n';
      } else {
        out << std::showpos << std::setprecision(2) << row.diff_pct << std::noshowpos << "%\n";
      }
      out.unsetf(std::ios::fixed);
    }
  }
  out.precision(prec);
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::Full:
      return "EGIN";
    case Ablation::NoGraph:
      return "EGIN w/o graph";
    case Ablation::NoQuery:
      return "EGIN w/o query";
    case Ablation::NoPosEmb:
      return "EGIN w/o pos_emb";
  }
  return "?";
}

TrainConfig ablation_config(const TrainConfig& base, Ablation a) {
  TrainConfig cfg = base;
  switch (a) {
    case Ablation::Full:
      break;
    case Ablation::NoGraph:
      cfg.alpha = cfg.beta = cfg.gamma = 0.0;
      cfg.freeze_graph = true;
      break;
    case Ablation::NoQuery:
      cfg.edges.use_query_edges = false;
      break;
    case Ablation::NoPosEmb:
      cfg.use_pos_emb = false;
      break;
  }
  return cfg;
}

EvalReport run_ablations(const TrainConfig& base, const std::vector<TrainingSample>& train,
                         const std::vector<TrainingSample>& valid) {
  if (train.empty()) throw Error("training stream is empty");
  const auto other_dim = train.front().other_features.size();
  EvalReport report;
  for (auto a : {Ablation::Full, Ablation::NoGraph, Ablation::NoQuery, Ablation::NoPosEmb}) {
    Trainer trainer(ablation_config(base, a), other_dim);
    trainer.fit(train);
    const auto r = evaluate_model(trainer.model(), valid);
    if (a == Ablation::Full) {
      report.auc = r.auc;
      report.n_pos = r.n_pos;
      report.n_neg = r.n_neg;
    }
    report.ablations.push_back({to_string(a), r.auc, (r.auc - report.auc) * 100.0});
  }
  return report;
}

// ---------------------------------------------------------------------------
// DNN sum-pooling baseline

DnnPoolingModel::DnnPoolingModel(const TrainConfig& cfg, std::size_t other_dim)
    : cfg_(cfg),
      items_(EmbeddingTable::with_default_init(EntityType::Item, cfg.dim, cfg.seed ^ 0x1f83d9abfb41bd6bULL)),
      queries_(EmbeddingTable::with_default_init(EntityType::Query, cfg.dim, cfg.seed ^ 0x1f83d9abfb41bd6bULL)),
      mlp_(MlpParams::init(3 * cfg.dim + other_dim, cfg.hidden, cfg.seed ^ 0x5be0cd19137e2179ULL)) {}

Eigen::VectorXd DnnPoolingModel::input(const TrainingSample& s) const {
  const auto dim = static_cast<Eigen::Index>(cfg_.dim);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * dim + static_cast<Eigen::Index>(s.other_features.size()));
  std::vector<double> scratch;
  for (const auto& c : s.click_seq) {
    const auto v = items_.view(c.entity_id, scratch);
    for (Eigen::Index d = 0; d < dim; ++d) x[d] += v[static_cast<std::size_t>(d)];
  }
  const auto t = items_.view(s.target_item.entity_id, scratch);
  for (Eigen::Index d = 0; d < dim; ++d) x[dim + d] = t[static_cast<std::size_t>(d)];
  const auto q = queries_.view(s.current_query.entity_id, scratch);
  for (Eigen::Index d = 0; d < dim; ++d) x[2 * dim + d] = q[static_cast<std::size_t>(d)];
  for (std::size_t i = 0; i < s.other_features.size(); ++i) {
    x[3 * dim + static_cast<Eigen::Index>(i)] = s.other_features[i];
  }
  return x;
}

double DnnPoolingModel::predict(const TrainingSample& s) const { return mlp_forward(mlp_, input(s)); }

void DnnPoolingModel::fit(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw Error("training stream is empty");
  std::vector<TrainingSample> data = samples;
  for (auto& s : data) apply_limits(s, cfg_.limits);

  MlpOptimizer opt_mlp(cfg_.optimizer_ctr, cfg_.lr_ctr);
  SparseOptimizer opt_items(cfg_.optimizer_ctr, cfg_.lr_ctr);
  SparseOptimizer opt_queries(cfg_.optimizer_ctr, cfg_.lr_ctr);
  MlpParams grads = MlpParams::zeros_like(mlp_);
  GradientBuffer item_grads(cfg_.dim);
  GradientBuffer query_grads(cfg_.dim);
  Rng rng(mix64(cfg_.seed ^ 0xbb67ae8584caa73bULL));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const auto dim = cfg_.dim;

  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    if (cfg_.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      const auto end = std::min(order.size(), start + cfg_.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.set_zero();
      item_grads.clear();
      query_grads.clear();
      for (auto i = start; i < end; ++i) {
        const auto& s = data[order[i]];
        for (const auto& c : s.click_seq) items_.ensure(c.entity_id);
        items_.ensure(s.target_item.entity_id);
        queries_.ensure(s.current_query.entity_id);
        MlpCache cache;
        const double p = mlp_forward(mlp_, input(s), &cache);
        const auto dx = mlp_backward(mlp_, cache, p - static_cast<double>(s.label), scale, grads);
        for (const auto& c : s.click_seq) {
          auto g = item_grads.slot(items_.find(c.entity_id));
          for (std::size_t d = 0; d < dim; ++d) g[d] += scale * dx[static_cast<Eigen::Index>(d)];
        }
        auto gt = item_grads.slot(items_.find(s.target_item.entity_id));
        for (std::size_t d = 0; d < dim; ++d) gt[d] += scale * dx[static_cast<Eigen::Index>(dim + d)];
        auto gq = query_grads.slot(queries_.find(s.current_query.entity_id));
        for (std::size_t d = 0; d < dim; ++d) gq[d] += scale * dx[static_cast<Eigen::Index>(2 * dim + d)];
      }
      opt_mlp.apply(mlp_, grads);
      opt_items.apply(items_, item_grads);
      opt_queries.apply(queries_, query_grads);
    }
  }
}

EvalReport dnn_pooling_baseline(const std::vector<TrainingSample>& train,
                                const std::vector<TrainingSample>& valid, const TrainConfig& cfg) {
  if (train.empty()) throw Error("training stream is empty");
  DnnPoolingModel model(cfg, train.front().other_features.size());
  model.fit(train);
  std::vector<double> scores;
  scores.reserve(valid.size());
  for (const auto& s : valid) {
    auto trimmed = s;
    apply_limits(trimmed, cfg.limits);
    scores.push_back(model.predict(trimmed));
  }
  return evaluate_scores(scores, valid);
}

}  // namespace egin
