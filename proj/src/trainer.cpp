#include "egin/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "egin/evaluate.hpp"

namespace egin {

void TrainConfig::validate() const {
  if (dim == 0) throw ConfigError("dim", "must be > 0");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden", "layer sizes must be > 0");
  }
  if (!(alpha >= 0.0)) throw ConfigError("alpha", "must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("beta", "must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma", "must be >= 0");
  if (!(lr_ctr >= 0.0)) throw ConfigError("lr_ctr", "must be >= 0");
  if (!(lr_graph >= 0.0)) throw ConfigError("lr_graph", "must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size", "must be > 0");
  if (epochs == 0) throw ConfigError("epochs", "must be > 0");
  if (n_neg == 0) throw ConfigError("n_neg", "must be > 0");
  if (queue_capacity == 0) throw ConfigError("neg_queue_capacity", "must be > 0");
  if (!(subsample_threshold >= 0.0)) throw ConfigError("subsample_threshold", "must be >= 0");
  if (top_k == 0) throw ConfigError("top_k", "must be > 0");
  if (num_bins == 0) throw ConfigError("num_bins", "must be > 0");
  if (limits.max_click_len == 0) throw ConfigError("max_click_len", "must be > 0");
  if (limits.max_query_len == 0) throw ConfigError("max_query_len", "must be > 0");
  edges.validate();
}

BinningScheme TrainConfig::scheme() const {
  return {num_bins, std::max(limits.max_click_len, limits.max_query_len)};
}

FeatureOptions TrainConfig::feature_options() const {
  return {top_k, edges.use_query_edges, limits.include_current_query};
}

EginModel::EginModel(const TrainConfig& cfg, std::size_t other_dim)
    : config(cfg),
      graph(cfg.dim, cfg.seed),
      features(cfg.dim, cfg.scheme(), cfg.seed),
      mlp(MlpParams::init(3 * cfg.top_k * cfg.dim + other_dim, cfg.hidden, cfg.seed)) {
  if (!cfg.use_pos_emb) features.positions.fill_zero();
}

InterestFeatures EginModel::features_for(const TrainingSample& sample) const {
  return build_features(sample, graph, features, config.scheme(), config.feature_options());
}

double EginModel::predict(const TrainingSample& sample) const {
  return forward(features_for(sample), sample.other_features, mlp);
}

std::vector<double> EginModel::predict(const std::vector<TrainingSample>& samples) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.click_seq.size() > config.limits.max_click_len || s.query_seq.size() > config.limits.max_query_len) {
      auto trimmed = s;
      apply_limits(trimmed, config.limits);
      out.push_back(predict(trimmed));
    } else {
      out.push_back(predict(s));
    }
  }
  return out;
}

void write_metrics_line(std::ostream& out, const BatchMetrics& m) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10) << "step=" << m.step << " l_ctr=" << m.l_ctr << " l_i2i=" << m.l_i2i
      << " l_q2q=" << m.l_q2q << " l_q2i=" << m.l_q2i << " total=" << m.total << '\n';
  out.flags(flags);
  out.precision(prec);
}

void apply_limits(TrainingSample& s, const SequenceLimits& limits) {
  auto trim = [](std::vector<BehaviorEvent>& seq, std::size_t n) {
    if (seq.size() > n) seq.erase(seq.begin(), seq.end() - static_cast<std::ptrdiff_t>(n));
  };
  trim(s.click_seq, limits.max_click_len);
  trim(s.query_seq, limits.max_query_len);
  s.seeds_seq = derive_seeds_seq(s.click_seq, s.current_query);
}

Trainer::Trainer(const TrainConfig& cfg, std::size_t other_dim)
    : cfg_((cfg.validate(), cfg)),
      model_(cfg, other_dim),
      queues_(cfg.queue_capacity, cfg.subsample_threshold),
      opt_items_(cfg.optimizer_graph, cfg.lr_graph),
      opt_queries_(cfg.optimizer_graph, cfg.lr_graph),
      opt_bins_(cfg.optimizer_ctr, cfg.lr_ctr),
      opt_positions_(cfg.optimizer_ctr, cfg.lr_ctr),
      opt_mlp_(cfg.optimizer_ctr, cfg.lr_ctr),
      graph_grads_(cfg.dim),
      ctr_grads_(model_.mlp, cfg.dim),
      push_rng_(mix64(cfg.seed ^ 0x3c6ef372fe94f82bULL)) {}

BatchMetrics Trainer::train_step(std::span<const TrainingSample> batch, Rng& rng) {
  BatchMetrics m;
  m.step = ++step_;
  m.samples = batch.size();
  if (batch.empty()) return m;

  if (!cfg_.freeze_graph) {
    // (1) warm the queues with every id of the batch's sequences
    for (const auto& s : batch) {
      for (const auto& c : s.click_seq) queues_.items.push(EntityType::Item, c.entity_id, push_rng_);
      for (const auto& q : s.query_seq) queues_.queries.push(EntityType::Query, q.entity_id, push_rng_);
      queues_.queries.push(EntityType::Query, s.current_query.entity_id, push_rng_);
    }

    // (2) edges and graph loss
    std::vector<Edge> edges;
    for (const auto& s : batch) {
      auto e = build_all_edges(s, cfg_.edges, rng);
      edges.insert(edges.end(), e.begin(), e.end());
    }
    graph_grads_.clear();
    m.graph = batch_graph_loss(edges, model_.graph, queues_, cfg_.n_neg, rng,
                               {cfg_.alpha, cfg_.beta, cfg_.gamma}, graph_grads_);
    m.l_i2i = m.graph.l_i2i;
    m.l_q2q = m.graph.l_q2q;
    m.l_q2i = m.graph.l_q2i;
  }

  // (3) CTR loss against the pre-update graph tables
  ctr_grads_.clear();
  const double scale = 1.0 / static_cast<double>(batch.size());
  double ctr_sum = 0.0;
  for (const auto& s : batch) {
    const auto f = model_.features_for(s);
    ctr_sum += ctr_backward(f, s.other_features, s.label, model_.mlp, model_.features, scale, ctr_grads_,
                            cfg_.use_pos_emb);
  }
  m.l_ctr = ctr_sum * scale;
  m.total = m.l_ctr + cfg_.alpha * m.l_i2i + cfg_.beta * m.l_q2q + cfg_.gamma * m.l_q2i;
  if (!std::isfinite(m.total)) {
    throw NumericError("non-finite loss at step " + std::to_string(m.step) + " (l_ctr=" +
                       std::to_string(m.l_ctr) + ", l_i2i=" + std::to_string(m.l_i2i) + ", l_q2q=" +
                       std::to_string(m.l_q2q) + ", l_q2i=" + std::to_string(m.l_q2i) + ")");
  }

  // (4) updates
  if (!cfg_.freeze_graph) {
    opt_items_.apply(model_.graph.items, graph_grads_.items);
    opt_queries_.apply(model_.graph.queries, graph_grads_.queries);
  }
  opt_mlp_.apply(model_.mlp, ctr_grads_.mlp);
  opt_bins_.apply(model_.features.bins, ctr_grads_.bins);
  if (cfg_.use_pos_emb) opt_positions_.apply(model_.features.positions, ctr_grads_.positions);
  return m;
}

std::vector<BatchMetrics> Trainer::fit(const std::vector<TrainingSample>& samples,
                                       const std::vector<TrainingSample>* valid, std::ostream* metrics_log) {
  if (samples.empty()) throw Error("training stream is empty");
  std::vector<TrainingSample> data = samples;
  for (auto& s : data) apply_limits(s, cfg_.limits);
  std::vector<TrainingSample> valid_data;
  if (valid) {
    valid_data = *valid;
    for (auto& s : valid_data) apply_limits(s, cfg_.limits);
  }

  Rng rng(mix64(cfg_.seed ^ 0xbb67ae8584caa73bULL));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<BatchMetrics> log;
  std::vector<TrainingSample> batch;

  auto evaluate_now = [&](std::size_t step) {
    if (!valid || valid_data.empty() || !metrics_log) return;
    const auto scores = model_.predict(valid_data);
    std::vector<int> labels;
    labels.reserve(valid_data.size());
    for (const auto& s : valid_data) labels.push_back(s.label);
    *metrics_log << "eval step=" << step << " valid_auc=" << std::setprecision(10) << auc(scores, labels)
                 << '\n';
  };

  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    if (cfg_.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      const auto end = std::min(order.size(), start + cfg_.batch_size);
      batch.clear();
      for (auto i = start; i < end; ++i) batch.push_back(data[order[i]]);
      auto m = train_step(batch, rng);
      if (metrics_log) write_metrics_line(*metrics_log, m);
      log.push_back(m);
      if (cfg_.eval_every && m.step % cfg_.eval_every == 0) evaluate_now(m.step);
    }
  }
  if (!cfg_.eval_every || step_ % cfg_.eval_every != 0) evaluate_now(step_);
  return log;
}

// ---------------------------------------------------------------------------
// Model persistence

void write_embeddings(std::ostream& out, const EmbeddingTable& table, int precision) {
  out << std::setprecision(precision);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << to_string(table.entity_type()) << '\t' << table.id_at(r);
    for (double v : table.row(r)) out << '\t' << v;
    out << '\n';
  }
}

void read_embeddings(std::istream& in, std::vector<EmbeddingTable*> tables) {
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string type_name;
    EntityId id = 0;
    if (!(fields >> type_name >> id)) throw ParseError("bad embedding row: " + line);
    const auto type = entity_type_from_string(type_name);
    EmbeddingTable* table = nullptr;
    for (auto* t : tables) {
      if (t->entity_type() == type) table = t;
    }
    if (!table) throw ParseError("unexpected embedding type '" + type_name + "'");
    values.clear();
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (values.size() != table->dim()) throw ParseError("embedding row has wrong dimension: " + line);
    table->set(id, values);
  }
}

void save_model(const EginModel& model, const std::filesystem::path& dir, const std::string& config_text) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("config.cfg");
    out << config_text;
  }
  {
    auto out = open("graph_embeddings.tsv");
    write_embeddings(out, model.graph.items, 17);
    write_embeddings(out, model.graph.queries, 17);
  }
  {
    auto out = open("feature_embeddings.tsv");
    write_embeddings(out, model.features.bins, 17);
    write_embeddings(out, model.features.positions, 17);
  }
  {
    auto out = open("mlp.txt");
    write_mlp(out, model.mlp);
  }
}

EginModel load_model(const std::filesystem::path& dir, const TrainConfig& cfg) {
  auto open = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) throw IoError("cannot read " + (dir / name).string());
    return in;
  };
  MlpParams mlp;
  {
    auto in = open("mlp.txt");
    mlp = read_mlp(in);
  }
  const std::size_t feature_dim = 3 * cfg.top_k * cfg.dim;
  if (mlp.input_dim() < feature_dim) throw ParseError("MLP input narrower than the configured features");
  EginModel model(cfg, mlp.input_dim() - feature_dim);
  model.mlp = std::move(mlp);
  {
    auto in = open("graph_embeddings.tsv");
    read_embeddings(in, {&model.graph.items, &model.graph.queries});
  }
  {
    auto in = open("feature_embeddings.tsv");
    read_embeddings(in, {&model.features.bins, &model.features.positions});
  }
  return model;
}

}  // namespace egin
