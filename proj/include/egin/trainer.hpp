/**
 * @file trainer.hpp
 * @brief Joint stream-style training of graph embeddings and the CTR head.
 *
 * Each batch: (1) push sequence ids into the negative queues, (2) build
 * edges per sample and accumulate the graph loss, (3) build similarity
 * features from the pre-update tables and backpropagate L_CTR, (4) apply
 * the updates for L = L_CTR + alpha L_i2i + beta L_q2q + gamma L_q2i.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "egin/ctr_net.hpp"
#include "egin/embedding.hpp"
#include "egin/graph_edges.hpp"
#include "egin/ingest.hpp"
#include "egin/multi_interest.hpp"

namespace egin {

struct TrainConfig {
  std::size_t dim = 10;
  std::vector<std::size_t> hidden{64, 32};
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double lr_ctr = 0.002;
  double lr_graph = 0.01;
  OptimizerKind optimizer_ctr = OptimizerKind::Adam;
  OptimizerKind optimizer_graph = OptimizerKind::Adam;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  bool shuffle = false;
  std::size_t eval_every = 0;  // 0: evaluate only at the end

  std::size_t n_neg = 100;
  std::size_t queue_capacity = 10'000;
  double subsample_threshold = 0.0;  // 0 disables

  EdgeConfig edges;
  SequenceLimits limits;
  std::size_t top_k = 10;
  std::size_t num_bins = 20;

  bool freeze_graph = false;  // no graph learning at all (tables stay at init)
  bool use_pos_emb = true;

  std::uint64_t seed = 1;

  void validate() const;
  BinningScheme scheme() const;
  FeatureOptions feature_options() const;
};

/// Everything needed to score a sample.
struct EginModel {
  TrainConfig config;
  GraphTables graph;
  FeatureTables features;
  MlpParams mlp;

  EginModel(const TrainConfig& cfg, std::size_t other_dim);

  InterestFeatures features_for(const TrainingSample& sample) const;
  double predict(const TrainingSample& sample) const;
  std::vector<double> predict(const std::vector<TrainingSample>& samples) const;
};

struct BatchMetrics {
  std::size_t step = 0;
  double l_ctr = 0.0;
  double l_i2i = 0.0;
  double l_q2q = 0.0;
  double l_q2i = 0.0;
  double total = 0.0;
  std::size_t samples = 0;
  GraphLossTerms graph;
};

/// One structured line: step=.. l_ctr=.. l_i2i=.. l_q2q=.. l_q2i=.. total=..
void write_metrics_line(std::ostream& out, const BatchMetrics& m);

/// Trims sequences to the limits (most recent kept) and re-derives seeds.
void apply_limits(TrainingSample& sample, const SequenceLimits& limits);

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::size_t other_dim);

  /// One joint update on a batch. rng drives seeds mixture and negatives.
  BatchMetrics train_step(std::span<const TrainingSample> batch, Rng& rng);

  /// Runs the configured epochs. Writes one metrics line per batch and
  /// "eval step=.. valid_auc=.." lines when valid is given. Throws on an
  /// empty stream and on a non-finite loss.
  std::vector<BatchMetrics> fit(const std::vector<TrainingSample>& samples,
                                const std::vector<TrainingSample>* valid = nullptr,
                                std::ostream* metrics_log = nullptr);

  const EginModel& model() const noexcept { return model_; }
  EginModel& model() noexcept { return model_; }
  const NegQueues& queues() const noexcept { return queues_; }
  NegQueues& queues() noexcept { return queues_; }

 private:
  TrainConfig cfg_;
  EginModel model_;
  NegQueues queues_;
  SparseOptimizer opt_items_;
  SparseOptimizer opt_queries_;
  SparseOptimizer opt_bins_;
  SparseOptimizer opt_positions_;
  MlpOptimizer opt_mlp_;
  GraphGradients graph_grads_;
  CtrGradients ctr_grads_;
  Rng push_rng_;
  std::size_t step_ = 0;
};

/// Model directory layout: config.cfg, graph_embeddings.tsv,
/// feature_embeddings.tsv, mlp.txt. Embedding rows are written with 17
/// significant digits so a reload is exact.
void save_model(const EginModel& model, const std::filesystem::path& dir, const std::string& config_text);
EginModel load_model(const std::filesystem::path& dir, const TrainConfig& cfg);

/// `entity_type \t id \t v_1 ... v_dim`, rows in insertion order.
void write_embeddings(std::ostream& out, const EmbeddingTable& table, int precision);
void read_embeddings(std::istream& in, std::vector<EmbeddingTable*> tables);

}  // namespace egin
