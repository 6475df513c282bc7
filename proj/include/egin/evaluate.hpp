/**
 * @file evaluate.hpp
 * @brief AUC, RelaImpr, embedding similarity analysis, ablations and the
 *        sum-pooling DNN baseline.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "egin/trainer.hpp"

namespace egin {

/// Rank-statistic AUC, ties count one half. O(n log n). Throws UndefinedMetric
/// unless both labels are present.
double auc(std::span<const double> scores, std::span<const int> labels);
double auc(const std::vector<std::pair<double, int>>& scored);

/// Relative AUC improvement over a baseline, measured above 0.5, in percent.
double relaimpr(double auc_model, double auc_base);

struct SimilarityReport {
  double intra = 0.0;
  double inter = 0.0;
  std::size_t pairs = 0;
};

/// Mean cosine over n_pairs random same-category pairs and n_pairs random
/// cross-category pairs.
SimilarityReport category_similarity_report(const EmbeddingTable& table,
                                            const std::map<EntityId, CategoryId>& categories,
                                            std::size_t n_pairs, Rng& rng);

/// First category of every item seen in the samples (targets and clicks).
std::map<EntityId, CategoryId> item_categories(const std::vector<TrainingSample>& samples);
std::map<EntityId, CategoryId> item_categories(const std::vector<BehaviorSequence>& log);

struct AblationRow {
  std::string name;
  double auc = 0.0;
  double diff_pct = 0.0;  // (auc - auc_full) * 100
};

struct EvalReport {
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::optional<std::pair<std::string, double>> relaimpr_vs;
  std::vector<AblationRow> ablations;
};

EvalReport evaluate_scores(std::span<const double> scores, const std::vector<TrainingSample>& samples);
EvalReport evaluate_model(const EginModel& model, const std::vector<TrainingSample>& samples);

void write_report(std::ostream& out, const EvalReport& report);

enum class Ablation { Full, NoGraph, NoQuery, NoPosEmb };

std::string to_string(Ablation a);
TrainConfig ablation_config(const TrainConfig& base, Ablation a);

/// Trains and evaluates the full model and the three ablations with the same
/// seed; rows appear in the order full, w/o graph, w/o query, w/o pos_emb.
EvalReport run_ablations(const TrainConfig& base, const std::vector<TrainingSample>& train,
                         const std::vector<TrainingSample>& valid);

/// Sum-pooled item embeddings over the click sequence, concatenated with the
/// target item and current query embeddings and f_o, fed to an MLP. All
/// embeddings are trained by the CTR loss alone.
class DnnPoolingModel {
 public:
  DnnPoolingModel(const TrainConfig& cfg, std::size_t other_dim);

  Eigen::VectorXd input(const TrainingSample& sample) const;
  double predict(const TrainingSample& sample) const;

  /// Same optimizer, learning rate, batch size and epochs as the joint model.
  void fit(const std::vector<TrainingSample>& samples);

  const EmbeddingTable& items() const noexcept { return items_; }

 private:
  TrainConfig cfg_;
  EmbeddingTable items_;
  EmbeddingTable queries_;
  MlpParams mlp_;
};

EvalReport dnn_pooling_baseline(const std::vector<TrainingSample>& train,
                                const std::vector<TrainingSample>& valid, const TrainConfig& cfg);

}  // namespace egin
