/**
 * @file multi_interest.hpp
 * @brief Similarity features between a target and a behavior sequence.
 *
 * Cosine similarity over graph embeddings, top-k retrieval, equal-width
 * binning of the similarities and a positional embedding of each retrieved
 * element's original index. Graph embeddings are read only; the CTR loss
 * trains the bin and position tables.
 */
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "egin/embedding.hpp"
#include "egin/ingest.hpp"

namespace egin {

/// Cosine of u and v; 0 when either norm is below 1e-12.
double cosine_sim(std::span<const double> u, std::span<const double> v);

struct BinningScheme {
  std::size_t num_bins = 20;
  std::size_t max_seq_len = 100;

  std::size_t pad_bin() const noexcept { return num_bins; }
  std::size_t pad_position() const noexcept { return max_seq_len; }
  /// Equal-width bins over [-1, 1]; s = 1 lands in the last bin.
  std::size_t bin(double similarity) const;
};

struct Retrieved {
  std::size_t index;  // position in the input sequence, 0 = oldest
  double similarity;
};

/// The k most similar sequence entries, descending, ties to the smaller index.
std::vector<Retrieved> top_k(std::span<const double> target,
                             const std::vector<std::span<const double>>& sequence, std::size_t k);

/// Convenience overload resolving ids through the graph tables.
std::vector<Retrieved> top_k(EntityId target, EntityType target_type,
                             const std::vector<BehaviorEvent>& seq, EntityType seq_type,
                             const GraphTables& tables, std::size_t k);

/// Learned tables consumed by the similarity features.
struct FeatureTables {
  EmbeddingTable bins;
  EmbeddingTable positions;

  FeatureTables(std::size_t dim, const BinningScheme& scheme, std::uint64_t seed);
};

struct SimFeature {
  std::vector<std::pair<std::size_t, std::size_t>> entries;  // (bin id, position id), k of them
  std::vector<double> vector;                                // k * dim
};

SimFeature sim_extract(const std::vector<Retrieved>& retrieved, const FeatureTables& features,
                       const BinningScheme& scheme, std::size_t k);

SimFeature sim_extract(EntityId target, EntityType target_type, const std::vector<BehaviorEvent>& seq,
                       EntityType seq_type, const GraphTables& tables, const FeatureTables& features,
                       const BinningScheme& scheme, std::size_t k);

/// Fully padded feature.
SimFeature padded_feature(const FeatureTables& features, const BinningScheme& scheme, std::size_t k);

struct FeatureOptions {
  std::size_t k = 10;
  bool use_query = true;
  bool include_current_query = false;
};

struct InterestFeatures {
  SimFeature i2i;  // target item vs click sequence
  SimFeature q2q;  // current query vs query sequence
  SimFeature q2i;  // current query vs click sequence
};

InterestFeatures build_features(const TrainingSample& sample, const GraphTables& tables,
                                const FeatureTables& features, const BinningScheme& scheme,
                                const FeatureOptions& options);

}  // namespace egin
