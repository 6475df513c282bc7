/**
 * @file datagen.hpp
 * @brief Synthetic behavior logs with planted category and cluster structure.
 *
 * Items live in categories; each category is cut into clusters of closely
 * related items. Every query belongs to one cluster. A user holds a few
 * favorite clusters and, session by session, either revisits one of them or
 * explores a random cluster. A session opens with a query and is followed by
 * clicks that stay in the query's category with probability
 * intra_category_click_prob (and mostly in the query's cluster).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "egin/ingest.hpp"

namespace egin {

struct GenConfig {
  std::size_t num_users = 2000;
  std::size_t num_items = 2000;
  std::size_t num_queries = 400;
  std::size_t num_categories = 20;
  std::size_t items_per_category = 100;
  double session_gap_mean = 10800.0;  // seconds between sessions
  double intra_category_click_prob = 0.8;
  std::size_t seq_len_max = 200;
  std::uint64_t seed = 1;

  std::size_t cluster_size = 20;
  std::size_t interests_per_user = 3;
  std::size_t min_sessions = 4;
  std::size_t max_sessions = 12;
  std::size_t max_queries_per_session = 2;
  std::size_t max_clicks_per_query = 4;
  double cluster_affinity = 0.7;  // in-category clicks that stay in the session cluster
  double explore_prob = 0.2;      // session picks a non-favorite cluster
  double event_gap_mean = 45.0;   // seconds between events within a session
  double extra_query_category_prob = 0.1;
  /// Labeled training pairs per user, taken at the clicks before the held-out one.
  std::size_t train_targets_per_user = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Static catalog derived from a config: categories and clusters per entity.
struct Catalog {
  std::vector<CategoryId> item_category;               // indexed by item id
  std::vector<std::size_t> item_cluster;               // global cluster index per item
  std::vector<std::vector<EntityId>> cluster_items;    // global cluster -> items
  std::vector<CategoryId> cluster_category;
  std::vector<std::vector<EntityId>> category_items;   // category -> items
  std::vector<std::vector<CategoryId>> query_categories;  // indexed by query id
  std::vector<std::size_t> query_cluster;
  std::vector<std::vector<EntityId>> cluster_queries;

  static Catalog build(const GenConfig& cfg);

  /// Items sharing at least one category with the given set (sorted, unique).
  std::vector<EntityId> items_in_categories(const std::vector<CategoryId>& cats) const;
};

/// One sequence per user, ascending user id; deterministic in cfg.seed.
std::vector<BehaviorSequence> generate_log(const GenConfig& cfg);

/// For each user with a query-preceded click at the chosen position, emits a
/// positive sample (the actual click, label 1) followed by a negative sample
/// whose target is drawn uniformly from the items sharing a category with the
/// current query. `clicks_from_end` = 0 targets the user's last click.
std::vector<TrainingSample> generate_labeled_samples(const GenConfig& cfg,
                                                     const std::vector<BehaviorSequence>& log,
                                                     std::size_t clicks_from_end = 0);

struct LabeledSplit {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> valid;
};

/// Held-out split: valid targets each user's last click, train targets the
/// preceding train_targets_per_user clicks.
LabeledSplit generate_split(const GenConfig& cfg, const std::vector<BehaviorSequence>& log);

}  // namespace egin
