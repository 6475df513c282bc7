#include "egin/datagen.hpp"

#include <algorithm>
#include <cmath>

namespace egin {

namespace {

constexpr Timestamp kEpochBase = 1'600'000'000;
constexpr Timestamp kStartSpread = 30 * 86'400;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

Timestamp gap(Rng& rng, double mean) {
  return 1 + static_cast<Timestamp>(std::exponential_distribution<double>(1.0 / mean)(rng));
}

void require(bool ok, const char* field, const char* reason) {
  if (!ok) throw ConfigError(field, reason);
}

}  // namespace

void GenConfig::validate() const {
  require(num_users > 0, "num_users", "must be > 0");
  require(num_items > 0, "num_items", "must be > 0");
  require(num_queries > 0, "num_queries", "must be > 0");
  require(num_categories > 0, "num_categories", "must be > 0");
  require(items_per_category > 0, "items_per_category", "must be > 0");
  require(num_items >= num_categories, "num_items", "must be >= num_categories");
  require(num_items > (num_categories - 1) * items_per_category, "items_per_category",
          "too large: some categories would receive no items");
  require(session_gap_mean > 0.0, "session_gap_mean", "must be > 0");
  require(intra_category_click_prob >= 0.0 && intra_category_click_prob <= 1.0,
          "intra_category_click_prob", "must be in [0,1]");
  require(seq_len_max > 0, "seq_len_max", "must be > 0");
  require(cluster_size > 0, "cluster_size", "must be > 0");
  require(interests_per_user > 0, "interests_per_user", "must be > 0");
  require(min_sessions > 0, "min_sessions", "must be > 0");
  require(max_sessions >= min_sessions, "max_sessions", "must be >= min_sessions");
  require(max_queries_per_session > 0, "max_queries_per_session", "must be > 0");
  require(max_clicks_per_query > 0, "max_clicks_per_query", "must be > 0");
  require(cluster_affinity >= 0.0 && cluster_affinity <= 1.0, "cluster_affinity", "must be in [0,1]");
  require(explore_prob >= 0.0 && explore_prob <= 1.0, "explore_prob", "must be in [0,1]");
  require(event_gap_mean > 0.0, "event_gap_mean", "must be > 0");
  require(extra_query_category_prob >= 0.0 && extra_query_category_prob <= 1.0,
          "extra_query_category_prob", "must be in [0,1]");
  require(train_targets_per_user > 0, "train_targets_per_user", "must be > 0");
}

Catalog Catalog::build(const GenConfig& cfg) {
  cfg.validate();
  Catalog cat;
  cat.item_category.resize(cfg.num_items);
  cat.item_cluster.resize(cfg.num_items);
  cat.category_items.resize(cfg.num_categories);
  for (EntityId item = 0; item < cfg.num_items; ++item) {
    const auto c = static_cast<CategoryId>((item / cfg.items_per_category) % cfg.num_categories);
    cat.item_category[item] = c;
    cat.category_items[c].push_back(item);
  }
  // Clusters are contiguous runs inside each category's item list.
  for (CategoryId c = 0; c < cfg.num_categories; ++c) {
    const auto& items = cat.category_items[c];
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (j % cfg.cluster_size == 0) {
        cat.cluster_items.emplace_back();
        cat.cluster_category.push_back(c);
      }
      cat.item_cluster[items[j]] = cat.cluster_items.size() - 1;
      cat.cluster_items.back().push_back(items[j]);
    }
  }

  Rng rng(mix64(cfg.seed ^ 0x51ed270b27a5c4f3ULL));
  const auto num_clusters = cat.cluster_items.size();
  cat.query_categories.resize(cfg.num_queries);
  cat.query_cluster.resize(cfg.num_queries);
  cat.cluster_queries.resize(num_clusters);
  std::bernoulli_distribution extra(cfg.extra_query_category_prob);
  for (EntityId q = 0; q < cfg.num_queries; ++q) {
    const auto cluster = static_cast<std::size_t>(q % num_clusters);
    cat.query_cluster[q] = cluster;
    cat.cluster_queries[cluster].push_back(q);
    auto& cats = cat.query_categories[q];
    cats.push_back(cat.cluster_category[cluster]);
    if (cfg.num_categories > 1 && extra(rng)) {
      cats.push_back(static_cast<CategoryId>(uniform_index(rng, cfg.num_categories)));
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  }
  return cat;
}

std::vector<EntityId> Catalog::items_in_categories(const std::vector<CategoryId>& cats) const {
  std::vector<EntityId> items;
  for (auto c : cats) {
    if (c < category_items.size()) {
      items.insert(items.end(), category_items[c].begin(), category_items[c].end());
    }
  }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::vector<BehaviorSequence> generate_log(const GenConfig& cfg) {
  const auto catalog = Catalog::build(cfg);
  const auto num_clusters = catalog.cluster_items.size();

  std::vector<BehaviorSequence> log;
  log.reserve(cfg.num_users);
  for (EntityId user = 0; user < cfg.num_users; ++user) {
    Rng rng(mix64(cfg.seed) ^ mix64(user + 1));
    BehaviorSequence seq{user, {}};

    std::vector<std::size_t> favorites;
    for (std::size_t i = 0; i < cfg.interests_per_user; ++i) {
      favorites.push_back(uniform_index(rng, num_clusters));
    }

    Timestamp t = kEpochBase + static_cast<Timestamp>(uniform_index(rng, kStartSpread));
    const auto sessions = cfg.min_sessions + uniform_index(rng, cfg.max_sessions - cfg.min_sessions + 1);
    std::bernoulli_distribution explore(cfg.explore_prob);
    std::bernoulli_distribution intra(cfg.intra_category_click_prob);
    std::bernoulli_distribution affinity(cfg.cluster_affinity);

    for (std::size_t s = 0; s < sessions; ++s) {
      if (s > 0) t += gap(rng, cfg.session_gap_mean);
      auto cluster = explore(rng) ? uniform_index(rng, num_clusters)
                                  : favorites[uniform_index(rng, favorites.size())];
      if (catalog.cluster_queries[cluster].empty()) {
        // Not every cluster owns a query when num_queries < #clusters; move
        // the session to a cluster that does.
        cluster = static_cast<std::size_t>(uniform_index(rng, cfg.num_queries)) % num_clusters;
      }
      const auto& queries = catalog.cluster_queries[cluster];
      const auto category = catalog.cluster_category[cluster];
      const auto& category_items = catalog.category_items[category];

      const auto num_queries = 1 + uniform_index(rng, cfg.max_queries_per_session);
      for (std::size_t qi = 0; qi < num_queries; ++qi) {
        if (qi > 0) t += gap(rng, cfg.event_gap_mean);
        const auto query = queries[uniform_index(rng, queries.size())];
        seq.events.push_back({EventKind::Query, query, t, catalog.query_categories[query]});

        const auto num_clicks = 1 + uniform_index(rng, cfg.max_clicks_per_query);
        for (std::size_t ci = 0; ci < num_clicks; ++ci) {
          t += gap(rng, cfg.event_gap_mean);
          EntityId item = 0;
          if (intra(rng)) {
            const auto& pool = affinity(rng) ? catalog.cluster_items[cluster] : category_items;
            item = pool[uniform_index(rng, pool.size())];
          } else {
            item = uniform_index(rng, cfg.num_items);
          }
          seq.events.push_back({EventKind::Click, item, t, {catalog.item_category[item]}});
        }
      }
    }
    log.push_back(std::move(seq));
  }
  return log;
}

std::vector<TrainingSample> generate_labeled_samples(const GenConfig& cfg,
                                                     const std::vector<BehaviorSequence>& log,
                                                     std::size_t clicks_from_end) {
  const auto catalog = Catalog::build(cfg);
  const SequenceLimits limits{cfg.seq_len_max, cfg.seq_len_max, false};
  std::vector<TrainingSample> samples;
  for (const auto& seq : log) {
    std::vector<std::size_t> click_index;
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
      if (seq.events[i].kind == EventKind::Click) click_index.push_back(i);
    }
    if (click_index.size() < 2 + clicks_from_end) continue;
    const auto target_index = click_index[click_index.size() - 1 - clicks_from_end];

    TrainingSample positive;
    if (!assemble_sample(seq, target_index, limits, positive)) continue;

    std::size_t clicks_before = 0;
    std::size_t queries_before = 0;
    for (std::size_t i = 0; i < target_index; ++i) {
      (seq.events[i].kind == EventKind::Click ? clicks_before : queries_before) += 1;
    }
    positive.other_features = {std::log1p(static_cast<double>(clicks_before)) / 5.0,
                               std::log1p(static_cast<double>(queries_before)) / 5.0};

    const auto pool = catalog.items_in_categories(positive.current_query.categories);
    if (pool.size() < 2) continue;
    Rng rng(mix64(cfg.seed ^ 0x2545f4914f6cdd1dULL) ^ mix64(seq.user_id * 31 + clicks_from_end + 7));
    EntityId negative_id = positive.target_item.entity_id;
    while (negative_id == positive.target_item.entity_id) {
      negative_id = pool[uniform_index(rng, pool.size())];
    }

    positive.label = 1;
    TrainingSample negative = positive;
    negative.label = 0;
    negative.target_item = {EventKind::Click, negative_id, positive.target_item.timestamp,
                            {catalog.item_category[negative_id]}};
    samples.push_back(std::move(positive));
    samples.push_back(std::move(negative));
  }
  return samples;
}

LabeledSplit generate_split(const GenConfig& cfg, const std::vector<BehaviorSequence>& log) {
  LabeledSplit split;
  split.valid = generate_labeled_samples(cfg, log, 0);
  for (std::size_t r = 1; r <= cfg.train_targets_per_user; ++r) {
    auto part = generate_labeled_samples(cfg, log, r);
    split.train.insert(split.train.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
  }
  return split;
}

}  // namespace egin
