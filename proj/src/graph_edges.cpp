#include "egin/graph_edges.hpp"

#include <algorithm>

namespace egin {

namespace {

void push_pair(std::vector<Edge>& edges, EdgeKind kind, EntityId a, EntityType ta, EntityId b,
               EntityType tb) {
  edges.push_back({kind, a, b, ta, tb});
  edges.push_back({kind, b, a, tb, ta});
}

bool within_timespan(Timestamp query_time, Timestamp click_time, const EdgeConfig& cfg) {
  const Timestamp dt = click_time - query_time;
  if (cfg.symmetric_q2i_time) {
    const Timestamp adt = dt < 0 ? -dt : dt;
    return adt > 0 && adt < cfg.q2i_timespan;
  }
  return dt > 0 && dt < cfg.q2i_timespan;
}

}  // namespace

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::I2I:
      return "i2i";
    case EdgeKind::Q2Q:
      return "q2q";
    case EdgeKind::Q2I:
      return "q2i";
  }
  return "unknown";
}

void EdgeConfig::validate() const {
  if (window < 1) throw ConfigError("window", "must be >= 1");
  if (session_gap < 0) throw ConfigError("session_gap", "must be >= 0");
  if (q2i_timespan <= 0) throw ConfigError("q2i_timespan", "must be > 0");
  if (!(seeds_mix_rate >= 0.0 && seeds_mix_rate <= 1.0)) {
    throw ConfigError("seeds_mix_rate", "must be in [0,1]");
  }
}

std::vector<Edge> build_window_edges(const std::vector<BehaviorEvent>& seq, std::size_t window) {
  std::vector<Edge> edges;
  if (seq.size() < 2) return edges;
  edges.reserve(seq.size() * window * 2);
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const auto last = std::min(seq.size() - 1, j + window);
    for (std::size_t k = j + 1; k <= last; ++k) {
      if (seq[j].entity_id == seq[k].entity_id) continue;
      push_pair(edges, EdgeKind::I2I, seq[j].entity_id, EntityType::Item, seq[k].entity_id,
                EntityType::Item);
    }
  }
  return edges;
}

std::vector<Edge> build_i2i_edges(const std::vector<BehaviorEvent>& click_seq,
                                  const std::vector<BehaviorEvent>& seeds_seq,
                                  const EdgeConfig& cfg, Rng& rng) {
  const bool use_seeds = std::bernoulli_distribution(cfg.seeds_mix_rate)(rng);
  return build_window_edges(use_seeds ? seeds_seq : click_seq, cfg.window);
}

std::vector<std::vector<BehaviorEvent>> segment_query_sessions(
    const std::vector<BehaviorEvent>& query_seq, const EdgeConfig& cfg) {
  std::vector<std::vector<BehaviorEvent>> sessions;
  for (std::size_t i = 0; i < query_seq.size(); ++i) {
    const bool split =
        i == 0 || query_seq[i].timestamp - query_seq[i - 1].timestamp > cfg.session_gap ||
        !categories_intersect(query_seq[i].categories, query_seq[i - 1].categories);
    if (split) sessions.emplace_back();
    sessions.back().push_back(query_seq[i]);
  }
  return sessions;
}

std::vector<Edge> build_q2q_edges(const std::vector<std::vector<BehaviorEvent>>& sessions) {
  std::vector<Edge> edges;
  std::vector<EntityId> ids;
  for (const auto& session : sessions) {
    ids.clear();
    for (const auto& q : session) {
      if (std::find(ids.begin(), ids.end(), q.entity_id) == ids.end()) ids.push_back(q.entity_id);
    }
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        push_pair(edges, EdgeKind::Q2Q, ids[a], EntityType::Query, ids[b], EntityType::Query);
      }
    }
  }
  return edges;
}

std::vector<Edge> build_q2i_edges(const std::vector<BehaviorEvent>& query_seq,
                                  const std::vector<BehaviorEvent>& click_seq, const EdgeConfig& cfg) {
  std::vector<Edge> edges;
  for (const auto& q : query_seq) {
    for (const auto& c : click_seq) {
      if (!within_timespan(q.timestamp, c.timestamp, cfg)) continue;
      if (!categories_intersect(q.categories, c.categories)) continue;
      push_pair(edges, EdgeKind::Q2I, q.entity_id, EntityType::Query, c.entity_id, EntityType::Item);
    }
  }
  return edges;
}

std::vector<Edge> build_all_edges(const TrainingSample& sample, const EdgeConfig& cfg, Rng& rng) {
  auto edges = build_i2i_edges(sample.click_seq, sample.seeds_seq, cfg, rng);
  if (!cfg.use_query_edges) return edges;

  // The graph side sees the full query history, current query included.
  std::vector<BehaviorEvent> queries = sample.query_seq;
  if (queries.empty() || !(queries.back() == sample.current_query)) {
    queries.push_back(sample.current_query);
  }
  auto q2q = build_q2q_edges(segment_query_sessions(queries, cfg));
  auto q2i = build_q2i_edges(queries, sample.click_seq, cfg);
  edges.insert(edges.end(), q2q.begin(), q2q.end());
  edges.insert(edges.end(), q2i.begin(), q2i.end());
  return edges;
}

}  // namespace egin
