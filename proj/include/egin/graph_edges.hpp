/**
 * @file graph_edges.hpp
 * @brief Typed positive pairs of the query-item graph, derived per sample.
 *
 * No graph is stored: each sample's click and query sequences are read as a
 * sampled subgraph and turned into i2i, q2q and q2i edges on the fly.
 */
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "egin/ingest.hpp"

namespace egin {

enum class EdgeKind : std::uint8_t { I2I = 0, Q2Q = 1, Q2I = 2 };

std::string_view to_string(EdgeKind kind);

struct Edge {
  EdgeKind kind = EdgeKind::I2I;
  EntityId anchor_id = 0;
  EntityId positive_id = 0;
  EntityType anchor_type = EntityType::Item;
  EntityType positive_type = EntityType::Item;

  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

struct EdgeConfig {
  std::size_t window = 2;
  Timestamp session_gap = 1800;
  Timestamp q2i_timespan = 900;
  double seeds_mix_rate = 0.2;
  bool symmetric_q2i_time = true;
  bool use_query_edges = true;

  void validate() const;
};

/// Window co-occurrence edges over either the click or the seeds sequence.
/// Exactly one Bernoulli(seeds_mix_rate) draw is taken from rng per call;
/// on success the seeds sequence is the source.
std::vector<Edge> build_i2i_edges(const std::vector<BehaviorEvent>& click_seq,
                                  const std::vector<BehaviorEvent>& seeds_seq,
                                  const EdgeConfig& cfg, Rng& rng);

/// Window edges over a fixed source sequence (no mixture draw).
std::vector<Edge> build_window_edges(const std::vector<BehaviorEvent>& seq, std::size_t window);

/// Splits on a time gap above session_gap or on disjoint consecutive categories.
std::vector<std::vector<BehaviorEvent>> segment_query_sessions(
    const std::vector<BehaviorEvent>& query_seq, const EdgeConfig& cfg);

/// Complete digraph over the distinct query ids of each session.
std::vector<Edge> build_q2q_edges(const std::vector<std::vector<BehaviorEvent>>& sessions);

/// Query/click pairs inside the timespan with intersecting categories; both
/// directions are emitted, the query-anchored one first.
std::vector<Edge> build_q2i_edges(const std::vector<BehaviorEvent>& query_seq,
                                  const std::vector<BehaviorEvent>& click_seq, const EdgeConfig& cfg);

/// i2i, then q2q, then q2i. Query edges are omitted when use_query_edges is false.
std::vector<Edge> build_all_edges(const TrainingSample& sample, const EdgeConfig& cfg, Rng& rng);

}  // namespace egin
