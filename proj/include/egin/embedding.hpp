/**
 * @file embedding.hpp
 * @brief Embedding tables, the sampled-softmax graph loss and sparse updates.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "egin/common.hpp"
#include "egin/graph_edges.hpp"
#include "egin/neg_sampling.hpp"

namespace egin {

/// id -> dense vector. Rows appear lazily; a row's initial value is a pure
/// function of (seed, entity type, id), uniform in [-init_scale, init_scale],
/// so initialization never depends on access order.
class EmbeddingTable {
 public:
  EmbeddingTable(EntityType type, std::size_t dim, std::uint64_t seed, double init_scale);

  /// Skip-gram style default scale 0.5 / dim.
  static EmbeddingTable with_default_init(EntityType type, std::size_t dim, std::uint64_t seed);

  EntityType entity_type() const noexcept { return type_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  double init_scale() const noexcept { return init_scale_; }

  /// Row index for id, creating the row if needed. Invalidates spans.
  std::size_t ensure(EntityId id);
  /// Row index or npos.
  std::size_t find(EntityId id) const;
  bool contains(EntityId id) const { return find(id) != npos; }

  std::span<double> row(std::size_t index) { return {data_.data() + index * dim_, dim_}; }
  std::span<const double> row(std::size_t index) const { return {data_.data() + index * dim_, dim_}; }
  std::span<double> at(EntityId id) { return row(ensure(id)); }

  /// Stored vector, or the deterministic initial vector written to scratch.
  std::span<const double> view(EntityId id, std::vector<double>& scratch) const;

  void initial_vector(EntityId id, std::span<double> out) const;

  EntityId id_at(std::size_t index) const { return ids_[index]; }
  const std::vector<EntityId>& ids() const noexcept { return ids_; }

  /// Overwrites (or creates) the row for id.
  void set(EntityId id, std::span<const double> values);
  void fill_zero();

  bool operator==(const EmbeddingTable& other) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  EntityType type_;
  std::size_t dim_;
  std::uint64_t seed_;
  double init_scale_;
  std::unordered_map<EntityId, std::size_t> index_;
  std::vector<EntityId> ids_;
  std::vector<double> data_;
};

/// Dense per-row gradient accumulator aligned with one table's row indices.
class GradientBuffer {
 public:
  explicit GradientBuffer(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  /// Gradient slot for a table row, zeroed on first touch.
  std::span<double> slot(std::size_t row);
  /// Touched rows in first-touch order.
  const std::vector<std::size_t>& touched() const noexcept { return touched_; }
  std::span<const double> grad(std::size_t row) const { return {grad_.data() + row * dim_, dim_}; }
  /// Grows storage to at least `rows`; slots of existing rows keep their address
  /// only until the next growth.
  void resize(std::size_t rows);
  void clear();

 private:
  std::size_t dim_;
  std::vector<double> grad_;
  std::vector<std::uint8_t> mark_;
  std::vector<std::size_t> touched_;
};

struct EdgeLoss {
  double loss = 0.0;
  std::vector<double> grad_anchor;
  std::vector<double> grad_positive;
  std::vector<std::vector<double>> grad_negatives;
};

/// -log softmax of the positive logit a.p against the negative logits a.n.
EdgeLoss softmax_edge_loss(std::span<const double> anchor, std::span<const double> positive,
                           const std::vector<std::span<const double>>& negatives);

/// Same loss; gradients scaled by `scale` and added into the given slots.
/// `probs` is scratch of size >= |negatives| + 1.
double accumulate_edge_loss(std::span<const double> anchor, std::span<const double> positive,
                            const std::vector<std::span<const double>>& negatives, double scale,
                            std::span<double> grad_anchor, std::span<double> grad_positive,
                            const std::vector<std::span<double>>& grad_negatives,
                            std::vector<double>& probs);

struct GraphTables {
  EmbeddingTable items;
  EmbeddingTable queries;

  GraphTables(std::size_t dim, std::uint64_t seed);
  EmbeddingTable& of(EntityType type) { return type == EntityType::Item ? items : queries; }
  const EmbeddingTable& of(EntityType type) const { return type == EntityType::Item ? items : queries; }
};

struct GraphGradients {
  GradientBuffer items;
  GradientBuffer queries;

  explicit GraphGradients(std::size_t dim) : items(dim), queries(dim) {}
  GradientBuffer& of(EntityType type) { return type == EntityType::Item ? items : queries; }
  void clear() {
    items.clear();
    queries.clear();
  }
};

struct NegQueues {
  NegQueue items;
  NegQueue queries;

  NegQueues(std::size_t capacity, double subsample_threshold)
      : items(EntityType::Item, capacity, subsample_threshold),
        queries(EntityType::Query, capacity, subsample_threshold) {}
  NegQueue& of(EntityType type) { return type == EntityType::Item ? items : queries; }
  const NegQueue& of(EntityType type) const { return type == EntityType::Item ? items : queries; }
};

struct GraphLossTerms {
  double l_i2i = 0.0;
  double l_q2q = 0.0;
  double l_q2i = 0.0;
  std::size_t n_i2i = 0;
  std::size_t n_q2q = 0;
  std::size_t n_q2i = 0;
  std::size_t skipped = 0;  // edges without any negative
};

/// Per-kind gradient multipliers (alpha, beta, gamma in the joint objective).
struct GraphLossWeights {
  double i2i = 1.0;
  double q2q = 1.0;
  double q2i = 1.0;
};

/// Per-kind mean sampled-softmax loss over the edges. Gradients of
/// weights.i2i * l_i2i + weights.q2q * l_q2q + weights.q2i * l_q2i are added
/// into grads. Negatives of typeof(positive) come from the matching queue;
/// the positive id (and the anchor id, when of the same type) is excluded.
/// Edges whose queue is empty or yields no negative are counted as skipped.
GraphLossTerms batch_graph_loss(const std::vector<Edge>& edges, GraphTables& tables,
                                const NegQueues& queues, std::size_t n_neg, Rng& rng,
                                const GraphLossWeights& weights, GraphGradients& grads);

enum class OptimizerKind : std::uint8_t { Sgd = 0, Adam = 1 };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

/// Sparse per-row optimizer bound to one embedding table. Only rows present
/// in the gradient buffer move; Adam moments of untouched rows are left alone.
class SparseOptimizer {
 public:
  SparseOptimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

  OptimizerKind kind() const noexcept { return kind_; }
  double lr() const noexcept { return lr_; }

  /// Throws NumericError naming the id on a non-finite gradient.
  void apply(EmbeddingTable& table, const GradientBuffer& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::uint64_t step_ = 0;
  // Moment estimates aligned with the table's row indices.
  std::vector<double> m_;
  std::vector<double> v_;
};

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace egin
