#include "egin/embedding.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace egin {

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(EntityType type, std::size_t dim, std::uint64_t seed, double init_scale)
    : type_(type), dim_(dim), seed_(seed), init_scale_(init_scale) {
  if (dim == 0) throw ConfigError("dim", "must be > 0");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale", "must be >= 0");
}

EmbeddingTable EmbeddingTable::with_default_init(EntityType type, std::size_t dim, std::uint64_t seed) {
  return EmbeddingTable(type, dim, seed, 0.5 / static_cast<double>(dim));
}

void EmbeddingTable::initial_vector(EntityId id, std::span<double> out) const {
  std::uint64_t state = mix64(seed_ ^ (static_cast<std::uint64_t>(type_) * 0x9e3779b97f4a7c15ULL)) ^
                        mix64(id ^ 0xd1b54a32d192ed03ULL);
  for (std::size_t i = 0; i < dim_; ++i) {
    state = mix64(state);
    const double u = static_cast<double>(state >> 11) * 0x1.0p-53;  // [0, 1)
    out[i] = (2.0 * u - 1.0) * init_scale_;
  }
}

std::size_t EmbeddingTable::ensure(EntityId id) {
  const auto [it, inserted] = index_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    data_.resize(data_.size() + dim_);
    initial_vector(id, row(it->second));
  }
  return it->second;
}

std::size_t EmbeddingTable::find(EntityId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? npos : it->second;
}

std::span<const double> EmbeddingTable::view(EntityId id, std::vector<double>& scratch) const {
  const auto idx = find(id);
  if (idx != npos) return row(idx);
  scratch.resize(dim_);
  initial_vector(id, scratch);
  return scratch;
}

void EmbeddingTable::set(EntityId id, std::span<const double> values) {
  if (values.size() != dim_) throw ContractViolation("embedding row has wrong dimension");
  auto dst = at(id);
  std::copy(values.begin(), values.end(), dst.begin());
}

void EmbeddingTable::fill_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (type_ != other.type_ || dim_ != other.dim_ || ids_.size() != other.ids_.size()) return false;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const auto j = other.find(ids_[i]);
    if (j == npos) return false;
    const auto a = row(i);
    const auto b = other.row(j);
    if (!std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// GradientBuffer

std::span<double> GradientBuffer::slot(std::size_t row) {
  if (row >= mark_.size()) resize(row + 1);
  auto g = std::span<double>(grad_.data() + row * dim_, dim_);
  if (!mark_[row]) {
    mark_[row] = 1;
    touched_.push_back(row);
    std::fill(g.begin(), g.end(), 0.0);
  }
  return g;
}

void GradientBuffer::resize(std::size_t rows) {
  if (rows <= mark_.size()) return;
  mark_.resize(rows, 0);
  grad_.resize(rows * dim_, 0.0);
}

void GradientBuffer::clear() {
  for (auto r : touched_) mark_[r] = 0;
  touched_.clear();
}

// ---------------------------------------------------------------------------
// Sampled softmax

double accumulate_edge_loss(std::span<const double> anchor, std::span<const double> positive,
                            const std::vector<std::span<const double>>& negatives, double scale,
                            std::span<double> grad_anchor, std::span<double> grad_positive,
                            const std::vector<std::span<double>>& grad_negatives,
                            std::vector<double>& probs) {
  const std::size_t dim = anchor.size();
  const std::size_t n = negatives.size();
  probs.resize(n + 1);

  probs[0] = dot(anchor, positive);
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i + 1] = dot(anchor, negatives[i]);
    if (probs[i + 1] > probs[argmax]) argmax = i + 1;
  }
  const double max_logit = probs[argmax];
  const double positive_logit = probs[0];
  // z = 1 + rest; log1p keeps the loss strictly positive for large margins.
  double rest = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    probs[i] = i == argmax ? 1.0 : std::exp(probs[i] - max_logit);
    if (i != argmax) rest += probs[i];
  }
  const double loss = (max_logit - positive_logit) + std::log1p(rest);
  const double z = 1.0 + rest;
  for (auto& p : probs) p /= z;

  // d/da = (p0 - 1) e_p + sum_i p_i e_n_i ; d/dp = (p0 - 1) a ; d/dn_i = p_i a
  const double c0 = (probs[0] - 1.0) * scale;
  for (std::size_t d = 0; d < dim; ++d) {
    grad_anchor[d] += c0 * positive[d];
    grad_positive[d] += c0 * anchor[d];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = probs[i + 1] * scale;
    const auto neg = negatives[i];
    const auto gneg = grad_negatives[i];
    for (std::size_t d = 0; d < dim; ++d) {
      grad_anchor[d] += ci * neg[d];
      gneg[d] += ci * anchor[d];
    }
  }
  return loss;
}

EdgeLoss softmax_edge_loss(std::span<const double> anchor, std::span<const double> positive,
                           const std::vector<std::span<const double>>& negatives) {
  const std::size_t dim = anchor.size();
  if (positive.size() != dim) throw ContractViolation("softmax_edge_loss: positive dimension mismatch");
  if (negatives.empty()) throw ContractViolation("softmax_edge_loss: needs at least one negative");
  for (const auto& n : negatives) {
    if (n.size() != dim) throw ContractViolation("softmax_edge_loss: negative dimension mismatch");
  }
  check_finite(anchor, "anchor");
  check_finite(positive, "positive");
  for (const auto& n : negatives) check_finite(n, "negative");

  EdgeLoss out;
  out.grad_anchor.assign(dim, 0.0);
  out.grad_positive.assign(dim, 0.0);
  out.grad_negatives.assign(negatives.size(), std::vector<double>(dim, 0.0));
  std::vector<std::span<double>> gneg(out.grad_negatives.begin(), out.grad_negatives.end());
  std::vector<double> probs;
  out.loss = accumulate_edge_loss(anchor, positive, negatives, 1.0, out.grad_anchor, out.grad_positive,
                                  gneg, probs);
  if (!std::isfinite(out.loss)) throw NumericError("softmax_edge_loss: non-finite loss");
  return out;
}

GraphTables::GraphTables(std::size_t dim, std::uint64_t seed)
    : items(EmbeddingTable::with_default_init(EntityType::Item, dim, seed)),
      queries(EmbeddingTable::with_default_init(EntityType::Query, dim, seed)) {}

GraphLossTerms batch_graph_loss(const std::vector<Edge>& edges, GraphTables& tables,
                                const NegQueues& queues, std::size_t n_neg, Rng& rng,
                                const GraphLossWeights& weights, GraphGradients& grads) {
  struct Resolved {
    std::size_t anchor_row;
    std::size_t positive_row;
    std::size_t neg_begin;
    std::size_t neg_end;
  };

  GraphLossTerms terms;
  std::array<std::size_t, 3> counts{};
  std::vector<Resolved> resolved(edges.size());
  std::vector<std::uint8_t> valid(edges.size(), 0);
  std::vector<EntityId> neg_ids;
  std::vector<std::size_t> neg_rows;
  neg_ids.reserve(n_neg);
  neg_rows.reserve(edges.size() * n_neg);

  // Pass 1: draw negatives and create every row the batch touches, so that
  // no table grows while spans are held below.
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    const auto& queue = queues.of(edge.positive_type);
    if (queue.empty()) {
      ++terms.skipped;
      continue;
    }
    std::array<EntityId, 2> exclude{edge.positive_id, edge.anchor_id};
    const std::size_t n_exclude = edge.anchor_type == edge.positive_type ? 2 : 1;
    neg_ids.clear();
    sample_negatives_into(queue, n_neg, std::span<const EntityId>(exclude.data(), n_exclude), rng,
                          neg_ids);
    if (neg_ids.empty()) {
      ++terms.skipped;
      continue;
    }
    auto& neg_table = tables.of(edge.positive_type);
    Resolved r{tables.of(edge.anchor_type).ensure(edge.anchor_id),
               tables.of(edge.positive_type).ensure(edge.positive_id), neg_rows.size(), 0};
    for (auto id : neg_ids) neg_rows.push_back(neg_table.ensure(id));
    r.neg_end = neg_rows.size();
    resolved[e] = r;
    valid[e] = 1;
    ++counts[static_cast<std::size_t>(edge.kind)];
  }

  grads.items.resize(tables.items.rows());
  grads.queries.resize(tables.queries.rows());
  const std::array<double, 3> weight{weights.i2i, weights.q2q, weights.q2i};
  std::array<double, 3> loss_sum{};
  std::vector<std::span<const double>> negs;
  std::vector<std::span<double>> gnegs;
  std::vector<double> probs;

  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!valid[e]) continue;
    const auto& edge = edges[e];
    const auto& r = resolved[e];
    const auto k = static_cast<std::size_t>(edge.kind);
    const double scale = weight[k] / static_cast<double>(counts[k]);

    auto& anchor_table = tables.of(edge.anchor_type);
    auto& positive_table = tables.of(edge.positive_type);
    auto& anchor_grads = grads.of(edge.anchor_type);
    auto& positive_grads = grads.of(edge.positive_type);
    negs.clear();
    gnegs.clear();
    for (std::size_t i = r.neg_begin; i < r.neg_end; ++i) {
      negs.push_back(positive_table.row(neg_rows[i]));
      gnegs.push_back(positive_grads.slot(neg_rows[i]));
    }
    const double loss = accumulate_edge_loss(
        anchor_table.row(r.anchor_row), positive_table.row(r.positive_row), negs, scale,
        anchor_grads.slot(r.anchor_row), positive_grads.slot(r.positive_row), gnegs, probs);
    if (!std::isfinite(loss)) throw NumericError("batch_graph_loss: non-finite edge loss");
    loss_sum[k] += loss;
  }

  terms.n_i2i = counts[0];
  terms.n_q2q = counts[1];
  terms.n_q2i = counts[2];
  terms.l_i2i = counts[0] ? loss_sum[0] / static_cast<double>(counts[0]) : 0.0;
  terms.l_q2q = counts[1] ? loss_sum[1] / static_cast<double>(counts[1]) : 0.0;
  terms.l_q2i = counts[2] ? loss_sum[2] / static_cast<double>(counts[2]) : 0.0;
  return terms;
}

// ---------------------------------------------------------------------------
// Optimizer

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("optimizer", "unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

SparseOptimizer::SparseOptimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr >= 0.0)) throw ConfigError("lr", "must be >= 0");
}

void SparseOptimizer::apply(EmbeddingTable& table, const GradientBuffer& grads) {
  const std::size_t dim = table.dim();
  for (auto r : grads.touched()) {
    for (double g : grads.grad(r)) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient for " + std::string(to_string(table.entity_type())) +
                           " id " + std::to_string(table.id_at(r)));
      }
    }
  }
  if (kind_ == OptimizerKind::Sgd) {
    for (auto r : grads.touched()) {
      auto w = table.row(r);
      const auto g = grads.grad(r);
      for (std::size_t d = 0; d < dim; ++d) w[d] -= lr_ * g[d];
    }
    return;
  }

  ++step_;
  if (m_.size() < table.rows() * dim) {
    m_.resize(table.rows() * dim, 0.0);
    v_.resize(table.rows() * dim, 0.0);
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (auto r : grads.touched()) {
    auto w = table.row(r);
    const auto g = grads.grad(r);
    for (std::size_t d = 0; d < dim; ++d) {
      double& m = m_[r * dim + d];
      double& v = v_[r * dim + d];
      m = beta1_ * m + (1.0 - beta1_) * g[d];
      v = beta2_ * v + (1.0 - beta2_) * g[d] * g[d];
      w[d] -= lr_ * (m / c1) / (std::sqrt(v / c2) + eps_);
    }
  }
}

}  // namespace egin
