#include "egin/multi_interest.hpp"

#include <algorithm>
#include <cmath>

namespace egin {

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ContractViolation("cosine_sim: dimension mismatch");
  double uv = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

std::size_t BinningScheme::bin(double similarity) const {
  const double scaled = std::floor((similarity + 1.0) / 2.0 * static_cast<double>(num_bins));
  if (!(scaled > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), num_bins - 1);
}

std::vector<Retrieved> top_k(std::span<const double> target,
                             const std::vector<std::span<const double>>& sequence, std::size_t k) {
  std::vector<Retrieved> all;
  all.reserve(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) all.push_back({i, cosine_sim(target, sequence[i])});
  const auto keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const Retrieved& a, const Retrieved& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.index < b.index;
                    });
  all.resize(keep);
  return all;
}

std::vector<Retrieved> top_k(EntityId target, EntityType target_type,
                             const std::vector<BehaviorEvent>& seq, EntityType seq_type,
                             const GraphTables& tables, std::size_t k) {
  std::vector<double> target_scratch;
  const auto target_vec = tables.of(target_type).view(target, target_scratch);
  const auto& seq_table = tables.of(seq_type);
  std::vector<std::vector<double>> scratch(seq.size());
  std::vector<std::span<const double>> vectors;
  vectors.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) vectors.push_back(seq_table.view(seq[i].entity_id, scratch[i]));
  return top_k(target_vec, vectors, k);
}

FeatureTables::FeatureTables(std::size_t dim, const BinningScheme& scheme, std::uint64_t seed)
    : bins(EntityType::Bin, dim, seed, 0.5 / static_cast<double>(dim)),
      positions(EntityType::Position, dim, seed, 0.5 / static_cast<double>(dim)) {
  for (std::size_t b = 0; b <= scheme.num_bins; ++b) bins.ensure(b);
  for (std::size_t p = 0; p <= scheme.max_seq_len; ++p) positions.ensure(p);
}

namespace {

void append_entry(SimFeature& f, const FeatureTables& features, std::size_t bin, std::size_t pos) {
  std::vector<double> bs;
  std::vector<double> ps;
  const auto b = features.bins.view(bin, bs);
  const auto p = features.positions.view(pos, ps);
  f.entries.emplace_back(bin, pos);
  for (std::size_t d = 0; d < b.size(); ++d) f.vector.push_back(b[d] + p[d]);
}

}  // namespace

SimFeature sim_extract(const std::vector<Retrieved>& retrieved, const FeatureTables& features,
                       const BinningScheme& scheme, std::size_t k) {
  SimFeature f;
  f.entries.reserve(k);
  f.vector.reserve(k * features.bins.dim());
  for (std::size_t j = 0; j < k; ++j) {
    if (j < retrieved.size()) {
      if (retrieved[j].index >= scheme.max_seq_len) {
        throw ContractViolation("sequence index exceeds the position table; raise max_seq_len");
      }
      append_entry(f, features, scheme.bin(retrieved[j].similarity), retrieved[j].index);
    } else {
      append_entry(f, features, scheme.pad_bin(), scheme.pad_position());
    }
  }
  return f;
}

SimFeature sim_extract(EntityId target, EntityType target_type, const std::vector<BehaviorEvent>& seq,
                       EntityType seq_type, const GraphTables& tables, const FeatureTables& features,
                       const BinningScheme& scheme, std::size_t k) {
  return sim_extract(top_k(target, target_type, seq, seq_type, tables, k), features, scheme, k);
}

SimFeature padded_feature(const FeatureTables& features, const BinningScheme& scheme, std::size_t k) {
  return sim_extract(std::vector<Retrieved>{}, features, scheme, k);
}

InterestFeatures build_features(const TrainingSample& sample, const GraphTables& tables,
                                const FeatureTables& features, const BinningScheme& scheme,
                                const FeatureOptions& options) {
  InterestFeatures out;
  out.i2i = sim_extract(sample.target_item.entity_id, EntityType::Item, sample.click_seq,
                        EntityType::Item, tables, features, scheme, options.k);
  if (!options.use_query) {
    out.q2q = padded_feature(features, scheme, options.k);
    out.q2i = out.q2q;
    return out;
  }
  if (options.include_current_query &&
      (sample.query_seq.empty() || !(sample.query_seq.back() == sample.current_query))) {
    auto queries = sample.query_seq;
    queries.push_back(sample.current_query);
    if (queries.size() > scheme.max_seq_len) queries.erase(queries.begin());
    out.q2q = sim_extract(sample.current_query.entity_id, EntityType::Query, queries, EntityType::Query,
                          tables, features, scheme, options.k);
  } else {
    out.q2q = sim_extract(sample.current_query.entity_id, EntityType::Query, sample.query_seq,
                          EntityType::Query, tables, features, scheme, options.k);
  }
  out.q2i = sim_extract(sample.current_query.entity_id, EntityType::Query, sample.click_seq,
                        EntityType::Item, tables, features, scheme, options.k);
  return out;
}

}  // namespace egin
