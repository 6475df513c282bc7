#include "egin/ctr_net.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace egin {

namespace {

constexpr double kProbFloor = 1e-15;

void accumulate_feature_grad(const SimFeature& feature, const Eigen::VectorXd& dinput, std::size_t offset,
                             std::size_t dim, double scale, const FeatureTables& tables,
                             CtrGradients& grads, bool train_positions) {
  for (std::size_t j = 0; j < feature.entries.size(); ++j) {
    const auto [bin, pos] = feature.entries[j];
    const auto base = static_cast<Eigen::Index>(offset + j * dim);
    auto gb = grads.bins.slot(tables.bins.find(bin));
    for (std::size_t d = 0; d < dim; ++d) gb[d] += scale * dinput[base + static_cast<Eigen::Index>(d)];
    if (train_positions) {
      auto gp = grads.positions.slot(tables.positions.find(pos));
      for (std::size_t d = 0; d < dim; ++d) gp[d] += scale * dinput[base + static_cast<Eigen::Index>(d)];
    }
  }
}

}  // namespace

MlpParams MlpParams::init(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  if (input_dim == 0) throw ConfigError("hidden", "MLP input dimension must be > 0");
  MlpParams p;
  Rng rng(mix64(seed ^ 0x6a09e667f3bcc909ULL));
  std::size_t fan_in = input_dim;
  std::vector<std::size_t> sizes = hidden;
  sizes.push_back(1);
  for (auto out : sizes) {
    if (out == 0) throw ConfigError("hidden", "layer sizes must be > 0");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out)));
    fan_in = out;
  }
  return p;
}

MlpParams MlpParams::zeros_like(const MlpParams& shape) {
  MlpParams p;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(shape.weights[l].rows(), shape.weights[l].cols()));
    p.biases.push_back(Eigen::VectorXd::Zero(shape.biases[l].size()));
  }
  return p;
}

void MlpParams::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void MlpParams::add_scaled(const MlpParams& other, double scale) {
  for (std::size_t l = 0; l < layers(); ++l) {
    weights[l] += scale * other.weights[l];
    biases[l] += scale * other.biases[l];
  }
}

bool MlpParams::all_finite() const {
  for (std::size_t l = 0; l < layers(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layers() != other.layers()) return false;
  for (std::size_t l = 0; l < layers(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols()) {
      return false;
    }
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

double mlp_forward(const MlpParams& params, const Eigen::VectorXd& input, MlpCache* cache) {
  if (static_cast<std::size_t>(input.size()) != params.input_dim()) {
    throw ContractViolation("MLP input has dimension " + std::to_string(input.size()) + ", expected " +
                            std::to_string(params.input_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::VectorXd x = input;
  const auto n = params.layers();
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::VectorXd z = params.weights[l] * x + params.biases[l];
    if (cache) {
      cache->inputs.push_back(x);
      cache->pre.push_back(z);
    }
    x = (l + 1 < n) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  const double logit = x[0];
  double p = 1.0 / (1.0 + std::exp(-logit));
  p = std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
  if (cache) {
    cache->logit = logit;
    cache->pctr = p;
  }
  return p;
}

Eigen::VectorXd mlp_backward(const MlpParams& params, const MlpCache& cache, double dloss_dlogit,
                             double scale, MlpParams& grads) {
  const auto n = params.layers();
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, dloss_dlogit);
  for (std::size_t l = n; l-- > 0;) {
    if (l + 1 < n) delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    grads.weights[l].noalias() += scale * delta * cache.inputs[l].transpose();
    grads.biases[l] += scale * delta;
    delta = params.weights[l].transpose() * delta;
  }
  return delta;
}

Eigen::VectorXd assemble_input(const InterestFeatures& features, const std::vector<double>& other) {
  const auto size = features.i2i.vector.size() + features.q2q.vector.size() + features.q2i.vector.size() +
                    other.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(size));
  Eigen::Index i = 0;
  for (const auto* f : {&features.i2i, &features.q2q, &features.q2i}) {
    for (double v : f->vector) x[i++] = v;
  }
  for (double v : other) x[i++] = v;
  return x;
}

double forward(const InterestFeatures& features, const std::vector<double>& other, const MlpParams& params) {
  return mlp_forward(params, assemble_input(features, other));
}

CtrLoss ctr_loss(double pctr, int label) {
  if (!(pctr > 0.0 && pctr < 1.0)) throw NumericError("ctr_loss: pctr outside (0,1)");
  if (label == 1) return {-std::log(pctr), -1.0 / pctr};
  return {-std::log(1.0 - pctr), 1.0 / (1.0 - pctr)};
}

CtrGradients::CtrGradients(const MlpParams& shape, std::size_t dim)
    : mlp(MlpParams::zeros_like(shape)), bins(dim), positions(dim) {}

void CtrGradients::clear() {
  mlp.set_zero();
  bins.clear();
  positions.clear();
}

double ctr_backward(const InterestFeatures& features, const std::vector<double>& other, int label,
                    const MlpParams& params, const FeatureTables& tables, double scale,
                    CtrGradients& grads, bool train_positions) {
  MlpCache cache;
  const double p = mlp_forward(params, assemble_input(features, other), &cache);
  const double loss = ctr_loss(p, label).loss;
  // sigmoid + cross entropy: dL/dlogit = p - y
  const Eigen::VectorXd dinput = mlp_backward(params, cache, p - static_cast<double>(label), scale, grads.mlp);

  const std::size_t dim = tables.bins.dim();
  std::size_t offset = 0;
  for (const auto* f : {&features.i2i, &features.q2q, &features.q2i}) {
    accumulate_feature_grad(*f, dinput, offset, dim, scale, tables, grads, train_positions);
    offset += f->vector.size();
  }
  return loss;
}

MlpOptimizer::MlpOptimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr >= 0.0)) throw ConfigError("lr_ctr", "must be >= 0");
}

void MlpOptimizer::apply(MlpParams& params, const MlpParams& grads) {
  if (!grads.all_finite()) throw NumericError("non-finite MLP gradient");
  if (kind_ == OptimizerKind::Sgd) {
    params.add_scaled(grads, -lr_);
    return;
  }
  if (m_.layers() == 0) {
    m_ = MlpParams::zeros_like(params);
    v_ = MlpParams::zeros_like(params);
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  auto update = [&](auto& w, const auto& g, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    w.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < params.layers(); ++l) {
    update(params.weights[l], grads.weights[l], m_.weights[l], v_.weights[l]);
    update(params.biases[l], grads.biases[l], m_.biases[l], v_.biases[l]);
  }
}

void write_mlp(std::ostream& out, const MlpParams& params) {
  out << std::setprecision(17);
  out << "mlp " << params.layers() << '\n';
  for (std::size_t l = 0; l < params.layers(); ++l) {
    const auto& w = params.weights[l];
    out << "layer " << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << w(r, c) << '\n';
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) out << params.biases[l][r] << '\n';
  }
}

MlpParams read_mlp(std::istream& in) {
  std::string tag;
  std::size_t layers = 0;
  if (!(in >> tag >> layers) || tag != "mlp" || layers == 0) throw ParseError("bad MLP header");
  MlpParams p;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> tag >> rows >> cols) || tag != "layer" || rows <= 0 || cols <= 0) {
      throw ParseError("bad MLP layer header");
    }
    Eigen::MatrixXd w(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> w(r, c))) throw ParseError("truncated MLP weights");
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!(in >> b[r])) throw ParseError("truncated MLP biases");
    }
    if (!p.weights.empty() && p.weights.back().rows() != cols) throw ParseError("MLP layer shapes do not compose");
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (p.weights.back().rows() != 1) throw ParseError("MLP must end in a single output");
  return p;
}

}  // namespace egin
