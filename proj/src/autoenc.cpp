#include "pba/autoenc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pba {

Architecture::Architecture(std::vector<Index> widths_) : widths(std::move(widths_)) {
  if (widths.size() < 3) {
    throw std::invalid_argument("Architecture: need at least 3 layers");
  }
  for (Index w : widths) {
    if (w < 1) throw std::invalid_argument("Architecture: widths must be >= 1");
  }
  if (widths.front() != widths.back()) {
    throw std::invalid_argument("Architecture: input and output widths differ");
  }
  const Index q = *std::min_element(widths.begin(), widths.end());
  if (q >= widths.front()) {
    throw std::invalid_argument("Architecture: bottleneck must be narrower than the input");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == q) {
      bottleneck_index = i;
      ++count;
    }
  }
  if (count != 1) {
    throw std::invalid_argument("Architecture: bottleneck width must be a unique global minimum");
  }
}

Architecture Architecture::parse(const std::string& spec) {
  std::vector<Index> widths;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    try {
      widths.push_back(static_cast<Index>(std::stol(tok)));
    } catch (const std::exception&) {
      throw std::invalid_argument("Architecture: bad width '" + tok + "' in '" + spec + "'");
    }
  }
  return Architecture(std::move(widths));
}

std::string Architecture::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(widths[i]);
  }
  return out;
}

bool Architecture::is_vase() const {
  const Index n = input_dim();
  for (std::size_t i = 1; i + 1 < widths.size(); ++i) {
    if (i == bottleneck_index) continue;
    if (widths[i] < n) return false;
  }
  return widths[bottleneck_index - 1] == n && widths[bottleneck_index + 1] == n;
}

void Architecture::require_vase() const {
  if (!is_vase()) {
    throw std::invalid_argument(
        "Architecture " + to_string() +
        ": PCA initialization needs a vase shape (hidden widths >= input "
        "dimension, widths adjacent to the bottleneck equal to it)");
  }
}

AeParams::AeParams(Architecture a) : arch(std::move(a)) {
  const std::size_t nlayers = arch.num_weight_layers();
  weights.reserve(nlayers);
  biases.reserve(nlayers);
  alphas.reserve(nlayers);
  for (std::size_t i = 0; i < nlayers; ++i) {
    weights.emplace_back(Matrix::Zero(arch.widths[i], arch.widths[i + 1]));
    biases.emplace_back(Vector::Zero(arch.widths[i + 1]));
    alphas.emplace_back(Vector::Ones(arch.widths[i + 1]));
  }
}

namespace {

inline bool activated(const AeParams& p, std::size_t layer) {
  return layer + 1 < p.weights.size() || p.prelu_on_output;
}

Matrix apply_layer(const AeParams& p, std::size_t i, const Matrix& h, Matrix* pre) {
  Matrix z = (h * p.weights[i]).rowwise() + p.biases[i].transpose();
  if (pre) *pre = z;
  if (activated(p, i)) {
    const Vector& a = p.alphas[i];
    for (Index r = 0; r < z.rows(); ++r)
      for (Index c = 0; c < z.cols(); ++c)
        z(r, c) = prelu(z(r, c), a(c));
  }
  return z;
}

}  // namespace

Matrix forward(const AeParams& params, const Matrix& x, ForwardCache* cache) {
  if (x.cols() != params.arch.input_dim()) {
    throw std::invalid_argument("forward: input width mismatch");
  }
  Matrix h = x;
  if (cache) {
    cache->pre.assign(params.weights.size(), Matrix());
    cache->post.clear();
    cache->post.push_back(h);
  }
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    h = apply_layer(params, i, h, cache ? &cache->pre[i] : nullptr);
    if (cache) cache->post.push_back(h);
  }
  return h;
}

double loss(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw std::invalid_argument("loss: shape mismatch");
  }
  return (x - x_hat).rowwise().squaredNorm().mean();
}

double avg_l2(const Matrix& x, const Matrix& x_hat) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw std::invalid_argument("avg_l2: shape mismatch");
  }
  return (x - x_hat).rowwise().norm().mean();
}

Gradients gradients(const AeParams& params, const Matrix& x) {
  ForwardCache cache;
  Matrix out = forward(params, x, &cache);
  const double m = static_cast<double>(x.rows());
  const std::size_t nlayers = params.weights.size();

  Gradients g;
  g.weights.resize(nlayers);
  g.biases.resize(nlayers);
  g.alphas.resize(nlayers);

  // d(loss)/d(output) for the mean squared L2 objective.
  Matrix grad_h = (2.0 / m) * (out - x);
  for (std::size_t i = nlayers; i-- > 0;) {
    Matrix grad_z = std::move(grad_h);
    g.alphas[i] = Vector::Zero(params.alphas[i].size());
    if (activated(params, i)) {
      const Matrix& z = cache.pre[i];
      const Vector& a = params.alphas[i];
      for (Index r = 0; r < z.rows(); ++r) {
        for (Index c = 0; c < z.cols(); ++c) {
          auto [dz, da] = prelu_grad(z(r, c), a(c));
          g.alphas[i](c) += grad_z(r, c) * da;
          grad_z(r, c) *= dz;
        }
      }
    }
    g.weights[i] = cache.post[i].transpose() * grad_z;
    g.biases[i] = grad_z.colwise().sum();
    if (i > 0) grad_h = grad_z * params.weights[i].transpose();
  }
  return g;
}

AdamState make_adam_state(const AeParams& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    s.m_w.push_back(Matrix::Zero(params.weights[i].rows(), params.weights[i].cols()));
    s.v_w.push_back(Matrix::Zero(params.weights[i].rows(), params.weights[i].cols()));
    s.m_b.push_back(Vector::Zero(params.biases[i].size()));
    s.v_b.push_back(Vector::Zero(params.biases[i].size()));
    s.m_a.push_back(Vector::Zero(params.alphas[i].size()));
    s.v_a.push_back(Vector::Zero(params.alphas[i].size()));
  }
  return s;
}

namespace {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, double lr, double b1,
                 double b2, double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(AeParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, double(state.step));
  const double bc2 = 1.0 - std::pow(b2, double(state.step));
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    adam_update(params.weights[i], grads.weights[i], state.m_w[i], state.v_w[i],
                config.learning_rate, b1, b2, config.adam_epsilon, bc1, bc2);
    adam_update(params.biases[i], grads.biases[i], state.m_b[i], state.v_b[i],
                config.learning_rate, b1, b2, config.adam_epsilon, bc1, bc2);
    if (!config.freeze_alphas && activated(params, i)) {
      adam_update(params.alphas[i], grads.alphas[i], state.m_a[i], state.v_a[i],
                  config.learning_rate, b1, b2, config.adam_epsilon, bc1, bc2);
    }
  }
}

TrainResult train(const AeParams& init, const Matrix& train_x,
                  const Matrix& val_x, const TrainConfig& config) {
  if (train_x.rows() == 0 || val_x.rows() == 0) {
    throw std::invalid_argument("train: empty training or validation set");
  }
  if (config.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate <= 0");
  if (config.patience < 1) throw std::invalid_argument("train: patience < 1");

  TrainResult res{init};
  AeParams params = init;
  AdamState state = make_adam_state(params);

  double train_loss = loss(train_x, forward(params, train_x));
  double val_loss = loss(val_x, forward(params, val_x));
  res.train_history.push_back(train_loss);
  res.val_history.push_back(val_loss);
  if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
    res.diverged = true;
    res.diverged_epoch = 0;
    return res;
  }
  double best_val = val_loss;
  int since_improvement = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Gradients g = gradients(params, train_x);
    adam_step(params, g, state, config);
    train_loss = loss(train_x, forward(params, train_x));
    val_loss = loss(val_x, forward(params, val_x));
    res.train_history.push_back(train_loss);
    res.val_history.push_back(val_loss);
    res.epochs_trained = epoch;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      res.diverged = true;
      res.diverged_epoch = epoch;
      return res;
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      res.best = params;
      res.best_epoch = epoch;
      since_improvement = 0;
    } else if (++since_improvement >= config.patience) {
      break;
    }
  }
  return res;
}

Matrix encode(const AeParams& params, const Matrix& x) {
  if (x.cols() != params.arch.input_dim()) {
    throw std::invalid_argument("encode: input width mismatch");
  }
  Matrix h = x;
  for (std::size_t i = 0; i < params.arch.bottleneck_index; ++i) {
    h = apply_layer(params, i, h, nullptr);
  }
  return h;
}

Matrix decode(const AeParams& params, const Matrix& codes) {
  if (codes.cols() != params.arch.bottleneck_dim()) {
    throw std::invalid_argument("decode: code width mismatch");
  }
  Matrix h = codes;
  for (std::size_t i = params.arch.bottleneck_index; i < params.weights.size(); ++i) {
    h = apply_layer(params, i, h, nullptr);
  }
  return h;
}

AeParams random_init(const Architecture& arch, Rng& rng) {
  AeParams params(arch);
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    const double bound = 1.0 / std::sqrt(double(arch.widths[i]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (Index r = 0; r < params.weights[i].rows(); ++r)
      for (Index c = 0; c < params.weights[i].cols(); ++c)
        params.weights[i](r, c) = uni(rng);
  }
  return params;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
  auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace

nlohmann::json ae_to_json(const AeParams& params) {
  nlohmann::json j;
  j["architecture"] = params.arch.to_string();
  j["prelu_on_output"] = params.prelu_on_output;
  j["rank_warning"] = params.rank_warning;
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  j["alphas"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    j["weights"].push_back(matrix_to_json(params.weights[i]));
    j["biases"].push_back(vector_to_json(params.biases[i]));
    j["alphas"].push_back(vector_to_json(params.alphas[i]));
  }
  return j;
}

AeParams ae_from_json(const nlohmann::json& j) {
  AeParams params(Architecture::parse(j.at("architecture").get<std::string>()));
  params.prelu_on_output = j.value("prelu_on_output", false);
  params.rank_warning = j.value("rank_warning", false);
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    params.weights[i] = matrix_from_json(j.at("weights").at(i));
    params.biases[i] = vector_from_json(j.at("biases").at(i));
    params.alphas[i] = vector_from_json(j.at("alphas").at(i));
  }
  return params;
}

}  // namespace pba
