#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "pba/numlin.hpp"

namespace pba {

/// Layer widths including the input and output layers, e.g.
/// [3, 20, 3, 2, 3, 20, 3] with the bottleneck at index 3.
struct Architecture {
  std::vector<Index> widths;
  std::size_t bottleneck_index = 0;

  explicit Architecture(std::vector<Index> widths_);

  /// Parse a dash-separated width list like "3-20-3-2-3-20-3".
  static Architecture parse(const std::string& spec);
  std::string to_string() const;

  Index input_dim() const { return widths.front(); }
  Index bottleneck_dim() const { return widths[bottleneck_index]; }
  std::size_t num_weight_layers() const { return widths.size() - 1; }

  /// True when every hidden width outside the bottleneck is >= n and the
  /// widths adjacent to the bottleneck equal n. Required by the PCA
  /// initializations.
  bool is_vase() const;
  void require_vase() const;

  bool operator==(const Architecture&) const = default;
};

struct AeParams {
  Architecture arch;
  std::vector<Matrix> weights;  // weights[i]: widths[i] x widths[i+1]
  std::vector<Vector> biases;   // biases[i]: widths[i+1]
  std::vector<Vector> alphas;   // per-node PReLU slopes, one vector per layer
  bool prelu_on_output = false; // output layer linear by default
  bool rank_warning = false;    // set by PCA inits when q exceeded data rank

  explicit AeParams(Architecture a);
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int max_epochs = 10000;
  int patience = 100;
  bool freeze_alphas = false;
  std::uint64_t seed = 0;
};

inline double prelu(double z, double alpha) { return z >= 0.0 ? z : alpha * z; }
inline std::pair<double, double> prelu_grad(double z, double alpha) {
  return z >= 0.0 ? std::pair{1.0, 0.0} : std::pair{alpha, z};
}

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // post[0] = input, post[i+1] = layer i output
};

Matrix forward(const AeParams& params, const Matrix& x,
               ForwardCache* cache = nullptr);

/// Training objective: mean over rows of the squared L2 distance.
double loss(const Matrix& x, const Matrix& x_hat);
/// Reporting metric: mean over rows of the L2 distance.
double avg_l2(const Matrix& x, const Matrix& x_hat);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Vector> alphas;
};

/// Exact gradient of loss(x, forward(params, x)) for every weight, bias
/// and PReLU slope.
Gradients gradients(const AeParams& params, const Matrix& x);

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b, m_a, v_a;
  long step = 0;
};

AdamState make_adam_state(const AeParams& params);
void adam_step(AeParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

struct TrainResult {
  AeParams best;
  std::vector<double> train_history;  // entry 0 = before any update
  std::vector<double> val_history;
  int best_epoch = 0;
  int epochs_trained = 0;
  bool diverged = false;
  int diverged_epoch = -1;
};

/// Full-batch Adam with early stopping on validation loss; returns the
/// parameters with the lowest validation loss ever observed.
TrainResult train(const AeParams& init, const Matrix& train_x,
                  const Matrix& val_x, const TrainConfig& config);

Matrix encode(const AeParams& params, const Matrix& x);
Matrix decode(const AeParams& params, const Matrix& codes);

/// Per-layer uniform fan-in scaled weights, zero biases, unit slopes.
AeParams random_init(const Architecture& arch, Rng& rng);

nlohmann::json ae_to_json(const AeParams& params);
AeParams ae_from_json(const nlohmann::json& j);

}  // namespace pba
