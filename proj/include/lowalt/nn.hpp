#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lowalt {

enum class Activation { kRelu, kTanh };
enum class Head { kLinear, kGaussianPolicy };

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

struct MlpSpec {
  int input_dim{1};
  std::vector<int> hidden{64, 64};
  int output_dim{1};  // gaussian head: the action dimension
  Activation activation{Activation::kRelu};
  Head head{Head::kLinear};

  // Width of the last linear layer; the gaussian head emits mean and log-std.
  int raw_output_dim() const {
    return head == Head::kGaussianPolicy ? 2 * output_dim : output_dim;
  }
  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
};

struct MlpParams {
  std::vector<Eigen::MatrixXd> w;  // (out x in) per layer
  std::vector<Eigen::VectorXd> b;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Uniform Glorot draws, row-major order within each weight matrix; biases
// start at zero. Same seed, same net.
MlpParams glorot_init(const MlpSpec& spec, std::uint64_t seed);

MlpGrads zero_grads(const MlpParams& p);

struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;  // pre-activation per hidden layer
  std::vector<Eigen::MatrixXd> act;  // post-activation per hidden layer
};

// Rows are samples. Returns the raw output of the last linear layer (before
// any head processing).
Eigen::MatrixXd mlp_forward(const MlpSpec& spec, const MlpParams& p,
                            const Eigen::MatrixXd& x, ForwardCache* cache = nullptr);

// Backward pass from dL/d(raw output). Accumulates into grads (callers zero
// them first) and returns dL/dx for chaining into an input.
Eigen::MatrixXd mlp_backward(const MlpSpec& spec, const MlpParams& p,
                             const ForwardCache& cache, const Eigen::MatrixXd& dy,
                             MlpGrads& grads);

struct GaussianOut {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd log_std;  // clamped
};

GaussianOut split_gaussian(const Eigen::MatrixXd& raw);

struct SquashedSample {
  Eigen::MatrixXd pre_tanh;
  Eigen::MatrixXd action;    // in (-1, 1)
  Eigen::VectorXd log_prob;  // per sample
};

// Reparameterized draw: action = tanh(mean + exp(log_std) * noise), with the
// squash correction folded into the log-probability.
SquashedSample sample_squashed(const GaussianOut& g, const Eigen::MatrixXd& noise);

// Chains upstream gradients (per-element dL/daction plus per-sample
// dL/dlog_prob) back to the raw head output, including the log-std clamp.
Eigen::MatrixXd squashed_backward(const Eigen::MatrixXd& raw, const GaussianOut& g,
                                  const SquashedSample& s,
                                  const Eigen::MatrixXd& noise,
                                  const Eigen::MatrixXd& d_action,
                                  const Eigen::VectorXd& d_log_prob);

// Log-probability of an arbitrary action in (-1,1)^d under the squashed
// gaussian; the action is unsquashed with a clamped atanh.
double squashed_log_prob(const GaussianOut& g, int row, const Eigen::VectorXd& action);

struct AdamConfig {
  double lr{3e-4};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
};

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step{0};

  static AdamState zeros_like(const MlpParams& p);
};

void adam_update(MlpParams& p, const MlpGrads& g, AdamState& st, const AdamConfig& cfg);

// JSON checkpoint, weights as base64 little-endian doubles.
std::string save_weights(const MlpSpec& spec, const MlpParams& p,
                         const AdamState* opt = nullptr);

struct LoadedNet {
  MlpSpec spec;
  MlpParams params;
  std::optional<AdamState> opt;
};

LoadedNet load_weights(const std::string& text);

struct GradCheckReport {
  double max_rel_err{0.0};
  double max_abs_err{0.0};
};

// Central differences over every parameter coordinate.
GradCheckReport gradient_check(const std::function<double(const MlpParams&)>& f,
                               const MlpParams& at, const MlpGrads& analytic,
                               double h = 1e-5);

}  // namespace lowalt
