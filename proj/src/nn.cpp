#include "lowalt/nn.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

#include "lowalt/base64.hpp"
#include "lowalt/errors.hpp"
#include "lowalt/rng.hpp"

namespace lowalt {

using nlohmann::json;

namespace {

std::vector<int> layer_dims(const MlpSpec& spec) {
  std::vector<int> dims;
  dims.push_back(spec.input_dim);
  for (int h : spec.hidden) dims.push_back(h);
  dims.push_back(spec.raw_output_dim());
  return dims;
}

Eigen::MatrixXd apply_activation(const MlpSpec& spec, const Eigen::MatrixXd& z) {
  if (spec.activation == Activation::kRelu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

Eigen::MatrixXd activation_grad(const MlpSpec& spec, const Eigen::MatrixXd& pre,
                                const Eigen::MatrixXd& post) {
  if (spec.activation == Activation::kRelu)
    return (pre.array() > 0.0).cast<double>().matrix();
  return (1.0 - post.array().square()).matrix();
}

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

}  // namespace

MlpParams glorot_init(const MlpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const auto dims = layer_dims(spec);
  MlpParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    p.w.push_back(std::move(w));
    p.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

MlpGrads zero_grads(const MlpParams& p) {
  MlpGrads g;
  for (const auto& w : p.w) g.w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.b) g.b.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

Eigen::MatrixXd mlp_forward(const MlpSpec& spec, const MlpParams& p,
                            const Eigen::MatrixXd& x, ForwardCache* cache) {
  if (x.cols() != spec.input_dim)
    throw ShapeMismatch("forward: input width does not match the spec");
  if (static_cast<int>(p.w.size()) != spec.layer_count())
    throw ShapeMismatch("forward: parameter count does not match the spec");
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->act.clear();
  }
  Eigen::MatrixXd h = x;
  const int n_hidden = static_cast<int>(spec.hidden.size());
  for (int l = 0; l < n_hidden; ++l) {
    Eigen::MatrixXd z = (h * p.w[l].transpose()).rowwise() + p.b[l].transpose();
    Eigen::MatrixXd a = apply_activation(spec, z);
    if (cache) {
      cache->pre.push_back(z);
      cache->act.push_back(a);
    }
    h = std::move(a);
  }
  return (h * p.w[n_hidden].transpose()).rowwise() + p.b[n_hidden].transpose();
}

Eigen::MatrixXd mlp_backward(const MlpSpec& spec, const MlpParams& p,
                             const ForwardCache& cache, const Eigen::MatrixXd& dy,
                             MlpGrads& grads) {
  const int n_hidden = static_cast<int>(spec.hidden.size());
  Eigen::MatrixXd delta = dy;
  for (int l = n_hidden; l >= 0; --l) {
    const Eigen::MatrixXd& in = l == 0 ? cache.input : cache.act[l - 1];
    grads.w[l] += delta.transpose() * in;
    grads.b[l] += delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd d_in = delta * p.w[l];
    delta = d_in.cwiseProduct(activation_grad(spec, cache.pre[l - 1], cache.act[l - 1]));
  }
  return delta * p.w[0];
}

GaussianOut split_gaussian(const Eigen::MatrixXd& raw) {
  if (raw.cols() % 2 != 0)
    throw ShapeMismatch("gaussian head needs an even raw width");
  const int d = static_cast<int>(raw.cols()) / 2;
  GaussianOut g;
  g.mean = raw.leftCols(d);
  g.log_std = raw.rightCols(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return g;
}

SquashedSample sample_squashed(const GaussianOut& g, const Eigen::MatrixXd& noise) {
  if (noise.rows() != g.mean.rows() || noise.cols() != g.mean.cols())
    throw ShapeMismatch("noise shape does not match the head output");
  SquashedSample s;
  s.pre_tanh = g.mean + g.log_std.array().exp().matrix().cwiseProduct(noise);
  s.action = s.pre_tanh.array().tanh().matrix();
  const auto gauss = (-0.5 * noise.array().square() - g.log_std.array() - kHalfLog2Pi);
  const auto squash = (1.0 - s.action.array().square() + kSquashEps).log();
  s.log_prob = (gauss - squash).rowwise().sum().matrix();
  return s;
}

Eigen::MatrixXd squashed_backward(const Eigen::MatrixXd& raw, const GaussianOut& g,
                                  const SquashedSample& s,
                                  const Eigen::MatrixXd& noise,
                                  const Eigen::MatrixXd& d_action,
                                  const Eigen::VectorXd& d_log_prob) {
  const int n = static_cast<int>(raw.rows());
  const int d = static_cast<int>(g.mean.cols());

  const Eigen::ArrayXXd a = s.action.array();
  const Eigen::ArrayXXd one_m_a2 = 1.0 - a.square();
  // d(log_prob)/d(pre_tanh): only the squash correction depends on it.
  const Eigen::ArrayXXd dlp_du = 2.0 * a * one_m_a2 / (one_m_a2 + kSquashEps);

  Eigen::ArrayXXd du =
      d_action.array() * one_m_a2 +
      dlp_du.colwise() * d_log_prob.array();

  Eigen::MatrixXd d_raw(n, 2 * d);
  d_raw.leftCols(d) = du.matrix();

  const Eigen::ArrayXXd sigma = g.log_std.array().exp();
  Eigen::ArrayXXd dls = du * sigma * noise.array();
  dls.colwise() += -d_log_prob.array();  // direct -1 term of the gaussian density

  // Clamp: gradient passes only where the raw value was inside the bounds.
  const Eigen::ArrayXXd raw_ls = raw.rightCols(d).array();
  const Eigen::ArrayXXd mask =
      ((raw_ls >= kLogStdMin) && (raw_ls <= kLogStdMax)).cast<double>();
  d_raw.rightCols(d) = (dls * mask).matrix();
  return d_raw;
}

double squashed_log_prob(const GaussianOut& g, int row, const Eigen::VectorXd& action) {
  const int d = static_cast<int>(g.mean.cols());
  if (action.size() != d) throw ShapeMismatch("action width mismatch");
  double lp = 0.0;
  for (int i = 0; i < d; ++i) {
    const double a = std::clamp(action[i], -1.0 + 1e-6, 1.0 - 1e-6);
    const double u = std::atanh(a);
    const double ls = g.log_std(row, i);
    const double sigma = std::exp(ls);
    const double z = (u - g.mean(row, i)) / sigma;
    lp += -0.5 * z * z - ls - kHalfLog2Pi - std::log(1.0 - a * a + kSquashEps);
  }
  return lp;
}

AdamState AdamState::zeros_like(const MlpParams& p) {
  AdamState st;
  for (const auto& w : p.w) {
    st.mw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    st.vw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : p.b) {
    st.mb.push_back(Eigen::VectorXd::Zero(b.size()));
    st.vb.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return st;
}

void adam_update(MlpParams& p, const MlpGrads& g, AdamState& st, const AdamConfig& cfg) {
  if (g.w.size() != p.w.size()) throw ShapeMismatch("adam: gradient layer count");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    st.mw[l] = cfg.beta1 * st.mw[l] + (1.0 - cfg.beta1) * g.w[l];
    st.vw[l] = cfg.beta2 * st.vw[l] + (1.0 - cfg.beta2) * g.w[l].cwiseProduct(g.w[l]);
    p.w[l] -= (cfg.lr * (st.mw[l] / bc1).array() /
               ((st.vw[l] / bc2).array().sqrt() + cfg.eps))
                  .matrix();
    st.mb[l] = cfg.beta1 * st.mb[l] + (1.0 - cfg.beta1) * g.b[l];
    st.vb[l] = cfg.beta2 * st.vb[l] + (1.0 - cfg.beta2) * g.b[l].cwiseProduct(g.b[l]);
    p.b[l] -= (cfg.lr * (st.mb[l] / bc1).array() /
               ((st.vb[l] / bc2).array().sqrt() + cfg.eps))
                  .matrix();
  }
}

namespace {

std::string mat_b64(const Eigen::MatrixXd& m) {
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) buf.push_back(m(r, c));
  return doubles_to_base64(buf.data(), buf.size());
}

std::string vec_b64(const Eigen::VectorXd& v) {
  return doubles_to_base64(v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::MatrixXd mat_from_b64(const std::string& text, int rows, int cols) {
  const auto buf = doubles_from_base64(text);
  if (static_cast<int>(buf.size()) != rows * cols)
    throw ShapeMismatch("layer payload size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = buf[k++];
  return m;
}

Eigen::VectorXd vec_from_b64(const std::string& text, int n) {
  const auto buf = doubles_from_base64(text);
  if (static_cast<int>(buf.size()) != n) throw ShapeMismatch("bias payload size");
  return Eigen::Map<const Eigen::VectorXd>(buf.data(), n);
}

}  // namespace

std::string save_weights(const MlpSpec& spec, const MlpParams& p, const AdamState* opt) {
  json doc;
  doc["format_version"] = 1;
  doc["spec"] = {
      {"input_dim", spec.input_dim},
      {"hidden", spec.hidden},
      {"output_dim", spec.output_dim},
      {"activation", spec.activation == Activation::kRelu ? "relu" : "tanh"},
      {"head", spec.head == Head::kLinear ? "linear" : "gaussian"},
  };
  json layers = json::array();
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    layers.push_back({{"out", p.w[l].rows()},
                      {"in", p.w[l].cols()},
                      {"w", mat_b64(p.w[l])},
                      {"b", vec_b64(p.b[l])}});
  }
  doc["layers"] = std::move(layers);
  if (opt) {
    json ol = json::array();
    for (std::size_t l = 0; l < opt->mw.size(); ++l) {
      ol.push_back({{"mw", mat_b64(opt->mw[l])},
                    {"vw", mat_b64(opt->vw[l])},
                    {"mb", vec_b64(opt->mb[l])},
                    {"vb", vec_b64(opt->vb[l])}});
    }
    doc["optimizer_state"] = {{"step", opt->step}, {"layers", std::move(ol)}};
  }
  return doc.dump();
}

LoadedNet load_weights(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("weights: ") + e.what());
  }
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1)
    throw VersionMismatch("unsupported weights format version");
  LoadedNet net;
  try {
    const auto& js = doc.at("spec");
    net.spec.input_dim = js.at("input_dim").get<int>();
    net.spec.hidden = js.at("hidden").get<std::vector<int>>();
    net.spec.output_dim = js.at("output_dim").get<int>();
    const std::string act = js.at("activation").get<std::string>();
    net.spec.activation = act == "relu" ? Activation::kRelu : Activation::kTanh;
    const std::string head = js.at("head").get<std::string>();
    net.spec.head = head == "gaussian" ? Head::kGaussianPolicy : Head::kLinear;
    for (const auto& layer : doc.at("layers")) {
      const int out = layer.at("out").get<int>();
      const int in = layer.at("in").get<int>();
      net.params.w.push_back(mat_from_b64(layer.at("w").get<std::string>(), out, in));
      net.params.b.push_back(vec_from_b64(layer.at("b").get<std::string>(), out));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("weights fields: ") + e.what());
  }
  if (static_cast<int>(net.params.w.size()) != net.spec.layer_count())
    throw ShapeMismatch("layer count does not match the spec");
  const auto dims = layer_dims(net.spec);
  for (std::size_t l = 0; l < net.params.w.size(); ++l) {
    if (net.params.w[l].rows() != dims[l + 1] || net.params.w[l].cols() != dims[l])
      throw ShapeMismatch("layer dimensions do not match the spec");
  }
  if (doc.contains("optimizer_state")) {
    AdamState st;
    const auto& os = doc["optimizer_state"];
    st.step = os.at("step").get<long>();
    std::size_t l = 0;
    for (const auto& layer : os.at("layers")) {
      const int out = static_cast<int>(net.params.w[l].rows());
      const int in = static_cast<int>(net.params.w[l].cols());
      st.mw.push_back(mat_from_b64(layer.at("mw").get<std::string>(), out, in));
      st.vw.push_back(mat_from_b64(layer.at("vw").get<std::string>(), out, in));
      st.mb.push_back(vec_from_b64(layer.at("mb").get<std::string>(), out));
      st.vb.push_back(vec_from_b64(layer.at("vb").get<std::string>(), out));
      ++l;
    }
    if (st.mw.size() != net.params.w.size())
      throw ShapeMismatch("optimizer state layer count");
    net.opt = std::move(st);
  }
  return net;
}

GradCheckReport gradient_check(const std::function<double(const MlpParams&)>& f,
                               const MlpParams& at, const MlpGrads& analytic,
                               double h) {
  GradCheckReport rep;
  MlpParams p = at;
  auto probe = [&](double* slot, double analytic_g) {
    const double keep = *slot;
    *slot = keep + h;
    const double fp = f(p);
    *slot = keep - h;
    const double fm = f(p);
    *slot = keep;
    const double fd = (fp - fm) / (2.0 * h);
    const double abs_err = std::abs(fd - analytic_g);
    const double rel =
        abs_err / std::max(std::abs(fd) + std::abs(analytic_g), 1e-6);
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
  };
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    for (Eigen::Index r = 0; r < p.w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < p.w[l].cols(); ++c)
        probe(&p.w[l](r, c), analytic.w[l](r, c));
    for (Eigen::Index i = 0; i < p.b[l].size(); ++i)
      probe(&p.b[l][i], analytic.b[l][i]);
  }
  return rep;
}

}  // namespace lowalt
