#include "lowalt/sac.hpp"

#include <cmath>

#include "lowalt/errors.hpp"

namespace lowalt {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("replay buffer capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);  // overwrite the oldest
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      Rng& rng) const {
  if (data_.empty()) throw BufferTooSmall("sampling from an empty buffer");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(data_.size());
  return idx;
}

void ReplayBuffer::restore(std::vector<Transition> data, std::size_t head) {
  if (data.size() > capacity_ || (head >= capacity_ && capacity_ > 0 && head != 0))
    throw ValidationError("buffer restore exceeds capacity");
  data_ = std::move(data);
  head_ = head;
}

SacAgent::SacAgent(SacConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
  actor_spec_.input_dim = cfg_.obs_dim;
  actor_spec_.hidden = cfg_.hidden;
  actor_spec_.output_dim = cfg_.action_dim;
  actor_spec_.head = Head::kGaussianPolicy;

  critic_spec_.input_dim = cfg_.obs_dim + cfg_.action_dim;
  critic_spec_.hidden = cfg_.hidden;
  critic_spec_.output_dim = 1;
  critic_spec_.head = Head::kLinear;

  // Sub-seeds keep the five nets distinct but reproducible from one seed.
  actor_ = glorot_init(actor_spec_, init_seed);
  critic1_ = glorot_init(critic_spec_, init_seed + 1);
  critic2_ = glorot_init(critic_spec_, init_seed + 2);
  target1_ = critic1_;
  target2_ = critic2_;
  actor_opt_ = AdamState::zeros_like(actor_);
  critic1_opt_ = AdamState::zeros_like(critic1_);
  critic2_opt_ = AdamState::zeros_like(critic2_);
}

Eigen::MatrixXd SacAgent::normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                        Rng& rng) const {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

Vec2 SacAgent::act(const Eigen::VectorXd& obs, bool stochastic, Rng& rng) {
  if (obs.size() != cfg_.obs_dim) throw ShapeMismatch("act: observation width");
  const Eigen::MatrixXd raw = mlp_forward(actor_spec_, actor_, obs.transpose());
  const GaussianOut g = split_gaussian(raw);
  if (!stochastic) {
    const Eigen::MatrixXd a = g.mean.array().tanh().matrix();
    return Vec2(a(0, 0), a(0, 1)) * cfg_.action_scale;
  }
  const Eigen::MatrixXd noise = normal_matrix(1, cfg_.action_dim, rng);
  const SquashedSample s = sample_squashed(g, noise);
  return Vec2(s.action(0, 0), s.action(0, 1)) * cfg_.action_scale;
}

double SacAgent::compute_target(double reward, bool done, double min_q_next,
                                double log_pi_next) const {
  const double cont = done ? 0.0 : 1.0;
  return reward +
         cont * cfg_.gamma * (min_q_next - cfg_.temperature * log_pi_next);
}

SacAgent::Batch SacAgent::gather(const ReplayBuffer& buffer,
                                 const std::vector<std::size_t>& idx) const {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Batch b;
  b.obs.resize(n, cfg_.obs_dim);
  b.next_obs.resize(n, cfg_.obs_dim);
  b.action_unit.resize(n, cfg_.action_dim);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Transition& t = buffer.at(idx[static_cast<std::size_t>(r)]);
    if (t.obs.size() != cfg_.obs_dim) throw ShapeMismatch("transition width");
    b.obs.row(r) = t.obs.transpose();
    b.next_obs.row(r) = t.next_obs.transpose();
    // Critics see actions in the squashed (-1,1) frame regardless of origin.
    Vec2 a = t.action / cfg_.action_scale;
    b.action_unit(r, 0) = std::clamp(a.x(), -1.0, 1.0);
    b.action_unit(r, 1) = std::clamp(a.y(), -1.0, 1.0);
    b.reward[r] = t.reward;
    b.done[r] = t.done ? 1.0 : 0.0;
  }
  return b;
}

UpdateStats SacAgent::critic_update(const ReplayBuffer& buffer,
                                    const std::vector<std::size_t>& idx, Rng& rng) {
  if (buffer.size() < idx.size()) throw BufferTooSmall("batch larger than buffer");
  const Batch b = gather(buffer, idx);
  const Eigen::Index n = b.obs.rows();

  // Fresh policy draw at the next observation for the entropy-regularized
  // Bellman target.
  const Eigen::MatrixXd raw_next = mlp_forward(actor_spec_, actor_, b.next_obs);
  const GaussianOut g_next = split_gaussian(raw_next);
  const Eigen::MatrixXd noise = normal_matrix(n, cfg_.action_dim, rng);
  const SquashedSample s_next = sample_squashed(g_next, noise);

  Eigen::MatrixXd in_next(n, cfg_.obs_dim + cfg_.action_dim);
  in_next << b.next_obs, s_next.action;
  const Eigen::MatrixXd q1n = mlp_forward(critic_spec_, target1_, in_next);
  const Eigen::MatrixXd q2n = mlp_forward(critic_spec_, target2_, in_next);

  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mq = std::min(q1n(r, 0), q2n(r, 0));
    y[r] = compute_target(b.reward[r], b.done[r] > 0.5, mq, s_next.log_prob[r]);
  }

  Eigen::MatrixXd in(n, cfg_.obs_dim + cfg_.action_dim);
  in << b.obs, b.action_unit;

  UpdateStats st;
  st.target_mean = y.mean();
  auto fit = [&](MlpParams& params, AdamState& opt) {
    ForwardCache cache;
    const Eigen::MatrixXd q = mlp_forward(critic_spec_, params, in, &cache);
    const Eigen::VectorXd err = q.col(0) - y;
    const double loss = err.squaredNorm() / static_cast<double>(n);
    MlpGrads grads = zero_grads(params);
    const Eigen::MatrixXd dq = (2.0 / static_cast<double>(n)) * err;
    mlp_backward(critic_spec_, params, cache, dq, grads);
    adam_update(params, grads, opt, {cfg_.critic_lr});
    return loss;
  };
  st.critic1_loss = fit(critic1_, critic1_opt_);
  st.critic2_loss = fit(critic2_, critic2_opt_);
  return st;
}

SacAgent::ActorStats SacAgent::actor_update(const ReplayBuffer& buffer,
                                            const std::vector<std::size_t>& idx,
                                            Rng& rng) {
  const Batch b = gather(buffer, idx);
  const Eigen::Index n = b.obs.rows();

  ForwardCache actor_cache;
  const Eigen::MatrixXd raw = mlp_forward(actor_spec_, actor_, b.obs, &actor_cache);
  const GaussianOut g = split_gaussian(raw);
  const Eigen::MatrixXd noise = normal_matrix(n, cfg_.action_dim, rng);
  const SquashedSample s = sample_squashed(g, noise);

  Eigen::MatrixXd in(n, cfg_.obs_dim + cfg_.action_dim);
  in << b.obs, s.action;

  ForwardCache c1_cache, c2_cache;
  const Eigen::MatrixXd q1 = mlp_forward(critic_spec_, critic1_, in, &c1_cache);
  const Eigen::MatrixXd q2 = mlp_forward(critic_spec_, critic2_, in, &c2_cache);

  // Reparameterized objective: temperature * log pi - min(Q1, Q2).
  ActorStats st;
  double loss = 0.0;
  double q_min_sum = 0.0;
  Eigen::MatrixXd dq1 = Eigen::MatrixXd::Zero(n, 1);
  Eigen::MatrixXd dq2 = Eigen::MatrixXd::Zero(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const bool first = q1(r, 0) <= q2(r, 0);  // tie keeps the first critic
    const double qm = std::min(q1(r, 0), q2(r, 0));
    q_min_sum += qm;
    loss += cfg_.temperature * s.log_prob[r] - qm;
    (first ? dq1 : dq2)(r, 0) = -1.0 / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  // Input gradients through the critics; their own parameters stay frozen.
  MlpGrads scratch1 = zero_grads(critic1_);
  MlpGrads scratch2 = zero_grads(critic2_);
  const Eigen::MatrixXd din1 = mlp_backward(critic_spec_, critic1_, c1_cache, dq1, scratch1);
  const Eigen::MatrixXd din2 = mlp_backward(critic_spec_, critic2_, c2_cache, dq2, scratch2);
  const Eigen::MatrixXd d_action =
      din1.rightCols(cfg_.action_dim) + din2.rightCols(cfg_.action_dim);

  const Eigen::VectorXd d_log_prob = Eigen::VectorXd::Constant(
      n, cfg_.temperature / static_cast<double>(n));

  const Eigen::MatrixXd d_raw =
      squashed_backward(raw, g, s, noise, d_action, d_log_prob);
  MlpGrads grads = zero_grads(actor_);
  mlp_backward(actor_spec_, actor_, actor_cache, d_raw, grads);
  adam_update(actor_, grads, actor_opt_, {cfg_.actor_lr});

  st.loss = loss;
  st.log_pi_mean = s.log_prob.mean();
  st.q_min_mean = q_min_sum / static_cast<double>(n);
  return st;
}

void SacAgent::polyak_update() {
  const double rho = cfg_.polyak;
  auto blend = [rho](MlpParams& tgt, const MlpParams& src) {
    for (std::size_t l = 0; l < tgt.w.size(); ++l) {
      tgt.w[l] = (1.0 - rho) * tgt.w[l] + rho * src.w[l];
      tgt.b[l] = (1.0 - rho) * tgt.b[l] + rho * src.b[l];
    }
  };
  blend(target1_, critic1_);
  blend(target2_, critic2_);
}

UpdateStats SacAgent::update(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size))
    throw BufferTooSmall("not enough transitions for a batch");
  const auto idx =
      buffer.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng);
  UpdateStats st = critic_update(buffer, idx, rng);
  const ActorStats as = actor_update(buffer, idx, rng);
  st.actor_loss = as.loss;
  st.log_pi_mean = as.log_pi_mean;
  st.q_min_mean = as.q_min_mean;
  polyak_update();
  return st;
}

}  // namespace lowalt
