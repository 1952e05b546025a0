#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lowalt/environment.hpp"
#include "lowalt/nn.hpp"
#include "lowalt/rng.hpp"

namespace lowalt {

struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd next_obs;
  Vec2 action{0.0, 0.0};  // environment units (m/s)
  double reward{0.0};
  bool done{false};
  ActionSource source{ActionSource::kPolicy};
};

// Fixed-capacity FIFO with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t head() const { return head_; }
  const Transition& at(std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  // Checkpoint restore: replaces contents and the overwrite cursor.
  void restore(std::vector<Transition> data, std::size_t head);

 private:
  std::size_t capacity_;
  std::size_t head_{0};  // next slot to overwrite once full
  std::vector<Transition> data_;
};

struct SacConfig {
  int obs_dim{123};
  int action_dim{2};
  std::vector<int> hidden{64, 64};
  double actor_lr{1e-4};
  double critic_lr{3e-4};
  double gamma{0.99};
  double temperature{0.2};  // fixed entropy weight
  double polyak{0.005};
  std::size_t buffer_capacity{100000};
  int batch_size{256};
  int warmup_steps{1000};
  double action_scale{10.0};  // environment action = squashed action * scale
};

struct UpdateStats {
  double critic1_loss{0.0};
  double critic2_loss{0.0};
  double actor_loss{0.0};
  double target_mean{0.0};
  double log_pi_mean{0.0};
  double q_min_mean{0.0};
};

// Soft actor-critic with twin critics, target networks and a fixed
// temperature. All five networks live here; updates are plain batched
// backprop with Adam.
class SacAgent {
 public:
  SacAgent(SacConfig cfg, std::uint64_t init_seed);

  const SacConfig& config() const { return cfg_; }

  // Stochastic draws consume two normals from rng; the deterministic variant
  // squashes the mean and touches no randomness.
  Vec2 act(const Eigen::VectorXd& obs, bool stochastic, Rng& rng);

  // One full gradient step on a shared minibatch: both critics, the actor,
  // then the polyak target blend.
  UpdateStats update(const ReplayBuffer& buffer, Rng& rng);

  struct ActorStats {
    double loss{0.0};
    double log_pi_mean{0.0};
    double q_min_mean{0.0};
  };

  // Split out for tests.
  UpdateStats critic_update(const ReplayBuffer& buffer,
                            const std::vector<std::size_t>& idx, Rng& rng);
  ActorStats actor_update(const ReplayBuffer& buffer,
                          const std::vector<std::size_t>& idx, Rng& rng);
  void polyak_update();

  // Bellman backup for one transition.
  double compute_target(double reward, bool done, double min_q_next,
                        double log_pi_next) const;

  // Network access for checkpoints and tests.
  const MlpSpec& actor_spec() const { return actor_spec_; }
  const MlpSpec& critic_spec() const { return critic_spec_; }
  MlpParams& actor() { return actor_; }
  MlpParams& critic1() { return critic1_; }
  MlpParams& critic2() { return critic2_; }
  MlpParams& target1() { return target1_; }
  MlpParams& target2() { return target2_; }
  AdamState& actor_opt() { return actor_opt_; }
  AdamState& critic1_opt() { return critic1_opt_; }
  AdamState& critic2_opt() { return critic2_opt_; }

 private:
  struct Batch {
    Eigen::MatrixXd obs, next_obs, action_unit;
    Eigen::VectorXd reward, done;
  };
  Batch gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx) const;
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) const;

  SacConfig cfg_;
  MlpSpec actor_spec_, critic_spec_;
  MlpParams actor_, critic1_, critic2_, target1_, target2_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
};

}  // namespace lowalt
