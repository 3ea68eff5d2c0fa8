#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rts/learn/distributions.hpp"
#include "rts/learn/network.hpp"

namespace rts::learn {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// dones[t] marks transition t as the last of its episode; bootstrap is the
// value of the observation following the final transition.
GaeResult gae(std::span<const double> rewards, std::span<const double> values, std::span<const uint8_t> dones,
              double bootstrap, double gamma, double lambda);

struct PpoConfig {
  long long total_steps = 2'000'000;
  int envs = 8;
  int steps = 128;
  int minibatches = 4;
  int epochs = 4;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.1;
  double max_grad_norm = 0.5;
  double lr = 2.5e-4;
  bool anneal_lr = true;
  double c1 = 0.5;
  double c2 = 0.01;
  double adam_eps = 1e-5;
  MaskVariant variant = MaskVariant::Canonical;
  Exec exec = Exec::Serial;

  int batch_size() const { return envs * steps; }
  int num_updates() const;
  // lr(u) = lr * (1 - u / num_updates) when annealing.
  double lr_at(int update) const;
  void validate() const;
};

// Segment storage laid out [step][env].
struct RolloutBuffer {
  int steps = 0;
  int envs = 0;
  int obs_size = 0;
  int mask_size = 0;
  int action_size = 0;
  std::vector<uint8_t> obs;
  std::vector<uint8_t> masks;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<uint8_t> dones;
  std::vector<double> bootstrap;  // per env

  RolloutBuffer() = default;
  RolloutBuffer(const NetSpec& spec, int steps, int envs);

  int size() const { return steps * envs; }
  static int index(int t, int e, int envs) { return t * envs + e; }
  std::span<uint8_t> obs_row(int i) { return std::span<uint8_t>(obs).subspan(static_cast<size_t>(i) * obs_size, obs_size); }
  std::span<uint8_t> mask_row(int i) {
    return std::span<uint8_t>(masks).subspan(static_cast<size_t>(i) * mask_size, mask_size);
  }
  std::span<int> action_row(int i) {
    return std::span<int>(actions).subspan(static_cast<size_t>(i) * action_size, action_size);
  }
  std::span<const uint8_t> obs_row(int i) const {
    return std::span<const uint8_t>(obs).subspan(static_cast<size_t>(i) * obs_size, obs_size);
  }
  std::span<const uint8_t> mask_row(int i) const {
    return std::span<const uint8_t>(masks).subspan(static_cast<size_t>(i) * mask_size, mask_size);
  }
  std::span<const int> action_row(int i) const {
    return std::span<const int>(actions).subspan(static_cast<size_t>(i) * action_size, action_size);
  }

  // GAE per env over the segment; results in [step][env] order.
  GaeResult advantages(double gamma, double lambda) const;
};

struct Minibatch {
  int size = 0;
  std::vector<uint8_t> obs;
  std::vector<uint8_t> masks;
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> old_values;
  std::vector<double> advantages;  // raw; normalised inside the loss
  std::vector<double> returns;

  static Minibatch gather(const RolloutBuffer& buf, const GaeResult& g, std::span<const int> idx);
};

struct LossStats {
  double loss = 0;
  double pg_loss = 0;
  double v_loss = 0;
  double entropy = 0;
  double approx_kl = 0;
  double clip_frac = 0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subtract the mean and divide by the population standard deviation + 1e-8.
std::vector<double> normalize_advantages(std::span<const double> adv);

// Clipped-surrogate PPO loss on one minibatch:
// pg + c1 * value - c2 * entropy. When grad is non-empty, accumulates the
// gradient with respect to the parameters.
template <class R>
LossStats ppo_loss(const PolicyValueNet<R>& net, const Minibatch& mb, const PpoConfig& cfg, std::span<R> grad);

// Random partition of [0, n) into `parts` nearly equal minibatches.
std::vector<std::vector<int>> minibatch_indices(int n, int parts, std::mt19937_64& rng);

struct UpdateStats {
  LossStats loss;  // averaged over minibatches
  double grad_norm = 0;  // mean pre-clip global norm
  double lr = 0;
};

class Adam {
 public:
  Adam(size_t n, double eps, double beta1 = 0.9, double beta2 = 0.999);
  void step(std::span<float> params, std::span<const float> grad, double lr);
  long long steps() const { return t_; }

 private:
  double eps_, b1_, b2_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

// Global L2 norm, accumulated in double.
double global_norm(std::span<const float> grad);
// Scales grad down to max_norm when its norm exceeds it; returns the norm.
double clip_global_norm(std::span<float> grad, double max_norm);

class PpoLearner {
 public:
  PpoLearner(PolicyValueNet<float>& net, PpoConfig cfg, uint64_t seed);
  UpdateStats update(const RolloutBuffer& buf, int update_index);
  const PpoConfig& config() const { return cfg_; }

 private:
  PolicyValueNet<float>& net_;
  PpoConfig cfg_;
  Adam adam_;
  std::mt19937_64 rng_;
};

}  // namespace rts::learn
