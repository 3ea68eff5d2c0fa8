#include "rts/learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rts/learn/policy.hpp"
#include "rts/types.hpp"

namespace rts::learn {

GaeResult gae(std::span<const double> rewards, std::span<const double> values, std::span<const uint8_t> dones,
              double bootstrap, double gamma, double lambda) {
  const size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("gae: length mismatch");
  GaeResult g{std::vector<double>(n), std::vector<double>(n)};
  double next_adv = 0;
  for (size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 < n ? values[k + 1] : bootstrap;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    g.advantages[k] = next_adv;
    g.returns[k] = next_adv + values[k];
  }
  return g;
}

int PpoConfig::num_updates() const { return static_cast<int>(total_steps / batch_size()); }

double PpoConfig::lr_at(int update) const {
  if (!anneal_lr) return lr;
  return lr * (1.0 - static_cast<double>(update) / num_updates());
}

void PpoConfig::validate() const {
  if (envs <= 0 || steps <= 0 || minibatches <= 0 || epochs <= 0) throw ConfigError("ppo: non-positive size");
  if (minibatches > batch_size()) throw ConfigError("ppo: more minibatches than transitions");
  if (num_updates() <= 0) throw ConfigError("ppo: total_steps smaller than one segment");
  if (!(gamma >= 0 && gamma <= 1 && lambda >= 0 && lambda <= 1)) throw ConfigError("ppo: gamma/lambda outside [0,1]");
  if (!(clip > 0 && max_grad_norm > 0 && lr >= 0 && adam_eps > 0)) throw ConfigError("ppo: bad clip/lr/eps");
}

RolloutBuffer::RolloutBuffer(const NetSpec& spec, int steps_, int envs_)
    : steps(steps_),
      envs(envs_),
      obs_size(spec.input_size()),
      mask_size(learn::mask_size(spec)),
      action_size(learn::action_size(spec)) {
  const size_t n = static_cast<size_t>(steps) * envs;
  obs.assign(n * obs_size, 0);
  masks.assign(n * mask_size, 0);
  actions.assign(n * action_size, 0);
  log_probs.assign(n, 0);
  values.assign(n, 0);
  rewards.assign(n, 0);
  dones.assign(n, 0);
  bootstrap.assign(envs, 0);
}

GaeResult RolloutBuffer::advantages(double gamma, double lambda) const {
  GaeResult out{std::vector<double>(size()), std::vector<double>(size())};
  std::vector<double> r(steps), v(steps);
  std::vector<uint8_t> d(steps);
  for (int e = 0; e < envs; ++e) {
    for (int t = 0; t < steps; ++t) {
      const int i = index(t, e, envs);
      r[t] = rewards[i];
      v[t] = values[i];
      d[t] = dones[i];
    }
    const auto g = gae(r, v, d, bootstrap[e], gamma, lambda);
    for (int t = 0; t < steps; ++t) {
      out.advantages[index(t, e, envs)] = g.advantages[t];
      out.returns[index(t, e, envs)] = g.returns[t];
    }
  }
  return out;
}

Minibatch Minibatch::gather(const RolloutBuffer& buf, const GaeResult& g, std::span<const int> idx) {
  Minibatch mb;
  mb.size = static_cast<int>(idx.size());
  mb.obs.reserve(idx.size() * buf.obs_size);
  mb.masks.reserve(idx.size() * buf.mask_size);
  mb.actions.reserve(idx.size() * buf.action_size);
  for (int i : idx) {
    auto o = buf.obs_row(i);
    auto m = buf.mask_row(i);
    auto a = buf.action_row(i);
    mb.obs.insert(mb.obs.end(), o.begin(), o.end());
    mb.masks.insert(mb.masks.end(), m.begin(), m.end());
    mb.actions.insert(mb.actions.end(), a.begin(), a.end());
    mb.old_log_probs.push_back(buf.log_probs[i]);
    mb.old_values.push_back(buf.values[i]);
    mb.advantages.push_back(g.advantages[i]);
    mb.returns.push_back(g.returns[i]);
  }
  return mb;
}

std::vector<double> normalize_advantages(std::span<const double> adv) {
  const double n = static_cast<double>(adv.size());
  double mean = 0;
  for (double a : adv) mean += a;
  mean /= n;
  double var = 0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(adv.size());
  for (size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) / (sd + 1e-8);
  return out;
}

template <class R>
LossStats ppo_loss(const PolicyValueNet<R>& net, const Minibatch& mb, const PpoConfig& cfg, std::span<R> grad) {
  const NetSpec& spec = net.spec();
  const int n = mb.size;
  const int np = spec.policy_size();
  const int ms = mask_size(spec);
  const int as = action_size(spec);
  typename PolicyValueNet<R>::Cache cache;
  net.forward(mb.obs, n, cache, cfg.exec);

  const auto adv = normalize_advantages(mb.advantages);
  const bool want_grad = !grad.empty();
  std::vector<R> dlogits(want_grad ? static_cast<size_t>(n) * np : 0, R(0));
  std::vector<R> dvalue(want_grad ? n : 0, R(0));

  LossStats s;
  const double eps = cfg.clip;
  for (int i = 0; i < n; ++i) {
    auto logits = std::span<const R>(cache.logits).subspan(static_cast<size_t>(i) * np, np);
    auto masks = std::span<const uint8_t>(mb.masks).subspan(static_cast<size_t>(i) * ms, ms);
    auto acts = std::span<const int>(mb.actions).subspan(static_cast<size_t>(i) * as, as);
    const double lp = row_log_prob(spec, logits, masks, acts, cfg.variant);
    const double ent = row_entropy(spec, logits, masks);
    const double log_ratio = lp - mb.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    const double a = adv[i];
    const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double unclipped = -a * ratio;
    const double clipped = -a * clipped_ratio;
    const bool use_unclipped = unclipped >= clipped;
    s.pg_loss += use_unclipped ? unclipped : clipped;

    const double v = static_cast<double>(cache.value[i]);
    const double v_old = mb.old_values[i];
    const double ret = mb.returns[i];
    const double dv_raw = v - v_old;
    const double v_clipped = v_old + std::clamp(dv_raw, -eps, eps);
    const double l_unclipped = (v - ret) * (v - ret);
    const double l_clipped = (v_clipped - ret) * (v_clipped - ret);
    const bool value_unclipped = l_unclipped >= l_clipped;
    s.v_loss += value_unclipped ? l_unclipped : l_clipped;

    s.entropy += ent;
    s.approx_kl += -log_ratio;
    if (std::abs(ratio - 1.0) > eps) s.clip_frac += 1;

    if (want_grad) {
      // d pg / d lp: only the active branch of the max carries gradient, and
      // the clipped branch only while the ratio is inside the clip range.
      const double dpg = use_unclipped ? -a * ratio : (clipped_ratio == ratio ? -a * ratio : 0.0);
      add_row_grads(spec, logits, masks, acts, dpg / n, -cfg.c2 / n, cfg.variant,
                    std::span<R>(dlogits).subspan(static_cast<size_t>(i) * np, np));
      double dl;
      if (value_unclipped) {
        dl = 2.0 * (v - ret);
      } else {
        dl = std::abs(dv_raw) < eps ? 2.0 * (v_clipped - ret) : 0.0;
      }
      dvalue[i] = static_cast<R>(cfg.c1 * dl / n);
    }
  }
  s.pg_loss /= n;
  s.v_loss /= n;
  s.entropy /= n;
  s.approx_kl /= n;
  s.clip_frac /= n;
  s.loss = s.pg_loss + cfg.c1 * s.v_loss - cfg.c2 * s.entropy;
  if (!std::isfinite(s.loss)) {
    std::ostringstream os;
    os << "non-finite loss: pg=" << s.pg_loss << " v=" << s.v_loss << " entropy=" << s.entropy
       << " kl=" << s.approx_kl;
    throw NonFiniteLoss(os.str());
  }
  if (want_grad) net.backward(cache, dlogits, dvalue, grad, cfg.exec);
  return s;
}

template LossStats ppo_loss<float>(const PolicyValueNet<float>&, const Minibatch&, const PpoConfig&, std::span<float>);
template LossStats ppo_loss<double>(const PolicyValueNet<double>&, const Minibatch&, const PpoConfig&,
                                    std::span<double>);

std::vector<std::vector<int>> minibatch_indices(int n, int parts, std::mt19937_64& rng) {
  if (parts <= 0 || parts > n) throw std::invalid_argument("minibatch_indices: bad partition");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform01(rng) * (i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<int>> out(parts);
  for (int p = 0; p < parts; ++p) {
    const int lo = static_cast<int>(static_cast<long long>(n) * p / parts);
    const int hi = static_cast<int>(static_cast<long long>(n) * (p + 1) / parts);
    out[p].assign(perm.begin() + lo, perm.begin() + hi);
  }
  return out;
}

Adam::Adam(size_t n, double eps, double beta1, double beta2) : eps_(eps), b1_(beta1), b2_(beta2), m_(n, 0), v_(n, 0) {}

void Adam::step(std::span<float> params, std::span<const float> grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = b1_ * m_[i] + (1 - b1_) * g;
    v_[i] = b2_ * v_[i] + (1 - b2_) * g * g;
    const double mh = m_[i] / c1;
    const double vh = v_[i] / c2;
    params[i] = static_cast<float>(params[i] - lr * mh / (std::sqrt(vh) + eps_));
  }
}

double global_norm(std::span<const float> grad) {
  double s = 0;
  for (float g : grad) s += static_cast<double>(g) * g;
  return std::sqrt(s);
}

double clip_global_norm(std::span<float> grad, double max_norm) {
  const double norm = global_norm(grad);
  if (norm > max_norm) {
    const double k = max_norm / (norm + 1e-6);
    for (auto& g : grad) g = static_cast<float>(g * k);
  }
  return norm;
}

PpoLearner::PpoLearner(PolicyValueNet<float>& net, PpoConfig cfg, uint64_t seed)
    : net_(net), cfg_(cfg), adam_(net.params().size(), cfg.adam_eps), rng_(seed) {
  cfg_.validate();
}

UpdateStats PpoLearner::update(const RolloutBuffer& buf, int update_index) {
  const GaeResult g = buf.advantages(cfg_.gamma, cfg_.lambda);
  UpdateStats st;
  st.lr = cfg_.lr_at(update_index);
  std::vector<float> grad(net_.params().size());
  int count = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (const auto& idx : minibatch_indices(buf.size(), cfg_.minibatches, rng_)) {
      const Minibatch mb = Minibatch::gather(buf, g, idx);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const LossStats ls = ppo_loss<float>(net_, mb, cfg_, grad);
      const double norm = clip_global_norm(grad, cfg_.max_grad_norm);
      if (!std::isfinite(norm)) throw NonFiniteLoss("non-finite gradient norm");
      adam_.step(net_.params(), grad, st.lr);
      st.loss.loss += ls.loss;
      st.loss.pg_loss += ls.pg_loss;
      st.loss.v_loss += ls.v_loss;
      st.loss.entropy += ls.entropy;
      st.loss.approx_kl += ls.approx_kl;
      st.loss.clip_frac += ls.clip_frac;
      st.grad_norm += norm;
      ++count;
    }
  }
  st.loss.loss /= count;
  st.loss.pg_loss /= count;
  st.loss.v_loss /= count;
  st.loss.entropy /= count;
  st.loss.approx_kl /= count;
  st.loss.clip_frac /= count;
  st.grad_norm /= count;
  return st;
}

}  // namespace rts::learn
