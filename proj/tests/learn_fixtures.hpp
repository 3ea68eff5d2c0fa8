#pragma once

// Randomized finite-difference oracles for the learner, shared by the unit
// tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rts/learn/distributions.hpp"
#include "rts/learn/kernels.hpp"
#include "rts/learn/network.hpp"
#include "rts/learn/policy.hpp"
#include "rts/learn/ppo.hpp"

namespace rts::test {

using namespace rts::learn;

inline constexpr double kFdStep = 1e-4;

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Max relative error between grad and central differences of f over x.
inline double fd_check(std::vector<double>& x, const std::vector<double>& grad,
                       const std::function<double()>& f) {
  double worst = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + kFdStep;
    const double up = f();
    x[i] = keep - kFdStep;
    const double down = f();
    x[i] = keep;
    worst = std::max(worst, rel_err(grad[i], (up - down) / (2 * kFdStep)));
  }
  return worst;
}

inline std::vector<double> normals(size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random mask with at least one valid entry.
inline std::vector<uint8_t> random_mask(int n, std::mt19937_64& rng, double p = 0.6) {
  std::bernoulli_distribution bit(p);
  std::vector<uint8_t> m(n);
  for (auto& b : m) b = bit(rng);
  m[uniform_int(rng, 0, n - 1)] = 1;
  return m;
}

inline int random_valid(std::span<const uint8_t> mask, std::mt19937_64& rng) {
  std::vector<int> ok;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) ok.push_back(static_cast<int>(i));
  }
  return ok[uniform_int(rng, 0, static_cast<int>(ok.size()) - 1)];
}

// Random unit mask and a valid selection; components the chosen type does
// not consume are sometimes left empty.
inline void random_unit(std::mt19937_64& rng, std::span<uint8_t> mask, std::span<int> sel) {
  for (int c = 0; c < kNumUnitComponents; ++c) {
    auto m = random_mask(kComponentWidths[c], rng);
    std::copy(m.begin(), m.end(), mask.begin() + kComponentOffsets[c]);
  }
  std::fill(sel.begin(), sel.end(), 0);
  const int type = random_valid(mask.subspan(kComponentOffsets[0], kComponentWidths[0]), rng);
  sel[0] = type;
  const auto used = consumed_components(static_cast<ActionType>(type));
  std::bernoulli_distribution empty(0.2);
  for (int c = 1; c < kNumUnitComponents; ++c) {
    auto m = mask.subspan(kComponentOffsets[c], kComponentWidths[c]);
    if (std::find(used.begin(), used.end(), c) != used.end()) {
      sel[c] = random_valid(m, rng);
    } else if (empty(rng)) {
      std::fill(m.begin(), m.end(), 0);
    }
  }
}

inline void random_row(const NetSpec& spec, std::mt19937_64& rng, std::span<uint8_t> masks, std::span<int> actions) {
  const int cells = spec.cells();
  if (spec.head == Head::Uas) {
    auto src = random_mask(cells, rng, 0.4);
    std::copy(src.begin(), src.end(), masks.begin());
    actions[0] = random_valid(src, rng);
    random_unit(rng, masks.subspan(cells), actions.subspan(1));
    return;
  }
  std::bernoulli_distribution avail(0.5);
  for (int c = 0; c < cells; ++c) {
    auto row = masks.subspan(static_cast<size_t>(c) * kGridMaskWidth, kGridMaskWidth);
    auto act = actions.subspan(static_cast<size_t>(c) * kNumUnitComponents, kNumUnitComponents);
    std::fill(row.begin(), row.end(), 0);
    std::fill(act.begin(), act.end(), 0);
    if (c == 0 || avail(rng)) {
      row[0] = 1;
      random_unit(rng, row.subspan(1), act);
    }
  }
}

// Dense layer followed by ReLU, loss = sum(c * relu(x W + b)); checks dW,
// db and dx. Also checks the sparse first-layer kernel on binary inputs.
inline double fd_dense_instance(std::mt19937_64& rng) {
  for (;;) {
    const int batch = uniform_int(rng, 1, 4), in = uniform_int(rng, 1, 6), out = uniform_int(rng, 1, 6);
    auto x = normals(static_cast<size_t>(batch) * in, rng);
    auto W = normals(static_cast<size_t>(in) * out, rng);
    auto b = normals(out, rng);
    const auto c = normals(static_cast<size_t>(batch) * out, rng);
    std::vector<double> z(c.size()), a(c.size());
    auto loss = [&] {
      dense_forward(Exec::Serial, x.data(), batch, in, W.data(), b.data(), out, z.data());
      relu_forward(Exec::Serial, z.data(), static_cast<int>(z.size()), a.data());
      double s = 0;
      for (size_t i = 0; i < a.size(); ++i) s += c[i] * a[i];
      return s;
    };
    loss();
    bool near_kink = false;
    for (double v : z) near_kink |= std::abs(v) < 1e-2;
    if (near_kink) continue;
    std::vector<double> dz(z.size()), dW(W.size(), 0), db(b.size(), 0), dx(x.size());
    relu_backward(Exec::Serial, z.data(), c.data(), static_cast<int>(z.size()), dz.data());
    dense_backward_params(Exec::Serial, x.data(), dz.data(), batch, in, out, dW.data(), db.data());
    dense_backward_input(Exec::Serial, dz.data(), batch, out, W.data(), in, dx.data());
    double worst = std::max({fd_check(W, dW, loss), fd_check(b, db, loss), fd_check(x, dx, loss)});

    // Sparse binary input variant.
    std::bernoulli_distribution bit(0.5);
    std::vector<uint8_t> xb(static_cast<size_t>(batch) * in);
    for (auto& v : xb) v = bit(rng);
    SparseRows sx;
    sx.clear(in);
    for (int r = 0; r < batch; ++r) sx.add_row(std::span<const uint8_t>(xb).subspan(static_cast<size_t>(r) * in, in));
    auto sparse_loss = [&] {
      sparse_forward(Exec::Serial, sx, W.data(), b.data(), out, z.data());
      double s = 0;
      for (size_t i = 0; i < z.size(); ++i) s += c[i] * z[i];
      return s;
    };
    std::vector<double> sW(W.size(), 0), sb(b.size(), 0);
    sparse_backward_params(Exec::Serial, sx, c.data(), out, sW.data(), sb.data());
    worst = std::max({worst, fd_check(W, sW, sparse_loss), fd_check(b, sb, sparse_loss)});
    return worst;
  }
}

// Masked log-prob (canonical and naive) and entropy gradients.
inline double fd_categorical_instance(std::mt19937_64& rng) {
  const int n = uniform_int(rng, 2, 10);
  auto logits = normals(n, rng, 2.0);
  const auto mask = random_mask(n, rng);
  const int idx = random_valid(mask, rng);
  double worst = 0;
  for (auto variant : {MaskVariant::Canonical, MaskVariant::Naive}) {
    std::vector<double> g(n, 0);
    add_log_prob_grad<double>(logits, mask, idx, 1.0, variant, g);
    worst = std::max(worst, fd_check(logits, g, [&] { return masked_log_prob<double>(logits, mask, idx, variant); }));
  }
  std::vector<double> g(n, 0);
  add_entropy_grad<double>(logits, mask, 1.0, g);
  worst = std::max(worst, fd_check(logits, g, [&] { return masked_entropy<double>(logits, mask); }));
  return worst;
}

// Composite row log-prob and entropy gradients for both heads on a 2x2 map.
inline double fd_composite_instance(std::mt19937_64& rng, Head head) {
  const NetSpec spec{2, 2, head, 4, 4};
  auto logits = normals(spec.policy_size(), rng, 1.5);
  std::vector<uint8_t> masks(mask_size(spec));
  std::vector<int> actions(action_size(spec));
  random_row(spec, rng, masks, actions);
  const double lp_scale = normals(1, rng)[0], ent_scale = normals(1, rng)[0];
  std::vector<double> g(logits.size(), 0);
  add_row_grads<double>(spec, logits, masks, actions, lp_scale, ent_scale, MaskVariant::Canonical, g);
  return fd_check(logits, g, [&] {
    return lp_scale * row_log_prob<double>(spec, logits, masks, actions) +
           ent_scale * row_entropy<double>(spec, logits, masks);
  });
}

// Toy minibatch for a small double-precision network. Old log-probs and
// values are offset from the current ones so both clip branches occur.
struct PpoToy {
  PolicyValueNet<double> net;
  Minibatch mb;
  PpoConfig cfg;
};

inline PpoToy make_ppo_toy(std::mt19937_64& rng, Head head, int n, bool value_only) {
  const NetSpec spec{2, 2, head, 6, 5};
  PpoToy t{PolicyValueNet<double>(spec), {}, {}};
  t.net.params() = normals(t.net.params().size(), rng, 0.4);
  t.cfg.clip = 0.1;
  if (value_only) t.cfg.c2 = 0;
  Minibatch& mb = t.mb;
  mb.size = n;
  std::bernoulli_distribution bit(0.3);
  mb.obs.resize(static_cast<size_t>(n) * spec.input_size());
  for (auto& v : mb.obs) v = bit(rng);
  mb.masks.resize(static_cast<size_t>(n) * mask_size(spec));
  mb.actions.resize(static_cast<size_t>(n) * action_size(spec));
  for (int i = 0; i < n; ++i) {
    random_row(spec, rng, std::span<uint8_t>(mb.masks).subspan(static_cast<size_t>(i) * mask_size(spec), mask_size(spec)),
               std::span<int>(mb.actions).subspan(static_cast<size_t>(i) * action_size(spec), action_size(spec)));
  }
  PolicyValueNet<double>::Cache cache;
  t.net.forward(mb.obs, n, cache);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (int i = 0; i < n; ++i) {
    const double lp = row_log_prob<double>(
        spec, std::span<const double>(cache.logits).subspan(static_cast<size_t>(i) * spec.policy_size(), spec.policy_size()),
        std::span<const uint8_t>(mb.masks).subspan(static_cast<size_t>(i) * mask_size(spec), mask_size(spec)),
        std::span<const int>(mb.actions).subspan(static_cast<size_t>(i) * action_size(spec), action_size(spec)));
    mb.old_log_probs.push_back(lp + jitter(rng));
    mb.old_values.push_back(cache.value[i] + jitter(rng));
    mb.advantages.push_back(value_only ? 0.0 : normals(1, rng)[0]);
    mb.returns.push_back(normals(1, rng)[0]);
  }
  return t;
}

// True when any ReLU pre-activation or clip boundary is within reach of the
// finite-difference step.
inline bool ppo_toy_near_kink(const PpoToy& t) {
  PolicyValueNet<double>::Cache c;
  t.net.forward(t.mb.obs, t.mb.size, c);
  for (double v : c.z1) {
    if (std::abs(v) < 1e-2) return true;
  }
  for (double v : c.z2) {
    if (std::abs(v) < 1e-2) return true;
  }
  const NetSpec& spec = t.net.spec();
  for (int i = 0; i < t.mb.size; ++i) {
    const double lp = row_log_prob<double>(
        spec, std::span<const double>(c.logits).subspan(static_cast<size_t>(i) * spec.policy_size(), spec.policy_size()),
        std::span<const uint8_t>(t.mb.masks).subspan(static_cast<size_t>(i) * mask_size(spec), mask_size(spec)),
        std::span<const int>(t.mb.actions).subspan(static_cast<size_t>(i) * action_size(spec), action_size(spec)));
    const double r = std::exp(lp - t.mb.old_log_probs[i]);
    if (std::abs(r - (1 - t.cfg.clip)) < 1e-2 || std::abs(r - (1 + t.cfg.clip)) < 1e-2) return true;
    const double dv = c.value[i] - t.mb.old_values[i];
    if (std::abs(std::abs(dv) - t.cfg.clip) < 1e-2) return true;
  }
  return false;
}

// Full PPO loss (or value-clip loss alone) against finite differences over
// every network parameter.
inline double fd_ppo_instance(std::mt19937_64& rng, Head head, bool value_only, int n = 3) {
  for (;;) {
    PpoToy t = make_ppo_toy(rng, head, n, value_only);
    if (ppo_toy_near_kink(t)) continue;
    std::vector<double> grad(t.net.params().size(), 0);
    ppo_loss<double>(t.net, t.mb, t.cfg, grad);
    return fd_check(t.net.params(), grad, [&] { return ppo_loss<double>(t.net, t.mb, t.cfg, {}).loss; });
  }
}

// GAE by direct summation of discounted TD residuals.
inline std::vector<double> gae_direct(const std::vector<double>& r, const std::vector<double>& v,
                                      const std::vector<uint8_t>& d, double boot, double gamma, double lambda) {
  const size_t n = r.size();
  std::vector<double> adv(n, 0);
  auto value_after = [&](size_t k) { return k + 1 < n ? v[k + 1] : boot; };
  for (size_t t = 0; t < n; ++t) {
    double weight = 1;
    for (size_t k = t; k < n; ++k) {
      const double live = d[k] ? 0.0 : 1.0;
      adv[t] += weight * (r[k] + gamma * value_after(k) * live - v[k]);
      if (d[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

inline double gae_instance(std::mt19937_64& rng) {
  const int n = uniform_int(rng, 1, 16);
  const auto r = normals(n, rng), v = normals(n, rng);
  std::bernoulli_distribution done(0.2);
  std::vector<uint8_t> d(n);
  for (auto& x : d) x = done(rng);
  const double boot = normals(1, rng)[0];
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gamma = unit(rng), lambda = unit(rng);
  const auto g = gae(r, v, d, boot, gamma, lambda);
  const auto direct = gae_direct(r, v, d, boot, gamma, lambda);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(g.advantages[i] - direct[i]));
    worst = std::max(worst, std::abs(g.returns[i] - (direct[i] + v[i])));
  }
  return worst;
}

}  // namespace rts::test
