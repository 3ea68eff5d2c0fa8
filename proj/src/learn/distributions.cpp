#include "rts/learn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rts::learn {

namespace {

template <class R>
void check_shapes(std::span<const R> logits, std::span<const uint8_t> mask) {
  if (logits.size() != mask.size()) throw std::invalid_argument("masked categorical: logits/mask size mismatch");
  if (!any_valid(mask)) throw std::invalid_argument("masked categorical: mask has no valid entry");
}

// Softmax over the logits with masked entries replaced by kMaskedLogit.
template <class R>
std::vector<double> softmax(std::span<const R> logits, std::span<const uint8_t> mask, bool apply_mask) {
  const size_t n = logits.size();
  std::vector<double> p(n);
  double hi = -INFINITY;
  for (size_t i = 0; i < n; ++i) {
    p[i] = (!apply_mask || mask[i]) ? static_cast<double>(logits[i]) : kMaskedLogit;
    hi = std::max(hi, p[i]);
  }
  double sum = 0;
  for (auto& v : p) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

template <class R>
double log_softmax_at(std::span<const R> logits, std::span<const uint8_t> mask, int index, bool apply_mask) {
  double hi = -INFINITY;
  for (size_t i = 0; i < logits.size(); ++i) {
    hi = std::max(hi, (!apply_mask || mask[i]) ? static_cast<double>(logits[i]) : kMaskedLogit);
  }
  double sum = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double l = (!apply_mask || mask[i]) ? static_cast<double>(logits[i]) : kMaskedLogit;
    sum += std::exp(l - hi);
  }
  return static_cast<double>(logits[index]) - hi - std::log(sum);
}

template <class R>
void check_index(std::span<const R> logits, std::span<const uint8_t> mask, int index) {
  if (index < 0 || static_cast<size_t>(index) >= logits.size() || !mask[index]) {
    throw std::invalid_argument("masked categorical: selection is masked out");
  }
}

}  // namespace

template <class R>
std::vector<double> masked_probs(std::span<const R> logits, std::span<const uint8_t> mask) {
  check_shapes(logits, mask);
  return softmax(logits, mask, true);
}

template <class R>
double masked_log_prob(std::span<const R> logits, std::span<const uint8_t> mask, int index, MaskVariant variant) {
  check_shapes(logits, mask);
  check_index(logits, mask, index);
  return log_softmax_at(logits, mask, index, variant == MaskVariant::Canonical);
}

template <class R>
double masked_entropy(std::span<const R> logits, std::span<const uint8_t> mask) {
  check_shapes(logits, mask);
  const auto p = softmax(logits, mask, true);
  double h = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (mask[i] && p[i] > 0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

template <class R>
int masked_sample(std::span<const R> logits, std::span<const uint8_t> mask, std::mt19937_64& rng) {
  const auto p = masked_probs(logits, mask);
  const double u = uniform01(rng);
  double acc = 0;
  int last = -1;
  for (size_t i = 0; i < p.size(); ++i) {
    if (!mask[i]) continue;
    acc += p[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

template <class R>
int masked_argmax(std::span<const R> logits, std::span<const uint8_t> mask) {
  check_shapes(logits, mask);
  int best = -1;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] && (best < 0 || logits[i] > logits[best])) best = static_cast<int>(i);
  }
  return best;
}

template <class R>
void add_log_prob_grad(std::span<const R> logits, std::span<const uint8_t> mask, int index, double scale,
                       MaskVariant variant, std::span<R> grad) {
  check_shapes(logits, mask);
  check_index(logits, mask, index);
  const bool canonical = variant == MaskVariant::Canonical;
  const auto p = softmax(logits, mask, canonical);
  for (size_t i = 0; i < p.size(); ++i) {
    // Masked logits are replaced by a constant, so their gradient is exactly 0.
    if (canonical && !mask[i]) continue;
    const double d = (static_cast<int>(i) == index ? 1.0 : 0.0) - p[i];
    grad[i] += static_cast<R>(scale * d);
  }
}

template <class R>
void add_entropy_grad(std::span<const R> logits, std::span<const uint8_t> mask, double scale, std::span<R> grad) {
  check_shapes(logits, mask);
  const auto p = softmax(logits, mask, true);
  double h = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (mask[i] && p[i] > 0) h -= p[i] * std::log(p[i]);
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (!mask[i] || p[i] <= 0) continue;
    grad[i] += static_cast<R>(scale * (-p[i] * (std::log(p[i]) + h)));
  }
}

#define RTS_INSTANTIATE(R)                                                                                 \
  template std::vector<double> masked_probs<R>(std::span<const R>, std::span<const uint8_t>);             \
  template double masked_log_prob<R>(std::span<const R>, std::span<const uint8_t>, int, MaskVariant);     \
  template double masked_entropy<R>(std::span<const R>, std::span<const uint8_t>);                         \
  template int masked_sample<R>(std::span<const R>, std::span<const uint8_t>, std::mt19937_64&);          \
  template int masked_argmax<R>(std::span<const R>, std::span<const uint8_t>);                             \
  template void add_log_prob_grad<R>(std::span<const R>, std::span<const uint8_t>, int, double, MaskVariant, \
                                     std::span<R>);                                                        \
  template void add_entropy_grad<R>(std::span<const R>, std::span<const uint8_t>, double, std::span<R>);

RTS_INSTANTIATE(float)
RTS_INSTANTIATE(double)
#undef RTS_INSTANTIATE

}  // namespace rts::learn
