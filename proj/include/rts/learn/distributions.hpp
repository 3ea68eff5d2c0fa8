#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rts::learn {

// Logit that replaces masked-out entries.
inline constexpr double kMaskedLogit = -1e8;

// CANONICAL differentiates the masked softmax; NAIVE samples under the mask
// but scores and differentiates the unmasked softmax.
enum class MaskVariant { Canonical, Naive };

// Probabilities of the masked categorical. Throws std::invalid_argument when
// no entry is valid or the sizes differ.
template <class R>
std::vector<double> masked_probs(std::span<const R> logits, std::span<const uint8_t> mask);

// Log-probability of index under the variant's distribution. Throws when the
// index is masked out.
template <class R>
double masked_log_prob(std::span<const R> logits, std::span<const uint8_t> mask, int index,
                       MaskVariant variant = MaskVariant::Canonical);

// Entropy of the masked distribution; masked entries contribute 0.
template <class R>
double masked_entropy(std::span<const R> logits, std::span<const uint8_t> mask);

template <class R>
int masked_sample(std::span<const R> logits, std::span<const uint8_t> mask, std::mt19937_64& rng);

template <class R>
int masked_argmax(std::span<const R> logits, std::span<const uint8_t> mask);

// grad += scale * d log p(index) / d logits.
template <class R>
void add_log_prob_grad(std::span<const R> logits, std::span<const uint8_t> mask, int index, double scale,
                       MaskVariant variant, std::span<R> grad);

// grad += scale * d H / d logits for the masked distribution.
template <class R>
void add_entropy_grad(std::span<const R> logits, std::span<const uint8_t> mask, double scale, std::span<R> grad);

// Uniform double in [0, 1) from 53 random bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool any_valid(std::span<const uint8_t> mask) {
  for (uint8_t m : mask) {
    if (m) return true;
  }
  return false;
}

}  // namespace rts::learn
