#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>

#include "rts/action_space.hpp"
#include "rts/learn/distributions.hpp"
#include "rts/learn/network.hpp"

namespace rts::learn {

// Composite distributions over one head row.
//
// UAS rows: logits [h*w source | 78 unit], masks [h*w source | 78 unit],
// actions [source, type, move, harvest, return, produce dir, produce type,
// attack].
// Gridnet rows: logits h*w x 78, masks h*w x 79 (availability then unit
// mask), actions h*w x 7. Cells without an available source are ignored.
//
// A unit action scores its type plus the components that type consumes;
// the others are left at 0. Entropy sums over every component with at least
// one valid entry.

using UnitSelection = std::array<int, kNumUnitComponents>;

int mask_size(const NetSpec& spec);
int action_size(const NetSpec& spec);

template <class R>
double unit_log_prob(std::span<const R> logits, std::span<const uint8_t> mask, std::span<const int> sel,
                     MaskVariant variant = MaskVariant::Canonical);
template <class R>
double unit_entropy(std::span<const R> logits, std::span<const uint8_t> mask);
template <class R>
void add_unit_grads(std::span<const R> logits, std::span<const uint8_t> mask, std::span<const int> sel,
                    double lp_scale, double ent_scale, MaskVariant variant, std::span<R> grad);
template <class R>
UnitSelection sample_unit(std::span<const R> logits, std::span<const uint8_t> mask, std::mt19937_64& rng,
                          bool greedy);

template <class R>
double row_log_prob(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks,
                    std::span<const int> actions, MaskVariant variant = MaskVariant::Canonical);
template <class R>
double row_entropy(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks);
template <class R>
void add_row_grads(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks,
                   std::span<const int> actions, double lp_scale, double ent_scale, MaskVariant variant,
                   std::span<R> grad);

}  // namespace rts::learn
