#include "rts/learn/policy.hpp"

#include <stdexcept>

namespace rts::learn {

int mask_size(const NetSpec& spec) {
  return spec.head == Head::Uas ? spec.cells() + kUnitMaskWidth : spec.cells() * kGridMaskWidth;
}

int action_size(const NetSpec& spec) {
  return spec.head == Head::Uas ? 1 + kNumUnitComponents : spec.cells() * kNumUnitComponents;
}

namespace {

template <class T>
std::span<T> comp(std::span<T> row, int c) {
  return row.subspan(kComponentOffsets[c], kComponentWidths[c]);
}

void check_type(int type) {
  if (type < 0 || type >= kComponentWidths[kTypeComponent]) throw std::invalid_argument("unit action: bad type");
}

}  // namespace

template <class R>
double unit_log_prob(std::span<const R> logits, std::span<const uint8_t> mask, std::span<const int> sel,
                     MaskVariant variant) {
  const int type = sel[kTypeComponent];
  check_type(type);
  double lp = masked_log_prob(comp(logits, kTypeComponent), comp(mask, kTypeComponent), type, variant);
  for (int c : consumed_components(static_cast<ActionType>(type))) {
    lp += masked_log_prob(comp(logits, c), comp(mask, c), sel[c], variant);
  }
  return lp;
}

template <class R>
double unit_entropy(std::span<const R> logits, std::span<const uint8_t> mask) {
  double h = 0;
  for (int c = 0; c < kNumUnitComponents; ++c) {
    if (any_valid(comp(mask, c))) h += masked_entropy(comp(logits, c), comp(mask, c));
  }
  return h;
}

template <class R>
void add_unit_grads(std::span<const R> logits, std::span<const uint8_t> mask, std::span<const int> sel,
                    double lp_scale, double ent_scale, MaskVariant variant, std::span<R> grad) {
  const int type = sel[kTypeComponent];
  check_type(type);
  if (lp_scale != 0) {
    add_log_prob_grad(comp(logits, kTypeComponent), comp(mask, kTypeComponent), type, lp_scale, variant,
                      comp(grad, kTypeComponent));
    for (int c : consumed_components(static_cast<ActionType>(type))) {
      add_log_prob_grad(comp(logits, c), comp(mask, c), sel[c], lp_scale, variant, comp(grad, c));
    }
  }
  if (ent_scale != 0) {
    for (int c = 0; c < kNumUnitComponents; ++c) {
      if (any_valid(comp(mask, c))) add_entropy_grad(comp(logits, c), comp(mask, c), ent_scale, comp(grad, c));
    }
  }
}

template <class R>
UnitSelection sample_unit(std::span<const R> logits, std::span<const uint8_t> mask, std::mt19937_64& rng,
                          bool greedy) {
  auto pick = [&](int c) {
    return greedy ? masked_argmax(comp(logits, c), comp(mask, c)) : masked_sample(comp(logits, c), comp(mask, c), rng);
  };
  UnitSelection sel{};
  sel[kTypeComponent] = pick(kTypeComponent);
  for (int c : consumed_components(static_cast<ActionType>(sel[kTypeComponent]))) sel[c] = pick(c);
  return sel;
}

template <class R>
double row_log_prob(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks,
                    std::span<const int> actions, MaskVariant variant) {
  const int cells = spec.cells();
  if (spec.head == Head::Uas) {
    double lp = masked_log_prob(logits.first(cells), masks.first(cells), actions[0], variant);
    return lp + unit_log_prob(logits.subspan(cells), masks.subspan(cells), actions.subspan(1), variant);
  }
  double lp = 0;
  for (int c = 0; c < cells; ++c) {
    if (!masks[static_cast<size_t>(c) * kGridMaskWidth]) continue;
    lp += unit_log_prob(logits.subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth),
                        masks.subspan(static_cast<size_t>(c) * kGridMaskWidth + 1, kUnitMaskWidth),
                        actions.subspan(static_cast<size_t>(c) * kNumUnitComponents, kNumUnitComponents), variant);
  }
  return lp;
}

template <class R>
double row_entropy(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks) {
  const int cells = spec.cells();
  if (spec.head == Head::Uas) {
    return masked_entropy(logits.first(cells), masks.first(cells)) +
           unit_entropy(logits.subspan(cells), masks.subspan(cells));
  }
  double h = 0;
  for (int c = 0; c < cells; ++c) {
    if (!masks[static_cast<size_t>(c) * kGridMaskWidth]) continue;
    h += unit_entropy(logits.subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth),
                      masks.subspan(static_cast<size_t>(c) * kGridMaskWidth + 1, kUnitMaskWidth));
  }
  return h;
}

template <class R>
void add_row_grads(const NetSpec& spec, std::span<const R> logits, std::span<const uint8_t> masks,
                   std::span<const int> actions, double lp_scale, double ent_scale, MaskVariant variant,
                   std::span<R> grad) {
  const int cells = spec.cells();
  if (spec.head == Head::Uas) {
    if (lp_scale != 0) add_log_prob_grad(logits.first(cells), masks.first(cells), actions[0], lp_scale, variant, grad.first(cells));
    if (ent_scale != 0) add_entropy_grad(logits.first(cells), masks.first(cells), ent_scale, grad.first(cells));
    add_unit_grads(logits.subspan(cells), masks.subspan(cells), actions.subspan(1), lp_scale, ent_scale, variant,
                   grad.subspan(cells));
    return;
  }
  for (int c = 0; c < cells; ++c) {
    if (!masks[static_cast<size_t>(c) * kGridMaskWidth]) continue;
    add_unit_grads(logits.subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth),
                   masks.subspan(static_cast<size_t>(c) * kGridMaskWidth + 1, kUnitMaskWidth),
                   actions.subspan(static_cast<size_t>(c) * kNumUnitComponents, kNumUnitComponents), lp_scale,
                   ent_scale, variant, grad.subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth));
  }
}

#define RTS_INSTANTIATE(R)                                                                                      \
  template double unit_log_prob<R>(std::span<const R>, std::span<const uint8_t>, std::span<const int>,         \
                                   MaskVariant);                                                                 \
  template double unit_entropy<R>(std::span<const R>, std::span<const uint8_t>);                                \
  template void add_unit_grads<R>(std::span<const R>, std::span<const uint8_t>, std::span<const int>, double,  \
                                  double, MaskVariant, std::span<R>);                                           \
  template UnitSelection sample_unit<R>(std::span<const R>, std::span<const uint8_t>, std::mt19937_64&, bool); \
  template double row_log_prob<R>(const NetSpec&, std::span<const R>, std::span<const uint8_t>,                 \
                                  std::span<const int>, MaskVariant);                                            \
  template double row_entropy<R>(const NetSpec&, std::span<const R>, std::span<const uint8_t>);                 \
  template void add_row_grads<R>(const NetSpec&, std::span<const R>, std::span<const uint8_t>,                  \
                                 std::span<const int>, double, double, MaskVariant, std::span<R>);

RTS_INSTANTIATE(float)
RTS_INSTANTIATE(double)
#undef RTS_INSTANTIATE

}  // namespace rts::learn
