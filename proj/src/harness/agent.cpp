#include "rts/harness/agent.hpp"

#include <algorithm>

#include "rts/learn/checkpoint.hpp"
#include "rts/observation.hpp"

namespace rts::harness {

UnitActionCommand view_command(int source, const learn::UnitSelection& sel, int cells) {
  ActionVector v{};
  v[0] = source;
  std::copy(sel.begin(), sel.end(), v.begin() + 1);
  return decode_action(v, cells);
}

PolicyAgent::PolicyAgent(std::shared_ptr<const Net> net, bool greedy, uint64_t seed, MaskLevel mask, std::string name)
    : net_(std::move(net)), greedy_(greedy), rng_(seed), mask_(mask), name_(std::move(name)) {}

PlayerAction PolicyAgent::act(const GameState& s, Player me) {
  const auto& spec = net_->spec();
  if (spec.height != s.h || spec.width != s.w) {
    throw ConfigError("policy expects a " + std::to_string(spec.height) + "x" + std::to_string(spec.width) +
                      " map, got " + std::to_string(s.h) + "x" + std::to_string(s.w));
  }
  return spec.head == learn::Head::Uas ? act_uas(s, me) : act_gridnet(s, me);
}

PlayerAction PolicyAgent::act_uas(const GameState& s, Player me) {
  const int cells = s.cells();
  const Perspective view(s.w, s.h, me);
  ActionBuilder builder(s);
  std::vector<uint8_t> obs(static_cast<size_t>(cells) * kNumPlanes);
  std::vector<uint8_t> source(cells);
  auto actionable = [&] {
    return std::any_of(builder.sim().units.begin(), builder.sim().units.end(),
                       [me](const Unit& u) { return u.owner == me && !u.busy; });
  };
  while (actionable()) {
    const GameState& sim = builder.sim();
    encode_observation_into(sim, me, obs);
    if (mask_ == MaskLevel::None) std::fill(source.begin(), source.end(), 1);
    else source_unit_mask_into(sim, me, source);
    net_->forward(obs, 1, cache_);
    const std::span<const float> logits(cache_.logits);
    const int src = greedy_ ? learn::masked_argmax(logits.first(cells), std::span<const uint8_t>(source))
                            : learn::masked_sample(logits.first(cells), std::span<const uint8_t>(source), rng_);
    const Unit* u = sim.unit_at(view.cell(src));
    if (!u || u->owner != me || u->busy) {
      ++invalid_;
      break;
    }
    UnitMask um;
    if (mask_ == MaskLevel::None) um.fill(1);
    else um = unit_action_mask(sim, u->id, mask_);
    const auto sel = learn::sample_unit(logits.subspan(cells), std::span<const uint8_t>(um), rng_, greedy_);
    const UnitActionCommand real = canonical(view.command(view_command(src, sel, cells)));
    if (!is_valid_command(sim, me, real)) {
      ++invalid_;
      break;
    }
    builder.add(real);
  }
  return builder.take();
}

PlayerAction PolicyAgent::act_gridnet(const GameState& s, Player me) {
  const int cells = s.cells();
  const Perspective view(s.w, s.h, me);
  const auto obs = encode_observation(s, me);
  const auto mask = gridnet_mask(s, me, mask_);
  net_->forward(obs.data, 1, cache_);
  PlayerAction out;
  for (int c = 0; c < cells; ++c) {
    const auto row = std::span<const uint8_t>(mask).subspan(static_cast<size_t>(c) * kGridMaskWidth, kGridMaskWidth);
    if (!row[0]) continue;
    const auto logits = std::span<const float>(cache_.logits).subspan(static_cast<size_t>(c) * kUnitMaskWidth,
                                                                      kUnitMaskWidth);
    const auto sel = learn::sample_unit(logits, row.subspan(1), rng_, greedy_);
    if (sel[kTypeComponent] == static_cast<int>(ActionType::Noop)) continue;
    out.push_back(canonical(view.command(view_command(c, sel, cells))));
  }
  return out;
}

std::shared_ptr<const Net> load_policy(const std::string& checkpoint_path) {
  const auto header = learn::read_checkpoint_header(checkpoint_path);
  auto net = std::make_shared<Net>(learn::spec_from_descriptor(header.descriptor));
  learn::load_checkpoint(checkpoint_path, *net);
  return net;
}

std::unique_ptr<Agent> make_player(const std::string& name, uint64_t seed, const std::shared_ptr<const Net>& policy,
                                   bool greedy, MaskLevel mask) {
  if (name == "agent") {
    if (!policy) throw ConfigError("player 'agent' needs a checkpoint");
    return std::make_unique<PolicyAgent>(policy, greedy, seed, mask);
  }
  return make_bot(name, seed);
}

}  // namespace rts::harness
