#include "rts/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace rts {

Reward Reward::from_double(double v) {
  if (!std::isfinite(v)) throw ConfigError("reward weight must be finite");
  return from_micros(std::llround(v * kScale));
}

Reward RewardWeights::weight(EventKind kind) const {
  switch (kind) {
    case EventKind::Harvest: return Reward::from_double(harvest);
    case EventKind::ReturnResource: return Reward::from_double(return_resource);
    case EventKind::ProduceWorker: return Reward::from_double(produce_worker);
    case EventKind::ConstructBuilding: return Reward::from_double(construct_building);
    case EventKind::ProduceCombatUnit: return Reward::from_double(produce_combat_unit);
    case EventKind::AttackIssued: return Reward::from_double(valid_attack);
    case EventKind::Win: return Reward::from_double(win);
    case EventKind::Draw: return Reward::from_double(draw);
    case EventKind::Loss: return Reward::from_double(loss);
  }
  return {};
}

Reward shape(std::span<const GameEvent> events, Player player, const RewardWeights& w) {
  Reward total;
  for (const auto& e : events) {
    if (e.player == player) total += w.weight(e.kind);
  }
  return total;
}

std::vector<std::pair<int, Reward>> shape_by_unit(std::span<const GameEvent> events, Player player,
                                                  const RewardWeights& w) {
  std::vector<std::pair<int, Reward>> out;
  for (const auto& e : events) {
    if (e.player != player) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == e.unit_id; });
    if (it == out.end()) {
      out.emplace_back(e.unit_id, w.weight(e.kind));
    } else {
      it->second += w.weight(e.kind);
    }
  }
  return out;
}

int sparse_reward(Outcome outcome, Player player) { return outcome_sign(outcome, player); }

}  // namespace rts
