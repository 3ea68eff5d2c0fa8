#include "rts/observation.hpp"

#include <algorithm>
#include <cstring>

namespace rts {

UnitActionCommand Perspective::command(const UnitActionCommand& c) const {
  if (!flip_) return c;
  UnitActionCommand out = c;
  out.source = cell(c.source);
  out.move_dir = dir(c.move_dir);
  out.harvest_dir = dir(c.harvest_dir);
  out.return_dir = dir(c.return_dir);
  out.produce_dir = dir(c.produce_dir);
  out.attack_pos = attack(c.attack_pos);
  return out;
}

namespace {

int bucket(int v) { return std::clamp(v, 0, 4); }

int action_plane(const Unit& u) {
  if (!u.busy) return 0;
  switch (u.busy->command.type) {
    case ActionType::Noop: return 0;
    case ActionType::Move: return 1;
    case ActionType::Harvest: return 2;
    case ActionType::Return: return 3;
    case ActionType::Produce: return 4;
    case ActionType::Attack: return 5;
  }
  return 0;
}

}  // namespace

void encode_observation_into(const GameState& s, Player player, std::span<uint8_t> out) {
  const Perspective view(s.w, s.h, player);
  std::memset(out.data(), 0, out.size());
  for (int c = 0; c < s.cells(); ++c) {
    uint8_t* v = out.data() + static_cast<size_t>(c) * kNumPlanes;
    v[kHpPlanes] = 1;
    v[kResourcePlanes] = 1;
    v[kOwnerPlanes + 1] = 1;
    v[kTypePlanes] = 1;
    v[kActionPlanes] = 1;
  }
  for (const auto& u : s.units) {
    const int c = view.cell(s.cell_of(u.x, u.y));
    uint8_t* v = out.data() + static_cast<size_t>(c) * kNumPlanes;
    v[kHpPlanes] = 0;
    v[kHpPlanes + bucket(u.hp)] = 1;
    v[kResourcePlanes] = 0;
    v[kResourcePlanes + bucket(u.carried)] = 1;
    v[kOwnerPlanes + 1] = 0;
    if (u.owner == Player::None) {
      v[kOwnerPlanes + 1] = 1;
    } else {
      v[kOwnerPlanes + (u.owner == player ? 0 : 2)] = 1;
    }
    v[kTypePlanes] = 0;
    v[kTypePlanes + 1 + static_cast<int>(u.kind)] = 1;
    v[kActionPlanes] = 0;
    v[kActionPlanes + action_plane(u)] = 1;
  }
}

ObservationTensor encode_observation(const GameState& s, Player player) {
  ObservationTensor t{s.h, s.w, std::vector<uint8_t>(static_cast<size_t>(s.cells()) * kNumPlanes)};
  encode_observation_into(s, player, t.data);
  return t;
}

ObservationTensor flip_perspective(const ObservationTensor& t) {
  ObservationTensor out{t.h, t.w, std::vector<uint8_t>(t.data.size())};
  const int n = t.h * t.w;
  for (int c = 0; c < n; ++c) {
    const uint8_t* src = t.data.data() + static_cast<size_t>(c) * kNumPlanes;
    uint8_t* dst = out.data.data() + static_cast<size_t>(n - 1 - c) * kNumPlanes;
    std::memcpy(dst, src, kNumPlanes);
    std::swap(dst[kOwnerPlanes], dst[kOwnerPlanes + 2]);
  }
  return out;
}

}  // namespace rts
