#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rts/types.hpp"

namespace rts {

// Maximum attack range window: offsets (dx, dy) in [-3, 3]^2, row-major.
constexpr int kAttackWindow = 7;
constexpr int kAttackHalf = kAttackWindow / 2;
constexpr int kAttackCells = kAttackWindow * kAttackWindow;
constexpr int kAttackCenter = kAttackHalf * kAttackWindow + kAttackHalf;

constexpr int attack_index(int dx, int dy) { return (dy + kAttackHalf) * kAttackWindow + (dx + kAttackHalf); }
constexpr int attack_dx(int index) { return index % kAttackWindow - kAttackHalf; }
constexpr int attack_dy(int index) { return index / kAttackWindow - kAttackHalf; }

// One command for one unit, the 8-component discrete vector. Only the
// parameter(s) selected by `type` are consumed by the engine.
struct UnitActionCommand {
  int source = 0;  // cell index x + y * w
  ActionType type = ActionType::Noop;
  int move_dir = 0;
  int harvest_dir = 0;
  int return_dir = 0;
  int produce_dir = 0;
  int produce_kind = 0;
  int attack_pos = 0;

  friend bool operator==(const UnitActionCommand&, const UnitActionCommand&) = default;
};

// Zeroes every parameter not consumed by the command's action type.
UnitActionCommand canonical(const UnitActionCommand& c);

inline UnitActionCommand noop_at(int cell) { return {.source = cell}; }
inline UnitActionCommand move_at(int cell, int dir) {
  return {.source = cell, .type = ActionType::Move, .move_dir = dir};
}
inline UnitActionCommand harvest_at(int cell, int dir) {
  return {.source = cell, .type = ActionType::Harvest, .harvest_dir = dir};
}
inline UnitActionCommand return_at(int cell, int dir) {
  return {.source = cell, .type = ActionType::Return, .return_dir = dir};
}
inline UnitActionCommand produce_at(int cell, int dir, UnitKind kind) {
  return {.source = cell, .type = ActionType::Produce, .produce_dir = dir,
          .produce_kind = static_cast<int>(kind)};
}
inline UnitActionCommand attack_at(int cell, int dx, int dy) {
  return {.source = cell, .type = ActionType::Attack, .attack_pos = attack_index(dx, dy)};
}

using PlayerAction = std::vector<UnitActionCommand>;

}  // namespace rts
