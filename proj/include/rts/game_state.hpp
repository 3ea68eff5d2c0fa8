#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rts/command.hpp"
#include "rts/unit_types.hpp"

namespace rts {

struct InProgressAction {
  UnitActionCommand command;  // canonical form
  int ticks_remaining = 0;
  int target_cell = -1;  // move/harvest/return/produce/attack target; -1 for NOOP

  friend bool operator==(const InProgressAction&, const InProgressAction&) = default;
};

struct Unit {
  int id = 0;
  Player owner = Player::None;
  UnitKind kind = UnitKind::Resource;
  int x = 0;
  int y = 0;
  int hp = 1;
  // Carried resources for workers, remaining stock for resource nodes.
  int carried = 0;
  std::optional<InProgressAction> busy;

  friend bool operator==(const Unit&, const Unit&) = default;
};

// Full simulation state. Plain value type: copying yields an independent game
// (the unit type table is immutable and shared).
//
// Invariants maintained by the engine:
//  - `units` sorted by id; at most one unit per cell; `occupant` mirrors positions
//  - `reserved[c]` counts in-progress moves/produces targeting cell c
//  - stockpile >= 0; costs of units being produced are already deducted
struct GameState {
  int w = 0;
  int h = 0;
  int tick = 0;
  int max_ticks = 0;
  std::vector<Unit> units;
  std::array<int, 2> stockpile{};
  uint64_t rng_state = 0;
  int next_id = 0;
  std::optional<Outcome> outcome;

  std::vector<int> occupant;  // unit id per cell, -1 when empty
  std::vector<uint8_t> reserved;

  // Resource bookkeeping: cost of every unit produced so far, cost held by
  // in-progress production, and resources destroyed with their carrier.
  int64_t produced_cost = 0;
  int64_t in_production_cost = 0;
  int64_t lost_resources = 0;

  std::shared_ptr<const UnitTypeTable> utt;

  int cells() const { return w * h; }
  int cell_of(int x, int y) const { return x + y * w; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < w && y < h; }
  bool is_free(int x, int y) const {
    const int c = cell_of(x, y);
    return occupant[c] < 0 && reserved[c] == 0;
  }

  const UnitTypeStats& stats(const Unit& u) const { return (*utt)[u.kind]; }

  const Unit* find(int id) const;
  Unit* find(int id);
  const Unit* unit_at(int cell) const;
  Unit* unit_at(int cell);

  bool finished() const { return outcome.has_value(); }
};

// Sum of all resources in the system; constant over any trajectory.
int64_t total_resources(const GameState& s);

}  // namespace rts
