#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rts/engine.hpp"

namespace rts {

// Reward held in integer micro-units so that any regrouping of a sum
// (per unit, per tick, per episode) yields the identical value.
class Reward {
 public:
  static constexpr int64_t kScale = 1'000'000;

  constexpr Reward() = default;
  static Reward from_micros(int64_t m) {
    Reward r;
    r.micros_ = m;
    return r;
  }
  static Reward from_double(double v);

  int64_t micros() const { return micros_; }
  double value() const { return static_cast<double>(micros_) / kScale; }

  Reward& operator+=(Reward o) {
    micros_ += o.micros_;
    return *this;
  }
  friend Reward operator+(Reward a, Reward b) { return a += b; }
  friend Reward operator*(int64_t n, Reward r) { return from_micros(n * r.micros_); }
  friend bool operator==(Reward, Reward) = default;

 private:
  int64_t micros_ = 0;
};

struct RewardWeights {
  double win = 10.0;
  double draw = 0.0;
  double loss = -10.0;
  double harvest = 1.0;
  double return_resource = 0.0;
  double produce_worker = 1.0;
  double construct_building = 0.2;
  double valid_attack = 1.0;
  double produce_combat_unit = 4.0;

  Reward weight(EventKind kind) const;
};

// Shaped reward of `player`'s events.
Reward shape(std::span<const GameEvent> events, Player player, const RewardWeights& w);

// Per initiating unit; terminal events (unit_id -1) are reported under -1.
std::vector<std::pair<int, Reward>> shape_by_unit(std::span<const GameEvent> events, Player player,
                                                  const RewardWeights& w);

// +1 win, 0 draw, -1 loss.
int sparse_reward(Outcome outcome, Player player);

}  // namespace rts
