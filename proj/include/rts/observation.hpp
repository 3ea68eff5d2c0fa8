#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rts/command.hpp"
#include "rts/game_state.hpp"

namespace rts {

// Plane layout of the 27 binary feature planes per cell.
constexpr int kNumPlanes = 27;
constexpr int kHpPlanes = 0;        // 0, 1, 2, 3, >=4
constexpr int kResourcePlanes = 5;  // 0, 1, 2, 3, >=4
constexpr int kOwnerPlanes = 10;    // self, none, opponent
constexpr int kTypePlanes = 13;     // none, resource, base, barracks, worker, light, heavy, ranged
constexpr int kActionPlanes = 21;   // none, move, harvest, return, produce, attack

// Maps between the real board and a player's view of it. Player 2 sees the
// board rotated by 180 degrees so both seats start top-left.
class Perspective {
 public:
  Perspective(int w, int h, Player viewer) : w_(w), h_(h), flip_(viewer == Player::P2) {}

  bool flipped() const { return flip_; }
  int w() const { return w_; }
  int h() const { return h_; }

  // The transform is an involution: to_view == to_real.
  int cell(int c) const { return flip_ ? w_ * h_ - 1 - c : c; }
  int dir(int d) const { return flip_ ? (d + 2) % kNumDirections : d; }
  int attack(int pos) const { return flip_ ? kAttackCells - 1 - pos : pos; }
  UnitActionCommand command(const UnitActionCommand& c) const;

 private:
  int w_;
  int h_;
  bool flip_;
};

// Binary tensor of shape (h, w, 27), row-major (y, x, plane).
struct ObservationTensor {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> data;

  uint8_t at(int y, int x, int plane) const { return data[(static_cast<size_t>(y) * w + x) * kNumPlanes + plane]; }
  std::span<const uint8_t> cell(int y, int x) const {
    return std::span<const uint8_t>(data).subspan((static_cast<size_t>(y) * w + x) * kNumPlanes, kNumPlanes);
  }
  friend bool operator==(const ObservationTensor&, const ObservationTensor&) = default;
};

ObservationTensor encode_observation(const GameState& s, Player player);
// Writes into a preallocated buffer of h * w * 27 bytes.
void encode_observation_into(const GameState& s, Player player, std::span<uint8_t> out);

// Rotates a tensor by 180 degrees and swaps the self/opponent owner planes.
ObservationTensor flip_perspective(const ObservationTensor& t);

}  // namespace rts
