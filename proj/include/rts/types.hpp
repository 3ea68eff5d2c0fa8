#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rts {

enum class Player : uint8_t { P1 = 0, P2 = 1, None = 2 };

constexpr int index_of(Player p) { return static_cast<int>(p); }
constexpr Player opponent_of(Player p) {
  return p == Player::P1 ? Player::P2 : (p == Player::P2 ? Player::P1 : Player::None);
}

// Order matches the produce-type action component: resource, base, barracks,
// worker, light, heavy, ranged.
enum class UnitKind : uint8_t { Resource = 0, Base, Barracks, Worker, Light, Heavy, Ranged };
constexpr int kNumUnitKinds = 7;

constexpr std::array<std::string_view, kNumUnitKinds> kUnitKindNames = {
    "resource", "base", "barracks", "worker", "light", "heavy", "ranged"};

inline std::string_view name_of(UnitKind k) { return kUnitKindNames[static_cast<int>(k)]; }
UnitKind unit_kind_from_name(std::string_view name);

enum class ActionType : uint8_t { Noop = 0, Move, Harvest, Return, Produce, Attack };
constexpr int kNumActionTypes = 6;

// Directions are N, E, S, W; y grows southwards.
constexpr int kNumDirections = 4;
constexpr std::array<int, 4> kDirDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDirDy = {-1, 0, 1, 0};

enum class Outcome : uint8_t { P1Win, P2Win, Draw };

// +1 win, 0 draw, -1 loss from the point of view of `p`.
constexpr int outcome_sign(Outcome o, Player p) {
  if (o == Outcome::Draw) return 0;
  const bool p1_won = o == Outcome::P1Win;
  return (p == Player::P1) == p1_won ? 1 : -1;
}

// Derives an independent stream seed from a run seed (splitmix64 finaliser).
constexpr uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rts
