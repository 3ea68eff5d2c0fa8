#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rts/command.hpp"
#include "rts/game_state.hpp"
#include "rts/observation.hpp"

namespace rts {

// Unit action components after the source: type, move, harvest, return,
// produce direction, produce type, relative attack position.
constexpr int kNumUnitComponents = 7;
constexpr std::array<int, kNumUnitComponents> kComponentWidths = {6, 4, 4, 4, 4, 7, kAttackCells};
constexpr std::array<int, kNumUnitComponents> kComponentOffsets = {0, 6, 10, 14, 18, 22, 29};
constexpr int kUnitMaskWidth = 78;
constexpr int kGridMaskWidth = 1 + kUnitMaskWidth;
static_assert(kComponentOffsets[6] + kComponentWidths[6] == kUnitMaskWidth);

enum ComponentIndex : int {
  kTypeComponent = 0,
  kMoveComponent,
  kHarvestComponent,
  kReturnComponent,
  kProduceDirComponent,
  kProduceKindComponent,
  kAttackComponent,
};

enum class MaskLevel : uint8_t { Full, Partial, None };
MaskLevel mask_level_from_name(std::string_view name);
std::string_view name_of(MaskLevel level);

using UnitMask = std::array<uint8_t, kUnitMaskWidth>;
using ActionVector = std::array<int, 8>;

// Flat 8-integer encoding [source, type, move, harvest, return, produce dir,
// produce type, attack position]. Throws std::out_of_range for any component
// outside its range.
ActionVector encode_action(const UnitActionCommand& c, int cells);
UnitActionCommand decode_action(std::span<const int> v, int cells);

// Value of component `comp` (ComponentIndex) of a command.
int component_value(const UnitActionCommand& c, int comp);
void set_component(UnitActionCommand& c, int comp, int value);

// Components consumed by the engine for the given action type, in order.
std::span<const int> consumed_components(ActionType type);

// All masks are expressed in the viewing player's frame (rotated for P2).
std::vector<uint8_t> source_unit_mask(const GameState& s, Player player);
void source_unit_mask_into(const GameState& s, Player player, std::span<uint8_t> out);

// Throws GameError for resource nodes or busy units.
UnitMask unit_action_mask(const GameState& s, int unit_id, MaskLevel level);

// (h*w) rows of 79 entries: source availability, then the unit mask. Rows
// without an available source expose only NOOP.
std::vector<uint8_t> gridnet_mask(const GameState& s, Player player, MaskLevel level);

inline std::span<const uint8_t> component_mask(std::span<const uint8_t> unit_mask, int comp) {
  return unit_mask.subspan(kComponentOffsets[comp], kComponentWidths[comp]);
}

// Mask of a unit that cannot act: NOOP only.
UnitMask noop_only_mask();

}  // namespace rts
