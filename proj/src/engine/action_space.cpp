#include "rts/action_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "rts/engine.hpp"

namespace rts {

MaskLevel mask_level_from_name(std::string_view name) {
  if (name == "full") return MaskLevel::Full;
  if (name == "partial") return MaskLevel::Partial;
  if (name == "none") return MaskLevel::None;
  throw ConfigError("unknown mask level '" + std::string(name) + "'");
}

std::string_view name_of(MaskLevel level) {
  switch (level) {
    case MaskLevel::Full: return "full";
    case MaskLevel::Partial: return "partial";
    case MaskLevel::None: return "none";
  }
  return "?";
}

int component_value(const UnitActionCommand& c, int comp) {
  switch (comp) {
    case kTypeComponent: return static_cast<int>(c.type);
    case kMoveComponent: return c.move_dir;
    case kHarvestComponent: return c.harvest_dir;
    case kReturnComponent: return c.return_dir;
    case kProduceDirComponent: return c.produce_dir;
    case kProduceKindComponent: return c.produce_kind;
    case kAttackComponent: return c.attack_pos;
  }
  throw std::out_of_range("component index");
}

void set_component(UnitActionCommand& c, int comp, int value) {
  switch (comp) {
    case kTypeComponent: c.type = static_cast<ActionType>(value); return;
    case kMoveComponent: c.move_dir = value; return;
    case kHarvestComponent: c.harvest_dir = value; return;
    case kReturnComponent: c.return_dir = value; return;
    case kProduceDirComponent: c.produce_dir = value; return;
    case kProduceKindComponent: c.produce_kind = value; return;
    case kAttackComponent: c.attack_pos = value; return;
  }
  throw std::out_of_range("component index");
}

std::span<const int> consumed_components(ActionType type) {
  static constexpr int kMove[] = {kMoveComponent};
  static constexpr int kHarvest[] = {kHarvestComponent};
  static constexpr int kReturn[] = {kReturnComponent};
  static constexpr int kProduce[] = {kProduceDirComponent, kProduceKindComponent};
  static constexpr int kAttack[] = {kAttackComponent};
  switch (type) {
    case ActionType::Noop: return {};
    case ActionType::Move: return kMove;
    case ActionType::Harvest: return kHarvest;
    case ActionType::Return: return kReturn;
    case ActionType::Produce: return kProduce;
    case ActionType::Attack: return kAttack;
  }
  return {};
}

ActionVector encode_action(const UnitActionCommand& c, int cells) {
  ActionVector v{c.source, static_cast<int>(c.type), c.move_dir, c.harvest_dir, c.return_dir,
                 c.produce_dir, c.produce_kind, c.attack_pos};
  if (v[0] < 0 || v[0] >= cells) throw std::out_of_range("source unit out of range");
  for (int comp = 0; comp < kNumUnitComponents; ++comp) {
    if (v[comp + 1] < 0 || v[comp + 1] >= kComponentWidths[comp]) {
      throw std::out_of_range("action component " + std::to_string(comp + 1) + " out of range");
    }
  }
  return v;
}

UnitActionCommand decode_action(std::span<const int> v, int cells) {
  if (v.size() != 8) throw std::out_of_range("action vector must have 8 components");
  if (v[0] < 0 || v[0] >= cells) throw std::out_of_range("source unit out of range");
  UnitActionCommand c{.source = v[0]};
  for (int comp = 0; comp < kNumUnitComponents; ++comp) {
    if (v[comp + 1] < 0 || v[comp + 1] >= kComponentWidths[comp]) {
      throw std::out_of_range("action component " + std::to_string(comp + 1) + " out of range");
    }
    set_component(c, comp, v[comp + 1]);
  }
  return c;
}

void source_unit_mask_into(const GameState& s, Player player, std::span<uint8_t> out) {
  const Perspective view(s.w, s.h, player);
  std::fill(out.begin(), out.end(), 0);
  for (const auto& u : s.units) {
    if (u.owner == player && !u.busy) out[view.cell(s.cell_of(u.x, u.y))] = 1;
  }
}

std::vector<uint8_t> source_unit_mask(const GameState& s, Player player) {
  std::vector<uint8_t> m(s.cells());
  source_unit_mask_into(s, player, m);
  return m;
}

UnitMask noop_only_mask() {
  UnitMask m{};
  m[kComponentOffsets[kTypeComponent] + static_cast<int>(ActionType::Noop)] = 1;
  return m;
}

UnitMask unit_action_mask(const GameState& s, int unit_id, MaskLevel level) {
  const Unit* u = s.find(unit_id);
  if (!u) throw GameError("unit_action_mask: unknown unit " + std::to_string(unit_id));
  if (!is_actionable(*u)) throw GameError("unit_action_mask: unit " + std::to_string(unit_id) + " cannot act");
  UnitMask m{};
  if (level == MaskLevel::None) {
    m.fill(1);
    return m;
  }
  const Perspective view(s.w, s.h, u->owner);
  const int cell = s.cell_of(u->x, u->y);
  auto set = [&](int comp, int value) { m[kComponentOffsets[comp] + value] = 1; };
  set(kTypeComponent, static_cast<int>(ActionType::Noop));
  for (int d = 0; d < kNumDirections; ++d) {
    if (is_valid_command(s, u->owner, move_at(cell, d))) {
      set(kTypeComponent, static_cast<int>(ActionType::Move));
      set(kMoveComponent, view.dir(d));
    }
    if (is_valid_command(s, u->owner, harvest_at(cell, d))) {
      set(kTypeComponent, static_cast<int>(ActionType::Harvest));
      set(kHarvestComponent, view.dir(d));
    }
    if (is_valid_command(s, u->owner, return_at(cell, d))) {
      set(kTypeComponent, static_cast<int>(ActionType::Return));
      set(kReturnComponent, view.dir(d));
    }
    for (int k = 0; k < kNumUnitKinds; ++k) {
      if (is_valid_command(s, u->owner, produce_at(cell, d, static_cast<UnitKind>(k)))) {
        set(kTypeComponent, static_cast<int>(ActionType::Produce));
        set(kProduceDirComponent, view.dir(d));
        set(kProduceKindComponent, k);
      }
    }
  }
  const int range = s.stats(*u).attack_range;
  if (s.stats(*u).can_attack) {
    for (int dy = -range; dy <= range; ++dy) {
      for (int dx = -range; dx <= range; ++dx) {
        const int pos = attack_index(dx, dy);
        if (is_valid_command(s, u->owner, {.source = cell, .type = ActionType::Attack, .attack_pos = pos})) {
          set(kTypeComponent, static_cast<int>(ActionType::Attack));
          set(kAttackComponent, view.attack(pos));
        }
      }
    }
  }
  if (level == MaskLevel::Partial) {
    std::fill(m.begin() + kComponentOffsets[kMoveComponent], m.end(), 1);
  }
  return m;
}

std::vector<uint8_t> gridnet_mask(const GameState& s, Player player, MaskLevel level) {
  const Perspective view(s.w, s.h, player);
  std::vector<uint8_t> m(static_cast<size_t>(s.cells()) * kGridMaskWidth, 0);
  const UnitMask idle = noop_only_mask();
  for (int c = 0; c < s.cells(); ++c) {
    std::copy(idle.begin(), idle.end(), m.begin() + static_cast<ptrdiff_t>(c) * kGridMaskWidth + 1);
  }
  for (const auto& u : s.units) {
    if (u.owner != player || u.busy) continue;
    const size_t row = static_cast<size_t>(view.cell(s.cell_of(u.x, u.y))) * kGridMaskWidth;
    m[row] = 1;
    const UnitMask um = unit_action_mask(s, u.id, level);
    std::copy(um.begin(), um.end(), m.begin() + static_cast<ptrdiff_t>(row) + 1);
  }
  return m;
}

}  // namespace rts
