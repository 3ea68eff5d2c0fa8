#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>

#include "rts/types.hpp"

namespace rts {

struct UnitTypeStats {
  UnitKind kind = UnitKind::Resource;
  int cost = 0;
  int max_hp = 1;
  int attack_damage = 0;
  int attack_range = 0;
  int move_time = 1;
  int attack_time = 1;
  int harvest_time = 1;
  int return_time = 1;
  // Ticks needed to produce a unit of this kind.
  int produce_time = 1;
  int harvest_amount = 0;
  bool can_move = false;
  bool can_attack = false;
  bool can_harvest = false;
  bool is_structure = false;
  // Bit k set when this kind can produce UnitKind(k).
  uint8_t produces = 0;

  bool can_produce(UnitKind k) const { return (produces >> static_cast<int>(k)) & 1u; }
};

class UnitTypeTable {
 public:
  UnitTypeTable() = default;
  explicit UnitTypeTable(std::array<UnitTypeStats, kNumUnitKinds> stats);

  const UnitTypeStats& operator[](UnitKind k) const { return stats_[static_cast<int>(k)]; }

  // Throws ConfigError when any per-type invariant is violated.
  void validate() const;

 private:
  std::array<UnitTypeStats, kNumUnitKinds> stats_{};
};

// Stat table mirroring the reference simulator's defaults.
const std::shared_ptr<const UnitTypeTable>& default_unit_types();

// INI-style file, one section per unit kind (see data/utt/default.ini).
std::shared_ptr<const UnitTypeTable> parse_unit_types(std::istream& in);
std::shared_ptr<const UnitTypeTable> load_unit_types(const std::filesystem::path& path);

}  // namespace rts
