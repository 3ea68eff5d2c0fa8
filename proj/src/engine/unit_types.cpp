#include "rts/unit_types.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

namespace rts {

UnitKind unit_kind_from_name(std::string_view name) {
  for (int k = 0; k < kNumUnitKinds; ++k) {
    if (kUnitKindNames[k] == name) return static_cast<UnitKind>(k);
  }
  throw ConfigError("unknown unit kind '" + std::string(name) + "'");
}

UnitTypeTable::UnitTypeTable(std::array<UnitTypeStats, kNumUnitKinds> stats) : stats_(stats) {
  for (int k = 0; k < kNumUnitKinds; ++k) stats_[k].kind = static_cast<UnitKind>(k);
  validate();
}

void UnitTypeTable::validate() const {
  for (const auto& s : stats_) {
    const std::string who(name_of(s.kind));
    if (s.move_time < 1 || s.attack_time < 1 || s.harvest_time < 1 || s.return_time < 1 ||
        s.produce_time < 1) {
      throw ConfigError(who + ": all action times must be >= 1");
    }
    if (s.cost < 0) throw ConfigError(who + ": cost must be >= 0");
    if (s.max_hp < 1) throw ConfigError(who + ": hp must be >= 1");
    if (s.attack_range < 0 || s.attack_range > 3) {
      throw ConfigError(who + ": attack range must lie in [0, 3] (7x7 attack window)");
    }
    if (s.can_harvest != (s.kind == UnitKind::Worker)) {
      throw ConfigError(who + ": only workers may harvest");
    }
    if (s.kind == UnitKind::Resource && (s.produces != 0 || s.can_move || s.can_attack)) {
      throw ConfigError("resource: must be inert");
    }
    if (s.can_produce(UnitKind::Resource)) {
      throw ConfigError(who + ": resource nodes cannot be produced");
    }
  }
}

namespace {

UnitTypeStats make(UnitKind kind, int cost, int hp, int produce_time) {
  UnitTypeStats s;
  s.kind = kind;
  s.cost = cost;
  s.max_hp = hp;
  s.produce_time = produce_time;
  s.attack_time = 5;
  return s;
}

uint8_t bit(UnitKind k) { return static_cast<uint8_t>(1u << static_cast<int>(k)); }

std::array<UnitTypeStats, kNumUnitKinds> default_stats() {
  std::array<UnitTypeStats, kNumUnitKinds> t;
  t[0] = make(UnitKind::Resource, 1, 1, 10);

  t[1] = make(UnitKind::Base, 10, 10, 250);
  t[1].is_structure = true;
  t[1].produces = bit(UnitKind::Worker);

  t[2] = make(UnitKind::Barracks, 5, 4, 200);
  t[2].is_structure = true;
  t[2].produces = bit(UnitKind::Light) | bit(UnitKind::Heavy) | bit(UnitKind::Ranged);

  auto mobile = [](UnitTypeStats s, int dmg, int range, int move_time) {
    s.attack_damage = dmg;
    s.attack_range = range;
    s.move_time = move_time;
    s.can_move = true;
    s.can_attack = true;
    return s;
  };
  t[3] = mobile(make(UnitKind::Worker, 1, 1, 50), 1, 1, 10);
  t[3].harvest_time = 20;
  t[3].return_time = 10;
  t[3].harvest_amount = 1;
  t[3].can_harvest = true;
  t[3].produces = bit(UnitKind::Base) | bit(UnitKind::Barracks);

  t[4] = mobile(make(UnitKind::Light, 2, 4, 80), 2, 1, 8);
  t[5] = mobile(make(UnitKind::Heavy, 2, 4, 120), 4, 1, 12);
  t[6] = mobile(make(UnitKind::Ranged, 2, 1, 100), 1, 3, 12);
  return t;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

const std::shared_ptr<const UnitTypeTable>& default_unit_types() {
  static const auto table = std::make_shared<const UnitTypeTable>(default_stats());
  return table;
}

std::shared_ptr<const UnitTypeTable> parse_unit_types(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("unit type table: ") + e.what());
  }
  std::array<UnitTypeStats, kNumUnitKinds> stats;
  for (int k = 0; k < kNumUnitKinds; ++k) {
    const std::string section(kUnitKindNames[k]);
    auto node = tree.get_child_optional(section);
    if (!node) throw ConfigError("unit type table: missing section [" + section + "]");
    UnitTypeStats& s = stats[k];
    s.kind = static_cast<UnitKind>(k);
    auto geti = [&](const char* key, int fallback) {
      if (!node->get_child_optional(key)) return fallback;
      try {
        return node->get<int>(key);
      } catch (const pt::ptree_bad_data&) {
        throw ConfigError("unit type table: bad integer " + section + "." + key);
      }
    };
    auto getb = [&](const char* key) {
      return parse_bool(node->get<std::string>(key, "false"), section + "." + key);
    };
    s.cost = geti("cost", 0);
    s.max_hp = geti("hp", 1);
    s.attack_damage = geti("damage", 0);
    s.attack_range = geti("range", 0);
    s.move_time = geti("move_time", 1);
    s.attack_time = geti("attack_time", 1);
    s.harvest_time = geti("harvest_time", 1);
    s.return_time = geti("return_time", 1);
    s.produce_time = geti("produce_time", 1);
    s.harvest_amount = geti("harvest_amount", 0);
    s.can_move = getb("can_move");
    s.can_attack = getb("can_attack");
    s.can_harvest = getb("can_harvest");
    s.is_structure = getb("is_structure");
    std::stringstream produces(node->get<std::string>("produces", ""));
    for (std::string item; std::getline(produces, item, ',');) {
      const auto first = item.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      const auto last = item.find_last_not_of(" \t");
      s.produces |= bit(unit_kind_from_name(item.substr(first, last - first + 1)));
    }
  }
  return std::make_shared<const UnitTypeTable>(stats);
}

std::shared_ptr<const UnitTypeTable> load_unit_types(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open unit type table " + path.string());
  return parse_unit_types(in);
}

}  // namespace rts
