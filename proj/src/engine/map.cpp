#include "rts/map.hpp"

#include <fstream>
#include <sstream>

namespace rts {
namespace {

struct Glyph {
  char c;
  UnitKind kind;
  Player owner;
};

constexpr std::array<Glyph, 13> kGlyphs = {{
    {'r', UnitKind::Resource, Player::None},
    {'b', UnitKind::Base, Player::P1},     {'B', UnitKind::Base, Player::P2},
    {'k', UnitKind::Barracks, Player::P1}, {'K', UnitKind::Barracks, Player::P2},
    {'w', UnitKind::Worker, Player::P1},   {'W', UnitKind::Worker, Player::P2},
    {'l', UnitKind::Light, Player::P1},    {'L', UnitKind::Light, Player::P2},
    {'h', UnitKind::Heavy, Player::P1},    {'H', UnitKind::Heavy, Player::P2},
    {'g', UnitKind::Ranged, Player::P1},   {'G', UnitKind::Ranged, Player::P2},
}};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("map line " + std::to_string(line) + ": " + what);
}

constexpr std::string_view kMap16 =
    "rtsmap v1\n"
    "16 16\n"
    "r...............\n"
    "rw..............\n"
    "..b.............\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    "................\n"
    ".............B..\n"
    "..............Wr\n"
    "...............r\n";

constexpr std::string_view kMap8 =
    "rtsmap v1\n"
    "8 8\n"
    "r.......\n"
    "rw......\n"
    "..b.....\n"
    "........\n"
    "........\n"
    ".....B..\n"
    "......Wr\n"
    ".......r\n";

}  // namespace

MapSpec parse_map(std::istream& in) {
  MapSpec map;
  std::string line;
  int lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next() || line != "rtsmap v1") fail(lineno, "expected header 'rtsmap v1'");
  if (!next()) fail(lineno, "missing dimensions");
  {
    std::istringstream dims(line);
    if (!(dims >> map.w >> map.h) || map.w < 1 || map.h < 1) fail(lineno, "bad dimensions");
  }
  for (int y = 0; y < map.h; ++y) {
    if (!next()) fail(lineno, "missing grid row " + std::to_string(y));
    if (static_cast<int>(line.size()) != map.w) {
      fail(lineno, "row has " + std::to_string(line.size()) + " cells, expected " +
                       std::to_string(map.w));
    }
    for (int x = 0; x < map.w; ++x) {
      const char c = line[x];
      if (c == '.') continue;
      bool known = false;
      for (const auto& g : kGlyphs) {
        if (g.c != c) continue;
        map.units.push_back({g.kind, g.owner, x, y, kDefaultResourceStock});
        known = true;
      }
      if (!known) fail(lineno, std::string("unknown cell glyph '") + c + "'");
    }
  }
  while (next()) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "resource") {
      int x, y, amount;
      if (!(ss >> x >> y >> amount) || amount < 0) fail(lineno, "bad resource override");
      bool found = false;
      for (auto& u : map.units) {
        if (u.kind == UnitKind::Resource && u.x == x && u.y == y) {
          u.amount = amount;
          found = true;
        }
      }
      if (!found) fail(lineno, "no resource node at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    } else if (key == "stockpile") {
      int p, amount;
      if (!(ss >> p >> amount) || (p != 1 && p != 2) || amount < 0) fail(lineno, "bad stockpile line");
      map.stockpile[p - 1] = amount;
    } else {
      fail(lineno, "unexpected line '" + line + "'");
    }
  }
  return map;
}

MapSpec parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_map(in);
}

MapSpec load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map " + path.string());
  return parse_map(in);
}

std::string format_map(const MapSpec& map) {
  std::vector<std::string> rows(map.h, std::string(map.w, '.'));
  std::ostringstream extra;
  for (const auto& u : map.units) {
    for (const auto& g : kGlyphs) {
      if (g.kind == u.kind && g.owner == u.owner) rows.at(u.y).at(u.x) = g.c;
    }
    if (u.kind == UnitKind::Resource && u.amount != kDefaultResourceStock) {
      extra << "resource " << u.x << ' ' << u.y << ' ' << u.amount << '\n';
    }
  }
  std::ostringstream out;
  out << "rtsmap v1\n" << map.w << ' ' << map.h << '\n';
  for (const auto& r : rows) out << r << '\n';
  out << extra.str();
  for (int p = 0; p < 2; ++p) {
    if (map.stockpile[p] != kDefaultStockpile) out << "stockpile " << p + 1 << ' ' << map.stockpile[p] << '\n';
  }
  return out.str();
}

MapSpec bases_workers_16x16() { return parse_map(kMap16); }
MapSpec bases_workers_8x8() { return parse_map(kMap8); }

}  // namespace rts
