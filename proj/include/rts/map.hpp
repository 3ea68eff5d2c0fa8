#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "rts/types.hpp"

namespace rts {

constexpr int kDefaultResourceStock = 25;
constexpr int kDefaultStockpile = 5;

struct MapSpec {
  struct Placement {
    UnitKind kind = UnitKind::Resource;
    Player owner = Player::None;
    int x = 0;
    int y = 0;
    int amount = kDefaultResourceStock;  // stock for resource nodes, ignored otherwise
  };

  int w = 0;
  int h = 0;
  std::vector<Placement> units;
  std::array<int, 2> stockpile{kDefaultStockpile, kDefaultStockpile};
};

// Text format:
//   rtsmap v1
//   <w> <h>
//   <h rows of w chars>   . r b/B w/W l/L h/H g/G  (lowercase = player 1)
//   resource <x> <y> <amount>    (optional, repeatable)
//   stockpile <1|2> <amount>     (optional)
MapSpec parse_map(std::istream& in);
MapSpec parse_map(std::string_view text);
MapSpec load_map(const std::filesystem::path& path);
std::string format_map(const MapSpec& map);

// The symmetric bases-and-workers layouts used for training and evaluation.
MapSpec bases_workers_16x16();
MapSpec bases_workers_8x8();

}  // namespace rts
