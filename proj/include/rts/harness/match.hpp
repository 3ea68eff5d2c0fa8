#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rts/bots.hpp"
#include "rts/map.hpp"
#include "rts/rewards.hpp"

namespace rts::harness {

enum class Winner { A, B, Draw };
std::string_view name_of(Winner w);

struct MatchResult {
  std::string bot_a;
  std::string bot_b;
  std::string map;
  uint64_t seed = 0;
  Player seat_a = Player::P1;
  Winner winner = Winner::Draw;
  int ticks = 0;
  double return_a = 0;  // shaped return, terminal reward included
  double return_b = 0;
};

// Plays one game to completion; `a` takes seat_a.
MatchResult play_match(Agent& a, Agent& b, const MapSpec& map, const std::string& map_name, int max_ticks,
                       uint64_t seed, Player seat_a = Player::P1, const RewardWeights& weights = {});

struct OpponentRecord {
  std::string opponent;
  int wins = 0;
  int ties = 0;
  int losses = 0;
  int games() const { return wins + ties + losses; }
};

struct LadderReport {
  std::vector<OpponentRecord> rows;
  int games() const;
  int wins() const;
  double cumulative_win_rate() const;
};

// Factory for the evaluated player; called once per match with that match's seed.
using PlayerFactory = std::function<std::unique_ptr<Agent>(uint64_t seed)>;

struct LadderOptions {
  std::vector<std::string> pool;
  int games = 100;
  int max_ticks = 4000;
  uint64_t seed = 1;
  std::string map_name = "basesWorkers16x16";
  MapSpec map;
};

// Match k (opponent-major) uses seed base + k; the evaluated player takes P1
// on even k and P2 on odd k, always seeing itself top-left. Matches run in
// parallel; results come back in match order.
std::vector<MatchResult> run_ladder(const PlayerFactory& player, const LadderOptions& opts);
LadderReport summarize(const std::vector<MatchResult>& matches, const std::vector<std::string>& pool);

// Match CSV with a "# seed=N" header line; the summary CSV has one row per
// opponent plus a total row.
void write_matches_csv(const std::filesystem::path& path, const std::vector<MatchResult>& matches, uint64_t seed);
void write_summary_csv(const std::filesystem::path& path, const LadderReport& report, uint64_t seed);
std::vector<MatchResult> read_matches_csv(const std::filesystem::path& path);
std::string format_report(const LadderReport& report);

}  // namespace rts::harness
