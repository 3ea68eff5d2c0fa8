#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rts/action_space.hpp"
#include "rts/env/env.hpp"
#include "rts/learn/network.hpp"
#include "rts/learn/ppo.hpp"
#include "rts/rewards.hpp"

namespace rts::harness {

struct BenchConfig {
  int trials = 5;
  int engine_ticks = 20000;
  int pipeline_ticks = 1000;
  std::string map = "basesWorkers16x16";
};

struct RunConfig {
  // [run]
  uint64_t seed = 1;
  std::string out_dir = "runs/default";
  learn::Head protocol = learn::Head::Uas;
  int checkpoint_every = 50;  // updates; the final checkpoint is always written
  int max_updates = 0;        // stop after this many updates; 0 runs the full budget
  learn::Exec kernels = learn::Exec::Serial;
  // [env]
  std::string map = "basesWorkers8x8";
  std::string utt;  // empty: built-in table
  int max_ticks = 2000;
  MaskLevel mask = MaskLevel::Full;
  std::string opponents = "Random:1.0";
  // [ppo]
  learn::PpoConfig ppo;
  // [network]
  int hidden1 = 128;
  int hidden2 = 128;
  // [rewards]
  RewardWeights rewards;
  // [bench]
  BenchConfig bench;

  std::filesystem::path base_dir;  // directory of the config file, for relative paths

  EnvConfig env_config() const;
  learn::NetSpec net_spec() const;
  OpponentSlotPlan slot_plan() const;
};

// Sectioned key = value text; see README for the grammar. Unknown sections or
// keys and malformed values raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& c);

// A built-in map name (basesWorkers8x8, basesWorkers16x16) or a map file path,
// tried as given and then relative to base_dir.
MapSpec resolve_map(const std::string& name_or_path, const std::filesystem::path& base_dir = {});

}  // namespace rts::harness
