#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rts/harness/config.hpp"

namespace rts::harness {

struct EpisodeRecord {
  int slot = 0;
  int update = 0;
  long long env_steps = 0;
  double shaped_return = 0;
  int sparse_outcome = 0;
  int ticks = 0;
};

struct TrainResult {
  int updates = 0;
  long long env_steps = 0;
  std::vector<EpisodeRecord> episodes;
  std::filesystem::path out_dir;
  std::filesystem::path final_checkpoint;
};

// Exponential moving average with the given weight on the previous value,
// seeded with the first sample.
std::vector<double> ema(std::span<const double> xs, double weight = 0.99);

// Fraction of wins (sparse outcome +1) among the last n episodes.
double final_win_rate(const std::vector<EpisodeRecord>& episodes, int n = 100);
double final_smoothed_return(const std::vector<EpisodeRecord>& episodes, double weight = 0.99);

// Line chart of smoothed episode returns against env steps.
void write_return_svg(const std::filesystem::path& path, const std::vector<EpisodeRecord>& episodes,
                      const std::string& title, double weight = 0.99);

// Writes into cfg.out_dir: config.ini, metrics.csv, episodes.csv,
// checkpoints, returns.svg. Throws learn::NonFiniteLoss after logging when
// the loss diverges; checkpoints already written are left in place.
TrainResult train(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace rts::harness
