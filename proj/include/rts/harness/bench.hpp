#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rts/harness/config.hpp"
#include "rts/learn/network.hpp"
#include "rts/map.hpp"

namespace rts::harness {

struct Throughput {
  std::string name;
  double mean = 0;    // ticks per second
  double stddev = 0;  // across trials
  int trials = 0;
  double mean_units = 0;       // live non-resource units per tick
  double mean_decisions = 0;   // policy unit decisions per tick (pipelines only)
};

// Random-action engine stepping on one thread: both seats play the uniform
// random bot; finished games restart.
Throughput bench_engine(const MapSpec& map, int ticks, int trials, uint64_t seed);

// Env plus policy forward and sampling with a freshly initialised network.
Throughput bench_pipeline(learn::Head head, const MapSpec& map, const std::string& name, int ticks, int trials,
                          uint64_t seed);

// Map with `workers` workers per side packed around the bases.
MapSpec crowded_map(const MapSpec& base, int workers);

struct BenchReport {
  Throughput engine;
  std::vector<Throughput> pipelines;
};

BenchReport run_bench(const RunConfig& cfg);
std::string format_bench(const BenchReport& r);
void write_bench_csv(const std::string& path, const BenchReport& r, uint64_t seed);

}  // namespace rts::harness
