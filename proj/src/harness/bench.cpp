#include "rts/harness/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "rts/bots.hpp"
#include "rts/env/env.hpp"
#include "rts/harness/agent.hpp"
#include "rts/harness/csv.hpp"
#include "rts/learn/policy.hpp"

namespace rts::harness {

namespace {

using Clock = std::chrono::steady_clock;

int live_units(const GameState& s) {
  int n = 0;
  for (const auto& u : s.units) n += u.owner != Player::None;
  return n;
}

void finish_stats(Throughput& t, const std::vector<double>& rates) {
  t.trials = static_cast<int>(rates.size());
  double m = 0;
  for (double r : rates) m += r;
  m /= rates.size();
  double v = 0;
  for (double r : rates) v += (r - m) * (r - m);
  t.mean = m;
  t.stddev = rates.size() > 1 ? std::sqrt(v / (rates.size() - 1)) : 0.0;
}

}  // namespace

Throughput bench_engine(const MapSpec& map, int ticks, int trials, uint64_t seed) {
  Throughput out{"engine"};
  std::vector<double> rates;
  double units = 0;
  for (int trial = 0; trial < trials; ++trial) {
    auto a = make_bot("Random", mix_seed(seed, 2 * trial));
    auto b = make_bot("Random", mix_seed(seed, 2 * trial + 1));
    GameState s = new_game(map, default_unit_types(), seed + trial, 4000);
    long long unit_ticks = 0;
    const auto t0 = Clock::now();
    for (int k = 0; k < ticks; ++k) {
      if (s.finished()) s = new_game(map, default_unit_types(), seed + trial, 4000);
      const PlayerAction pa = a->act(s, Player::P1);
      const PlayerAction pb = b->act(s, Player::P2);
      step(s, pa, pb);
      unit_ticks += live_units(s);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    rates.push_back(ticks / secs);
    units += static_cast<double>(unit_ticks) / ticks;
  }
  finish_stats(out, rates);
  out.mean_units = units / trials;
  return out;
}

Throughput bench_pipeline(learn::Head head, const MapSpec& map, const std::string& name, int ticks, int trials,
                          uint64_t seed) {
  Throughput out{name};
  const learn::NetSpec spec{map.h, map.w, head};
  Net net(spec);
  net.init_orthogonal(mix_seed(seed, 7));
  EnvConfig cfg;
  cfg.map = map;
  cfg.max_ticks = 4000;
  std::vector<double> rates;
  double units = 0, decisions = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(mix_seed(seed, 100 + trial));
    Net::Cache cache;
    long long unit_ticks = 0, decided = 0;
    const int cells = spec.cells();
    const auto t0 = Clock::now();
    if (head == learn::Head::Uas) {
      UasEnv env(cfg, make_bot("Random", mix_seed(seed, 200 + trial)), seed + trial);
      auto source = [&](const ObservationTensor& obs, std::span<const uint8_t> mask) {
        net.forward(obs.data, 1, cache);
        return learn::masked_sample(std::span<const float>(cache.logits).first(cells), mask, rng);
      };
      auto action = [&](const ObservationTensor&, const UnitMask& um, int src) {
        const auto sel = learn::sample_unit(std::span<const float>(cache.logits).subspan(cells),
                                            std::span<const uint8_t>(um), rng, false);
        ++decided;
        return view_command(src, sel, cells);
      };
      for (int k = 0; k < ticks; ++k) {
        env.uas_episode_step(source, action);
        unit_ticks += live_units(env.state());
      }
    } else {
      GridnetEnv env(cfg, make_bot("Random", mix_seed(seed, 200 + trial)), seed + trial);
      std::vector<int> actions(static_cast<size_t>(cells) * kNumUnitComponents);
      for (int k = 0; k < ticks; ++k) {
        net.forward(env.observation(), 1, cache);
        const auto mask = env.grid_mask();
        std::fill(actions.begin(), actions.end(), 0);
        for (int c = 0; c < cells; ++c) {
          const auto row = mask.subspan(static_cast<size_t>(c) * kGridMaskWidth, kGridMaskWidth);
          if (!row[0]) continue;
          const auto sel = learn::sample_unit(
              std::span<const float>(cache.logits).subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth),
              row.subspan(1), rng, false);
          std::copy(sel.begin(), sel.end(), actions.begin() + static_cast<size_t>(c) * kNumUnitComponents);
          ++decided;
        }
        env.step(std::span<const int>(actions));
        unit_ticks += live_units(env.state());
      }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    rates.push_back(ticks / secs);
    units += static_cast<double>(unit_ticks) / ticks;
    decisions += static_cast<double>(decided) / ticks;
  }
  finish_stats(out, rates);
  out.mean_units = units / trials;
  out.mean_decisions = decisions / trials;
  return out;
}

MapSpec crowded_map(const MapSpec& base, int workers) {
  MapSpec m = base;
  std::set<std::pair<int, int>> used;
  for (const auto& p : m.units) used.insert({p.x, p.y});
  int placed = 0;
  for (int y = 0; y < m.h && placed < workers; ++y) {
    for (int x = 0; x < m.w && placed < workers; ++x) {
      const int mx = m.w - 1 - x, my = m.h - 1 - y;
      if (used.count({x, y}) || used.count({mx, my}) || (x == mx && y == my)) continue;
      if (y * m.w + x >= my * m.w + mx) continue;  // top half only; its mirror fills the bottom
      m.units.push_back({UnitKind::Worker, Player::P1, x, y});
      m.units.push_back({UnitKind::Worker, Player::P2, mx, my});
      used.insert({x, y});
      used.insert({mx, my});
      ++placed;
    }
  }
  return m;
}

BenchReport run_bench(const RunConfig& cfg) {
  const MapSpec map = resolve_map(cfg.bench.map, cfg.base_dir);
  const auto& b = cfg.bench;
  BenchReport r;
  r.engine = bench_engine(map, b.engine_ticks, b.trials, cfg.seed);
  const MapSpec crowd = crowded_map(map, map.w * map.h / 4);
  r.pipelines.push_back(bench_pipeline(learn::Head::Uas, map, "uas_few_units", b.pipeline_ticks, b.trials, cfg.seed));
  r.pipelines.push_back(
      bench_pipeline(learn::Head::Gridnet, map, "gridnet_few_units", b.pipeline_ticks, b.trials, cfg.seed));
  r.pipelines.push_back(
      bench_pipeline(learn::Head::Uas, crowd, "uas_many_units", b.pipeline_ticks, b.trials, cfg.seed));
  r.pipelines.push_back(
      bench_pipeline(learn::Head::Gridnet, crowd, "gridnet_many_units", b.pipeline_ticks, b.trials, cfg.seed));
  return r;
}

std::string format_bench(const BenchReport& r) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-20s %14s %12s %8s %10s\n", "benchmark", "ticks/s", "stddev", "units",
                "decisions");
  os << buf;
  auto line = [&](const Throughput& t) {
    std::snprintf(buf, sizeof buf, "%-20s %14.1f %12.1f %8.1f %10.2f\n", t.name.c_str(), t.mean, t.stddev,
                  t.mean_units, t.mean_decisions);
    os << buf;
  };
  line(r.engine);
  for (const auto& p : r.pipelines) line(p);
  return os.str();
}

void write_bench_csv(const std::string& path, const BenchReport& r, uint64_t seed) {
  CsvWriter w(path, seed, {"benchmark", "ticks_per_sec", "stddev", "trials", "mean_units", "mean_decisions"});
  auto row = [&](const Throughput& t) {
    w.row({t.name, format_real(t.mean), format_real(t.stddev), std::to_string(t.trials), format_real(t.mean_units),
           format_real(t.mean_decisions)});
  };
  row(r.engine);
  for (const auto& p : r.pipelines) row(p);
}

}  // namespace rts::harness
