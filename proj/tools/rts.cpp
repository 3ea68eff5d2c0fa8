#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "rts/harness/agent.hpp"
#include "rts/harness/bench.hpp"
#include "rts/harness/config.hpp"
#include "rts/harness/match.hpp"
#include "rts/harness/train.hpp"
#include "rts/learn/checkpoint.hpp"
#include "rts/learn/ppo.hpp"

using namespace rts;
using namespace rts::harness;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid RTS engine, masked PPO learner and evaluation harness"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a policy from a config file");
  train_cmd->add_option("--config", config_path, "Config file")->required();
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Override the run seed");
  train_cmd->add_flag("--quiet", quiet, "No progress output");

  std::string checkpoint, pool = "PassiveAI,Random,RandomBiasedAI,WorkerRush,LightRush", map_name, player, mask = "full";
  std::string out_dir;
  int games = 100, max_ticks = 4000;
  uint64_t eval_seed = 1;
  bool sample = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "Play a checkpoint (or a bot) against a pool of bots");
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate");
  eval_cmd->add_option("--player", player, "Evaluate a scripted bot instead of a checkpoint");
  eval_cmd->add_option("--pool", pool, "Comma-separated opponent names");
  eval_cmd->add_option("--games", games, "Games per opponent");
  eval_cmd->add_option("--max-ticks", max_ticks, "Tick limit per game");
  eval_cmd->add_option("--map", map_name, "Map name or file (default: the checkpoint's size, else basesWorkers16x16)");
  eval_cmd->add_option("--seed", eval_seed, "Base seed; match k uses seed + k");
  eval_cmd->add_option("--mask", mask, "Mask level used by the agent: full, partial, none");
  eval_cmd->add_flag("--sample", sample, "Sample actions instead of taking the argmax");
  eval_cmd->add_option("--out", out_dir, "Directory for matches.csv and summary.csv");

  std::string a_name, b_name, match_map = "basesWorkers16x16", match_ckpt;
  uint64_t match_seed = 1;
  int match_ticks = 4000;
  auto* match_cmd = app.add_subcommand("match", "Play one game between two players");
  match_cmd->add_option("--a", a_name, "Player A (bot name or 'agent')")->required();
  match_cmd->add_option("--b", b_name, "Player B (bot name or 'agent')")->required();
  match_cmd->add_option("--map", match_map, "Map name or file");
  match_cmd->add_option("--seed", match_seed, "Seed");
  match_cmd->add_option("--max-ticks", match_ticks, "Tick limit");
  match_cmd->add_option("--checkpoint", match_ckpt, "Checkpoint for an 'agent' player");

  std::string bench_config;
  auto* bench_cmd = app.add_subcommand("bench", "Measure engine and pipeline throughput");
  bench_cmd->add_option("--config", bench_config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) {
      RunConfig cfg = load_config(config_path);
      if (*seed_opt) cfg.seed = seed;
      const auto res = train(cfg, quiet ? nullptr : &std::cout);
      std::cout << "updates " << res.updates << " env_steps " << res.env_steps << " episodes " << res.episodes.size()
                << "\nwin rate (last 100 episodes) " << final_win_rate(res.episodes)
                << "\nsmoothed shaped return " << final_smoothed_return(res.episodes)
                << "\noutput " << res.out_dir.string() << '\n';
    } else if (*eval_cmd) {
      if (checkpoint.empty() == player.empty()) throw ConfigError("give exactly one of --checkpoint or --player");
      std::shared_ptr<const Net> net;
      if (!checkpoint.empty()) net = load_policy(checkpoint);
      LadderOptions opts;
      opts.pool = split_list(pool);
      opts.games = games;
      opts.max_ticks = max_ticks;
      opts.seed = eval_seed;
      if (map_name.empty()) {
        map_name = "basesWorkers16x16";
        if (net && net->spec().height == 8 && net->spec().width == 8) map_name = "basesWorkers8x8";
      }
      opts.map_name = map_name;
      opts.map = resolve_map(map_name);
      const MaskLevel level = mask_level_from_name(mask);
      PlayerFactory factory;
      if (net) {
        factory = [&](uint64_t s) { return std::make_unique<PolicyAgent>(net, !sample, s, level); };
      } else {
        factory = [&](uint64_t s) { return make_bot(player, s); };
      }
      const auto matches = run_ladder(factory, opts);
      const auto report = summarize(matches, opts.pool);
      std::cout << format_report(report);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_matches_csv(std::filesystem::path(out_dir) / "matches.csv", matches, eval_seed);
        write_summary_csv(std::filesystem::path(out_dir) / "summary.csv", report, eval_seed);
      }
    } else if (*match_cmd) {
      std::shared_ptr<const Net> net;
      if (!match_ckpt.empty()) net = load_policy(match_ckpt);
      auto a = make_player(a_name, mix_seed(match_seed, 0), net, true);
      auto b = make_player(b_name, mix_seed(match_seed, 1), net, true);
      const auto m = play_match(*a, *b, resolve_map(match_map), match_map, match_ticks, match_seed);
      std::cout << "winner " << name_of(m.winner) << " (" << (m.winner == Winner::A ? m.bot_a : m.winner == Winner::B ? m.bot_b : "none")
                << ") ticks " << m.ticks << " return_a " << m.return_a << " return_b " << m.return_b << '\n';
    } else if (*bench_cmd) {
      const RunConfig cfg = load_config(bench_config);
      const auto report = run_bench(cfg);
      std::cout << format_bench(report);
      std::filesystem::create_directories(cfg.out_dir);
      write_bench_csv((std::filesystem::path(cfg.out_dir) / "bench.csv").string(), report, cfg.seed);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const learn::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const learn::NonFiniteLoss& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
