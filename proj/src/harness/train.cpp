#include "rts/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "rts/harness/agent.hpp"
#include "rts/harness/csv.hpp"
#include "rts/learn/checkpoint.hpp"
#include "rts/learn/policy.hpp"
#include "rts/learn/ppo.hpp"

namespace rts::harness {

std::vector<double> ema(std::span<const double> xs, double weight) {
  std::vector<double> out;
  out.reserve(xs.size());
  double acc = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    acc = i == 0 ? xs[0] : weight * acc + (1 - weight) * xs[i];
    out.push_back(acc);
  }
  return out;
}

double final_win_rate(const std::vector<EpisodeRecord>& episodes, int n) {
  const size_t k = std::min(episodes.size(), static_cast<size_t>(n));
  if (k == 0) return 0.0;
  int wins = 0;
  for (size_t i = episodes.size() - k; i < episodes.size(); ++i) wins += episodes[i].sparse_outcome > 0;
  return static_cast<double>(wins) / k;
}

double final_smoothed_return(const std::vector<EpisodeRecord>& episodes, double weight) {
  std::vector<double> r;
  for (const auto& e : episodes) r.push_back(e.shaped_return);
  const auto s = ema(r, weight);
  return s.empty() ? 0.0 : s.back();
}

void write_return_svg(const std::filesystem::path& path, const std::vector<EpisodeRecord>& episodes,
                      const std::string& title, double weight) {
  std::vector<double> r;
  for (const auto& e : episodes) r.push_back(e.shaped_return);
  const auto s = ema(r, weight);
  const double W = 640, H = 360, pad = 48;
  double xmax = 1, ymin = 0, ymax = 1;
  for (size_t i = 0; i < s.size(); ++i) {
    xmax = std::max(xmax, static_cast<double>(episodes[i].env_steps));
    ymin = std::min(ymin, s[i]);
    ymax = std::max(ymax, s[i]);
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << title
      << " (EMA " << weight << ")</text>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W - pad << "\" y=\"" << H - pad + 16 << "\" font-size=\"11\" text-anchor=\"end\">"
      << static_cast<long long>(xmax) << " steps</text>\n";
  out << "<text x=\"4\" y=\"" << pad << "\" font-size=\"11\">" << ymax << "</text>\n";
  out << "<text x=\"4\" y=\"" << H - pad << "\" font-size=\"11\">" << ymin << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < s.size(); ++i) {
    const double x = pad + (W - 2 * pad) * episodes[i].env_steps / xmax;
    const double y = H - pad - (H - 2 * pad) * (s[i] - ymin) / (ymax - ymin);
    out << x << ',' << y << ' ';
  }
  out << "\"/>\n</svg>\n";
}

namespace {

using learn::Head;
using learn::RolloutBuffer;

struct Collector {
  const RunConfig& cfg;
  const learn::NetSpec spec;
  Net& net;
  std::vector<std::mt19937_64> rngs;
  std::unique_ptr<UasVecEnv> uas;
  std::unique_ptr<GridnetVecEnv> grid;
  Net::Cache cache;
  std::vector<uint8_t> obs_batch;
  long long dropped = 0;

  Collector(const RunConfig& c, Net& n)
      : cfg(c), spec(n.spec()), net(n) {
    const EnvConfig env = cfg.env_config();
    const OpponentSlotPlan plan = cfg.slot_plan();
    if (spec.head == Head::Uas) uas = std::make_unique<UasVecEnv>(env, plan, mix_seed(cfg.seed, 3));
    else grid = std::make_unique<GridnetVecEnv>(env, plan, mix_seed(cfg.seed, 3));
    for (int e = 0; e < cfg.ppo.envs; ++e) rngs.emplace_back(mix_seed(cfg.seed, 1000 + e));
  }

  int envs() const { return cfg.ppo.envs; }

  std::span<const uint8_t> observation(int e) const {
    return uas ? uas->slot(e).observation() : grid->observation(e);
  }

  void forward_current() {
    const size_t n = spec.input_size();
    obs_batch.resize(n * envs());
    for (int e = 0; e < envs(); ++e) std::ranges::copy(observation(e), obs_batch.begin() + n * e);
    net.forward(obs_batch, envs(), cache, cfg.kernels);
  }

  // Fills row t of the buffer and advances every slot by one transition.
  void step(RolloutBuffer& buf, int t, int update, long long env_steps, std::vector<EpisodeRecord>& episodes) {
    forward_current();
    const int np = spec.policy_size();
    const int cells = spec.cells();
    std::vector<UnitActionCommand> decisions(envs());
    for (int e = 0; e < envs(); ++e) {
      const int i = RolloutBuffer::index(t, e, envs());
      std::ranges::copy(observation(e), buf.obs_row(i).begin());
      const auto logits = std::span<const float>(cache.logits).subspan(static_cast<size_t>(e) * np, np);
      auto masks = buf.mask_row(i);
      auto acts = buf.action_row(i);
      if (uas) {
        UasEnv& env = uas->slot(e);
        std::ranges::copy(env.source_mask(), masks.begin());
        const int src = learn::masked_sample(logits.first(cells), std::span<const uint8_t>(masks.first(cells)), rngs[e]);
        const UnitMask um = env.unit_mask(src);
        std::ranges::copy(um, masks.begin() + cells);
        const auto sel = learn::sample_unit(logits.subspan(cells), std::span<const uint8_t>(um), rngs[e], false);
        acts[0] = src;
        std::ranges::copy(sel, acts.begin() + 1);
        decisions[e] = view_command(src, sel, cells);
      } else {
        std::ranges::copy(grid->grid_mask(e), masks.begin());
        for (int c = 0; c < cells; ++c) {
          auto row = std::span<const uint8_t>(masks).subspan(static_cast<size_t>(c) * kGridMaskWidth, kGridMaskWidth);
          auto a = acts.subspan(static_cast<size_t>(c) * kNumUnitComponents, kNumUnitComponents);
          if (!row[0]) {
            std::fill(a.begin(), a.end(), 0);
            continue;
          }
          const auto sel = learn::sample_unit(logits.subspan(static_cast<size_t>(c) * kUnitMaskWidth, kUnitMaskWidth),
                                              row.subspan(1), rngs[e], false);
          std::ranges::copy(sel, a.begin());
        }
      }
      buf.log_probs[i] = learn::row_log_prob(spec, logits, std::span<const uint8_t>(masks),
                                             std::span<const int>(acts), cfg.ppo.variant);
      buf.values[i] = cache.value[e];
    }

    auto record = [&](int e, const EpisodeSummary& s) {
      episodes.push_back({e, update, env_steps + static_cast<long long>(t + 1) * envs(), s.shaped_return.value(),
                          s.sparse_outcome, s.ticks});
    };
    if (uas) {
      const auto tr = uas->step(decisions);
      for (int e = 0; e < envs(); ++e) {
        const int i = RolloutBuffer::index(t, e, envs());
        buf.rewards[i] = tr[e].reward.value();
        buf.dones[i] = tr[e].done;
        dropped += tr[e].info.dropped;
        if (tr[e].episode) record(e, *tr[e].episode);
      }
    } else {
      std::vector<std::span<const int>> grids;
      for (int e = 0; e < envs(); ++e) grids.push_back(buf.action_row(RolloutBuffer::index(t, e, envs())));
      const auto st = grid->step(grids);
      for (int e = 0; e < envs(); ++e) {
        const int i = RolloutBuffer::index(t, e, envs());
        buf.rewards[i] = st[e].reward.value();
        buf.dones[i] = st[e].done;
        dropped += st[e].info.dropped;
        if (st[e].episode) record(e, *st[e].episode);
      }
    }
  }

  void bootstrap(RolloutBuffer& buf) {
    forward_current();
    for (int e = 0; e < envs(); ++e) buf.bootstrap[e] = cache.value[e];
  }
};

std::string mean_or_blank(const std::vector<double>& xs) {
  if (xs.empty()) return "";
  double s = 0;
  for (double x : xs) s += x;
  return format_real(s / xs.size());
}

}  // namespace

TrainResult train(const RunConfig& cfg, std::ostream* log) {
  cfg.ppo.validate();
  namespace fs = std::filesystem;
  const fs::path out = cfg.out_dir;
  fs::create_directories(out / "checkpoints");
  {
    std::ofstream c(out / "config.ini");
    c << "# seed=" << cfg.seed << '\n' << format_config(cfg);
  }

  const learn::NetSpec spec = cfg.net_spec();
  Net net(spec);
  net.init_orthogonal(mix_seed(cfg.seed, 1));
  learn::PpoLearner learner(net, cfg.ppo, mix_seed(cfg.seed, 2));
  Collector col(cfg, net);
  RolloutBuffer buf(spec, cfg.ppo.steps, cfg.ppo.envs);

  CsvWriter metrics(out / "metrics.csv", cfg.seed,
                    {"update", "env_steps", "episodes", "shaped_return", "sparse_return", "loss", "pg_loss",
                     "v_loss", "entropy", "approx_kl", "clip_frac", "lr", "grad_norm", "dropped"});
  CsvWriter episodes_csv(out / "episodes.csv", cfg.seed,
                         {"episode", "slot", "update", "env_steps", "shaped_return", "sparse_outcome", "ticks"});

  TrainResult res;
  res.out_dir = out;
  int updates = cfg.ppo.num_updates();
  if (cfg.max_updates > 0) updates = std::min(updates, cfg.max_updates);
  long long env_steps = 0;
  auto checkpoint = [&](int u) {
    const fs::path p = out / "checkpoints" / ("update_" + std::to_string(u) + ".ckpt");
    learn::save_checkpoint(p.string(), net, u, cfg.seed);
    return p;
  };

  for (int u = 0; u < updates; ++u) {
    const size_t first_episode = res.episodes.size();
    const long long dropped_before = col.dropped;
    for (int t = 0; t < cfg.ppo.steps; ++t) col.step(buf, t, u, env_steps, res.episodes);
    col.bootstrap(buf);
    env_steps += buf.size();

    learn::UpdateStats st;
    try {
      st = learner.update(buf, u);
    } catch (const learn::NonFiniteLoss& e) {
      if (log) *log << "update " << u << ": " << e.what() << "; last checkpoint kept\n";
      throw;
    }

    std::vector<double> shaped, sparse;
    for (size_t k = first_episode; k < res.episodes.size(); ++k) {
      const auto& ep = res.episodes[k];
      shaped.push_back(ep.shaped_return);
      sparse.push_back(ep.sparse_outcome);
      episodes_csv.row({std::to_string(k), std::to_string(ep.slot), std::to_string(ep.update),
                        std::to_string(ep.env_steps), format_real(ep.shaped_return),
                        std::to_string(ep.sparse_outcome), std::to_string(ep.ticks)});
    }
    metrics.row({std::to_string(u + 1), std::to_string(env_steps), std::to_string(shaped.size()),
                 mean_or_blank(shaped), mean_or_blank(sparse), format_real(st.loss.loss),
                 format_real(st.loss.pg_loss), format_real(st.loss.v_loss), format_real(st.loss.entropy),
                 format_real(st.loss.approx_kl), format_real(st.loss.clip_frac), format_real(st.lr),
                 format_real(st.grad_norm), std::to_string(col.dropped - dropped_before)});

    if (cfg.checkpoint_every > 0 && (u + 1) % cfg.checkpoint_every == 0) checkpoint(u + 1);
    if (log && ((u + 1) % 10 == 0 || u + 1 == updates)) {
      *log << "update " << u + 1 << "/" << updates << " steps " << env_steps << " episodes " << res.episodes.size()
           << " win100 " << final_win_rate(res.episodes) << " ema_return " << final_smoothed_return(res.episodes)
           << " entropy " << st.loss.entropy << '\n'
           << std::flush;
    }
  }
  res.updates = updates;
  res.env_steps = env_steps;
  res.final_checkpoint = out / "final.ckpt";
  learn::save_checkpoint(res.final_checkpoint.string(), net, updates, cfg.seed);
  write_return_svg(out / "returns.svg", res.episodes, "shaped return, mask " + std::string(name_of(cfg.mask)));
  return res;
}

}  // namespace rts::harness
