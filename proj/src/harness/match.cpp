#include "rts/harness/match.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rts/engine.hpp"
#include "rts/harness/csv.hpp"

namespace rts::harness {

std::string_view name_of(Winner w) {
  switch (w) {
    case Winner::A: return "A";
    case Winner::B: return "B";
    case Winner::Draw: return "Draw";
  }
  return "?";
}

namespace {

Winner winner_from_name(const std::string& s) {
  if (s == "A") return Winner::A;
  if (s == "B") return Winner::B;
  if (s == "Draw") return Winner::Draw;
  throw ConfigError("bad winner field: " + s);
}

}  // namespace

MatchResult play_match(Agent& a, Agent& b, const MapSpec& map, const std::string& map_name, int max_ticks,
                       uint64_t seed, Player seat_a, const RewardWeights& weights) {
  GameState s = new_game(map, default_unit_types(), seed, max_ticks);
  const Player seat_b = opponent_of(seat_a);
  Reward ra, rb;
  while (!s.finished()) {
    const PlayerAction pa = a.act(s, seat_a);
    const PlayerAction pb = b.act(s, seat_b);
    const StepResult r = seat_a == Player::P1 ? step(s, pa, pb) : step(s, pb, pa);
    ra += shape(r.events, seat_a, weights);
    rb += shape(r.events, seat_b, weights);
  }
  MatchResult m;
  m.bot_a = a.name();
  m.bot_b = b.name();
  m.map = map_name;
  m.seed = seed;
  m.seat_a = seat_a;
  const int sign = outcome_sign(*s.outcome, seat_a);
  m.winner = sign > 0 ? Winner::A : (sign < 0 ? Winner::B : Winner::Draw);
  m.ticks = s.tick;
  m.return_a = ra.value();
  m.return_b = rb.value();
  return m;
}

int LadderReport::games() const {
  int n = 0;
  for (const auto& r : rows) n += r.games();
  return n;
}

int LadderReport::wins() const {
  int n = 0;
  for (const auto& r : rows) n += r.wins;
  return n;
}

double LadderReport::cumulative_win_rate() const { return games() ? static_cast<double>(wins()) / games() : 0.0; }

std::vector<MatchResult> run_ladder(const PlayerFactory& player, const LadderOptions& opts) {
  if (opts.pool.empty()) throw ConfigError("evaluation pool is empty");
  if (opts.games <= 0) throw ConfigError("games per opponent must be positive");
  for (const auto& name : opts.pool) make_bot(name, 0);  // validates names up front
  const int total = static_cast<int>(opts.pool.size()) * opts.games;
  std::vector<MatchResult> out(total);
  std::vector<std::string> errors(total);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < total; ++k) {
    try {
      const uint64_t seed = opts.seed + static_cast<uint64_t>(k);
      auto a = player(mix_seed(seed, 0));
      auto b = make_bot(opts.pool[k / opts.games], mix_seed(seed, 1));
      const Player seat = k % 2 == 0 ? Player::P1 : Player::P2;
      out[k] = play_match(*a, *b, opts.map, opts.map_name, opts.max_ticks, seed, seat);
      out[k].bot_b = opts.pool[k / opts.games];
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return out;
}

LadderReport summarize(const std::vector<MatchResult>& matches, const std::vector<std::string>& pool) {
  LadderReport rep;
  for (const auto& name : pool) rep.rows.push_back({name});
  for (const auto& m : matches) {
    auto it = std::find_if(rep.rows.begin(), rep.rows.end(), [&](const auto& r) { return r.opponent == m.bot_b; });
    if (it == rep.rows.end()) {
      rep.rows.push_back({m.bot_b});
      it = rep.rows.end() - 1;
    }
    if (m.winner == Winner::A) ++it->wins;
    else if (m.winner == Winner::B) ++it->losses;
    else ++it->ties;
  }
  return rep;
}

void write_matches_csv(const std::filesystem::path& path, const std::vector<MatchResult>& matches, uint64_t seed) {
  CsvWriter w(path, seed, {"match", "bot_a", "bot_b", "map", "seed", "seat_a", "winner", "ticks", "return_a", "return_b"});
  for (size_t k = 0; k < matches.size(); ++k) {
    const auto& m = matches[k];
    w.row({std::to_string(k), m.bot_a, m.bot_b, m.map, std::to_string(m.seed),
           m.seat_a == Player::P1 ? "P1" : "P2", std::string(name_of(m.winner)), std::to_string(m.ticks),
           format_real(m.return_a), format_real(m.return_b)});
  }
}

void write_summary_csv(const std::filesystem::path& path, const LadderReport& report, uint64_t seed) {
  CsvWriter w(path, seed, {"opponent", "wins", "ties", "losses", "games", "win_rate"});
  for (const auto& r : report.rows) {
    w.row({r.opponent, std::to_string(r.wins), std::to_string(r.ties), std::to_string(r.losses),
           std::to_string(r.games()), format_real(r.games() ? double(r.wins) / r.games() : 0.0)});
  }
  w.row({"total", std::to_string(report.wins()), "", "", std::to_string(report.games()),
         format_real(report.cumulative_win_rate())});
}

std::vector<MatchResult> read_matches_csv(const std::filesystem::path& path) {
  std::vector<MatchResult> out;
  for (const auto& f : read_csv(path)) {
    if (f.size() != 10) throw ConfigError("malformed match row in " + path.string());
    MatchResult m;
    m.bot_a = f[1];
    m.bot_b = f[2];
    m.map = f[3];
    m.seed = std::stoull(f[4]);
    m.seat_a = f[5] == "P1" ? Player::P1 : Player::P2;
    m.winner = winner_from_name(f[6]);
    m.ticks = std::stoi(f[7]);
    m.return_a = std::stod(f[8]);
    m.return_b = std::stod(f[9]);
    out.push_back(m);
  }
  return out;
}

std::string format_report(const LadderReport& report) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %6s %6s %6s %8s\n", "opponent", "wins", "ties", "losses", "win%");
  os << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-16s %6d %6d %6d %7.1f%%\n", r.opponent.c_str(), r.wins, r.ties, r.losses,
                  r.games() ? 100.0 * r.wins / r.games() : 0.0);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "cumulative win rate %.4f over %d games\n", report.cumulative_win_rate(),
                report.games());
  os << buf;
  return os.str();
}

}  // namespace rts::harness
