#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "rts/bots.hpp"
#include "test_util.hpp"

using namespace rts;
using rts::test::game_from;
using rts::test::unit_at;

namespace {

struct Played {
  Outcome outcome;
  int ticks;
  int dropped;
};

Played play(Agent& a, Agent& b, const MapSpec& map, int max_ticks, uint64_t seed = 1) {
  GameState s = new_game(map, default_unit_types(), seed, max_ticks);
  int dropped = 0;
  while (!s.finished()) {
    const auto r = step(s, a.act(s, Player::P1), b.act(s, Player::P2));
    dropped += r.dropped[0] + r.dropped[1];
  }
  return {*s.outcome, s.tick, dropped};
}

const UnitActionCommand* command_for(const PlayerAction& a, int cell) {
  for (const auto& c : a) {
    if (c.source == cell) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("bots") {

TEST_CASE("PassiveAI issues NOOP for every actionable unit") {
  GameState s = new_game(bases_workers_16x16(), default_unit_types(), 1, 2000);
  bots::Passive p;
  const auto a = p.act(s, Player::P1);
  REQUIRE(a.size() == 2);
  for (const auto& c : a) CHECK(c.type == ActionType::Noop);
  const auto r = play(p, p, bases_workers_8x8(), 300);
  CHECK(r.outcome == Outcome::Draw);
  CHECK(r.ticks == 300);
}

TEST_CASE("Random is uniform over the valid commands") {
  const GameState s = game_from("rtsmap v1\n4 4\n....\nrw..\n....\n...W\n");
  const int id = unit_at(s, 1, 1).id;
  const auto valid = valid_unit_actions(s, id);
  bots::RandomBot bot(4, 1.0, "Random");
  std::map<int, int> freq;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto c = bot.choose(valid);
    ++freq[static_cast<int>(std::find(valid.begin(), valid.end(), c) - valid.begin())];
  }
  const double expected = static_cast<double>(n) / valid.size();
  double chi2 = 0;
  for (size_t i = 0; i < valid.size(); ++i) chi2 += std::pow(freq[static_cast<int>(i)] - expected, 2) / expected;
  // NOOP, three moves, harvest, barracks in three directions: 7 degrees of
  // freedom, whose 0.999 quantile is 24.32.
  CHECK(valid.size() == 8);
  CHECK(chi2 < 24.32);
}

TEST_CASE("RandomBiasedAI prefers harvest five to one") {
  const GameState s = game_from("rtsmap v1\n4 4\n....\nrw..\n....\n...W\n");
  const auto valid = valid_unit_actions(s, unit_at(s, 1, 1).id);
  bots::RandomBot bot(4, kRandomBiasFactor, "RandomBiasedAI");
  int harvest = 0;
  std::map<int, int> moves;
  for (int i = 0; i < 10000; ++i) {
    const auto c = bot.choose(valid);
    if (c.type == ActionType::Harvest) ++harvest;
    if (c.type == ActionType::Move) ++moves[c.move_dir];
  }
  for (const auto& [d, n] : moves) CHECK(harvest >= 4 * n);

  // Without any biased command the weighting is uniform.
  const GameState open = game_from("rtsmap v1\n5 5\n.....\n.....\n..w..\n.....\n....W\nstockpile 1 0\n");
  const auto plain = valid_unit_actions(open, unit_at(open, 2, 2).id);
  bots::RandomBot biased(9, kRandomBiasFactor, "b"), uniform(9, 1.0, "u");
  for (int i = 0; i < 200; ++i) CHECK(biased.choose(plain) == uniform.choose(plain));
}

TEST_CASE("seeded bots are deterministic and never issue invalid commands") {
  for (const auto& name : bot_names()) {
    auto a1 = make_bot(name, 5), b1 = make_bot("Random", 6);
    auto a2 = make_bot(name, 5), b2 = make_bot("Random", 6);
    const auto x = play(*a1, *b1, bases_workers_8x8(), 1500, 3);
    const auto y = play(*a2, *b2, bases_workers_8x8(), 1500, 3);
    CHECK(x.outcome == y.outcome);
    CHECK(x.ticks == y.ticks);
    CHECK(x.dropped == 0);
  }
}

TEST_CASE("WorkerRush first decision: train a worker, harvest") {
  const GameState s = new_game(bases_workers_16x16(), default_unit_types(), 1, 2000);
  bots::WorkerRush bot;
  const auto a = bot.act(s, Player::P1);
  const auto* base = command_for(a, s.cell_of(2, 2));
  const auto* worker = command_for(a, s.cell_of(1, 1));
  REQUIRE(base);
  REQUIRE(worker);
  CHECK(base->type == ActionType::Produce);
  CHECK(base->produce_kind == static_cast<int>(UnitKind::Worker));
  CHECK(*worker == harvest_at(s.cell_of(1, 1), 3));
}

TEST_CASE("rush units attack adjacent enemies") {
  const GameState s = game_from("rtsmap v1\n4 1\n.wW.\n");
  bots::WorkerRush wr;
  bots::LightRush lr;
  // The lone worker harvests when it can; with no resources it fights.
  CHECK(wr.act(s, Player::P1) == PlayerAction{attack_at(1, 1, 0)});
  CHECK(lr.act(s, Player::P2) == PlayerAction{attack_at(2, -1, 0)});
}

TEST_CASE("LightRush builds a barracks once it can afford one") {
  const GameState s = new_game(bases_workers_16x16(), default_unit_types(), 1, 2000);
  bots::LightRush bot;
  const auto a = bot.act(s, Player::P1);
  const auto* worker = command_for(a, s.cell_of(1, 1));
  REQUIRE(worker);
  CHECK(worker->type == ActionType::Produce);
  CHECK(worker->produce_kind == static_cast<int>(UnitKind::Barracks));
  CHECK(worker->produce_dir == 1);  // the cell north of the base, (2, 1)
  CHECK(command_for(a, s.cell_of(2, 2)) == nullptr);
}

TEST_CASE("LightRush barracks trains lights") {
  const GameState s = game_from("rtsmap v1\n5 3\nk....\n.....\n....W\nstockpile 1 2\n");
  bots::LightRush bot;
  const auto a = bot.act(s, Player::P1);
  REQUIRE(a.size() == 1);
  CHECK(a[0].type == ActionType::Produce);
  CHECK(a[0].produce_kind == static_cast<int>(UnitKind::Light));
}

TEST_CASE("rush bots beat PassiveAI") {
  bots::Passive passive;
  bots::WorkerRush wr;
  bots::LightRush lr;
  for (Agent* rush : {static_cast<Agent*>(&wr), static_cast<Agent*>(&lr)}) {
    const auto r = play(*rush, passive, bases_workers_16x16(), 4000);
    CHECK(r.outcome == Outcome::P1Win);
    CHECK(r.ticks < 4000);
    const auto mirrored = play(passive, *rush, bases_workers_16x16(), 4000);
    CHECK(mirrored.outcome == Outcome::P2Win);
  }
}

TEST_CASE("bfs first step") {
  const GameState s = game_from("rtsmap v1\n4 3\nw.r.\n.r..\n...W\n");
  std::vector<uint8_t> goal(s.cells(), 0);
  goal[s.cell_of(3, 0)] = 1;
  CHECK(bots::bfs_first_step(s, 0, goal) == 2);
  goal.assign(s.cells(), 0);
  CHECK(bots::bfs_first_step(s, 0, goal) == -1);
  goal[0] = 1;
  CHECK(bots::bfs_first_step(s, 0, goal) == -1);
}

TEST_CASE("unknown bot names are rejected") {
  CHECK_THROWS_AS(make_bot("CoacAI", 1), ConfigError);
  CHECK(make_bot("light_rush", 1)->name() == "LightRush");
}

}  // TEST_SUITE
