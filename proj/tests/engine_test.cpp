#include <algorithm>
#include <random>

#include "doctest.h"
#include "rts/bots.hpp"
#include "rts/engine.hpp"
#include "test_util.hpp"

using namespace rts;
using rts::test::game_from;
using rts::test::random_valid_action;
using rts::test::unit_at;

TEST_SUITE("engine") {

TEST_CASE("new_game on basesWorkers16x16") {
  const GameState s = new_game(bases_workers_16x16(), default_unit_types(), 42, 2000);
  int bases = 0, workers = 0, resources = 0;
  for (const auto& u : s.units) {
    bases += u.kind == UnitKind::Base;
    workers += u.kind == UnitKind::Worker;
    resources += u.kind == UnitKind::Resource;
  }
  CHECK(bases == 2);
  CHECK(workers == 2);
  CHECK(resources == 4);
  CHECK(s.tick == 0);
  CHECK(s.stockpile == std::array<int, 2>{5, 5});
  CHECK(unit_at(s, 2, 2).kind == UnitKind::Base);
  CHECK(unit_at(s, 13, 13).owner == Player::P2);
  CHECK(unit_at(s, 0, 1).carried == 25);
  check_invariants(s);

  const GameState again = new_game(bases_workers_16x16(), default_unit_types(), 42, 2000);
  CHECK(state_hash(s) == state_hash(again));
}

TEST_CASE("new_game rejects malformed maps") {
  MapSpec m;
  m.w = 4;
  m.h = 4;
  m.units.push_back({UnitKind::Worker, Player::P1, 1, 1});
  m.units.push_back({UnitKind::Light, Player::P2, 1, 1});
  CHECK_THROWS_AS(new_game(m, default_unit_types(), 1, 100), ConfigError);

  m.units.pop_back();
  m.units.push_back({UnitKind::Worker, Player::P2, 4, 0});
  CHECK_THROWS_AS(new_game(m, default_unit_types(), 1, 100), ConfigError);

  m.units.pop_back();
  m.units.push_back({UnitKind::Worker, Player::None, 2, 0});
  CHECK_THROWS_AS(new_game(m, default_unit_types(), 1, 100), ConfigError);
}

TEST_CASE("valid_unit_actions: harvest next to a resource") {
  const GameState s = game_from("rtsmap v1\n4 4\n....\nrw..\n....\n...W\n");
  const auto actions = valid_unit_actions(s, unit_at(s, 1, 1).id);
  CHECK(actions.front() == noop_at(s.cell_of(1, 1)));
  CHECK(std::count(actions.begin(), actions.end(), harvest_at(s.cell_of(1, 1), 3)) == 1);
  CHECK(std::none_of(actions.begin(), actions.end(), [](const auto& c) { return c.type == ActionType::Return; }));
}

TEST_CASE("valid_unit_actions: base that cannot afford a worker") {
  const GameState s = game_from("rtsmap v1\n3 3\n...\n.b.\n..W\nstockpile 1 0\n");
  const auto actions = valid_unit_actions(s, unit_at(s, 1, 1).id);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].type == ActionType::Noop);
}

TEST_CASE("valid_unit_actions: light next to an enemy worker") {
  const GameState s = game_from("rtsmap v1\n5 5\n.....\n.....\n..lW.\n.....\n.....\n");
  const auto actions = valid_unit_actions(s, unit_at(s, 2, 2).id);
  std::vector<UnitActionCommand> attacks;
  std::copy_if(actions.begin(), actions.end(), std::back_inserter(attacks),
               [](const auto& c) { return c.type == ActionType::Attack; });
  REQUIRE(attacks.size() == 1);
  CHECK(attacks[0].attack_pos == attack_index(1, 0));
  CHECK(attacks[0].attack_pos == 25);
}

TEST_CASE("valid_unit_actions errors") {
  GameState s = game_from("rtsmap v1\n3 3\nr..\n.w.\n..W\n");
  CHECK_THROWS_AS(valid_unit_actions(s, 999), GameError);
  CHECK_THROWS_AS(valid_unit_actions(s, unit_at(s, 0, 0).id), GameError);
  simulate_issue_in_place(s, noop_at(s.cell_of(1, 1)));
  CHECK_THROWS_AS(valid_unit_actions(s, unit_at(s, 1, 1).id), GameError);
}

TEST_CASE("move resolves exactly after move_time ticks") {
  GameState s = game_from("rtsmap v1\n4 4\n.w..\n....\n....\n...W\n");
  const int id = unit_at(s, 1, 0).id;
  const int move_time = (*s.utt)[UnitKind::Worker].move_time;
  step(s, {move_at(s.cell_of(1, 0), 2)}, {});
  for (int t = 1; t < move_time; ++t) {
    CHECK(s.find(id)->busy);
    CHECK(s.find(id)->y == 0);
    CHECK(s.reserved[s.cell_of(1, 1)] == 1);
    step(s, {}, {});
  }
  CHECK(s.tick == move_time);
  CHECK_FALSE(s.find(id)->busy);
  CHECK(s.find(id)->y == 1);
  CHECK(s.reserved[s.cell_of(1, 1)] == 0);
  check_invariants(s);
}

TEST_CASE("NOOP play ends in a draw at max ticks") {
  GameState s = new_game(bases_workers_16x16(), default_unit_types(), 7, 2000);
  bots::Passive a, b;
  StepResult last;
  while (!s.finished()) last = step(s, a.act(s, Player::P1), b.act(s, Player::P2));
  CHECK(s.tick == 2000);
  CHECK(s.outcome == Outcome::Draw);
  REQUIRE(last.terminal);
  CHECK(*last.terminal == Outcome::Draw);
  const auto draws = std::count_if(last.events.begin(), last.events.end(),
                                   [](const GameEvent& e) { return e.kind == EventKind::Draw; });
  CHECK(draws == 2);

  const uint64_t h = state_hash(s);
  const auto r = step(s, {}, {});
  CHECK(state_hash(s) == h);
  CHECK(r.events.empty());
}

TEST_CASE("attack event at initiation, damage attack_time ticks later") {
  GameState s = game_from("rtsmap v1\n5 3\n.....\n.lH..\n.....\n");
  const int target = unit_at(s, 2, 1).id;
  const int attack_time = (*s.utt)[UnitKind::Light].attack_time;
  const int hp = s.find(target)->hp;
  const auto r = step(s, {attack_at(s.cell_of(1, 1), 1, 0)}, {});
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == EventKind::AttackIssued);
  CHECK(r.events[0].tick == 0);
  CHECK(r.events[0].unit_id == unit_at(s, 1, 1).id);
  for (int t = 1; t < attack_time; ++t) {
    CHECK(s.find(target)->hp == hp);
    CHECK(step(s, {}, {}).events.empty());
  }
  CHECK(s.find(target)->hp == hp - (*s.utt)[UnitKind::Light].attack_damage);
}

TEST_CASE("attack on a cell that was vacated misses") {
  GameState s = game_from("rtsmap v1\n5 3\n.....\n.lW..\n.....\n");
  const int light = unit_at(s, 1, 1).id, target = unit_at(s, 2, 1).id;
  step(s, {}, {move_at(s.cell_of(2, 1), 1)});
  for (int t = 0; t < 5; ++t) step(s, {}, {});
  REQUIRE(s.find(target)->x == 2);
  step(s, {attack_at(s.cell_of(1, 1), 1, 0)}, {});
  while (s.find(light)->busy) step(s, {}, {});
  CHECK(s.find(target)->x == 3);
  CHECK(s.find(target)->hp == 1);
}

TEST_CASE("killing the last enemy unit wins") {
  GameState s = game_from("rtsmap v1\n3 1\nlW.\n");
  StepResult r;
  r = step(s, {attack_at(0, 1, 0)}, {});
  while (!r.terminal) r = step(s, {}, {});
  CHECK(*r.terminal == Outcome::P1Win);
  CHECK(s.tick == (*s.utt)[UnitKind::Light].attack_time);
  int wins = 0, losses = 0;
  for (const auto& e : r.events) {
    wins += e.kind == EventKind::Win && e.player == Player::P1;
    losses += e.kind == EventKind::Loss && e.player == Player::P2;
  }
  CHECK(wins == 1);
  CHECK(losses == 1);
}

TEST_CASE("simultaneous moves into one cell: lower id wins") {
  GameState s = game_from("rtsmap v1\n3 1\nw.W\n");
  const int p1 = unit_at(s, 0, 0).id, p2 = unit_at(s, 2, 0).id;
  REQUIRE(p1 < p2);
  const auto r = step(s, {move_at(0, 1)}, {move_at(2, 3)});
  CHECK(r.accepted == std::array<int, 2>{1, 1});
  while (s.find(p1)->busy || s.find(p2)->busy) step(s, {}, {});
  CHECK(s.find(p1)->x == 1);
  CHECK(s.find(p2)->x == 2);
  check_invariants(s);
}

TEST_CASE("production into an occupied cell is refunded") {
  GameState s = game_from("rtsmap v1\n3 2\nb..\n.W.\n");
  const int64_t total = total_resources(s);
  const int base = unit_at(s, 0, 0).id;
  // P2 validates against the pre-step state, so it can claim the same cell.
  const auto r = step(s, {produce_at(0, 1, UnitKind::Worker)}, {move_at(s.cell_of(1, 1), 0)});
  CHECK(r.accepted == std::array<int, 2>{1, 1});
  CHECK(s.stockpile[0] == 4);
  while (s.find(base)->busy) {
    step(s, {}, {});
    CHECK(total_resources(s) == total);
  }
  CHECK(s.stockpile[0] == 5);
  CHECK(unit_at(s, 1, 0).owner == Player::P2);
  CHECK(s.units.size() == 2);
  check_invariants(s);
}

TEST_CASE("harvest and return move resources into the stockpile") {
  GameState s = game_from("rtsmap v1\n4 3\nrwb.\n....\n...W\n");
  const auto& utt = *s.utt;
  step(s, {harvest_at(1, 3)}, {});
  for (int t = 1; t < utt[UnitKind::Worker].harvest_time; ++t) step(s, {}, {});
  CHECK(unit_at(s, 1, 0).carried == 1);
  CHECK(unit_at(s, 0, 0).carried == 24);
  step(s, {return_at(1, 1)}, {});
  for (int t = 1; t < utt[UnitKind::Worker].return_time; ++t) step(s, {}, {});
  CHECK(unit_at(s, 1, 0).carried == 0);
  CHECK(s.stockpile[0] == 6);
}

TEST_CASE("depleted resource nodes disappear") {
  GameState s = game_from("rtsmap v1\n3 2\nrw.\n..W\nresource 0 0 1\n");
  step(s, {harvest_at(1, 3)}, {});
  while (unit_at(s, 1, 0).busy) step(s, {}, {});
  CHECK(s.unit_at(0) == nullptr);
  check_invariants(s);
}

TEST_CASE("simulate_issue: building a barracks reserves the funds") {
  const GameState s = game_from("rtsmap v1\n5 5\n.....\n.bw..\n.....\n.....\n....W\n");
  const int base = unit_at(s, 1, 1).id;
  auto produces_worker = [](const std::vector<UnitActionCommand>& v) {
    return std::any_of(v.begin(), v.end(), [](const auto& c) { return c.type == ActionType::Produce; });
  };
  CHECK(produces_worker(valid_unit_actions(s, base)));
  const GameState sim = simulate_issue(s, produce_at(s.cell_of(2, 1), 1, UnitKind::Barracks));
  CHECK(sim.stockpile[0] == 0);
  CHECK_FALSE(produces_worker(valid_unit_actions(sim, base)));
  CHECK(s.stockpile[0] == 5);
  CHECK_FALSE(unit_at(s, 2, 1).busy);
}

TEST_CASE("simulate_issue: a reserved move target is masked for siblings") {
  const GameState s = game_from("rtsmap v1\n3 3\nw.w\n...\n..W\n");
  const int second = unit_at(s, 2, 0).id;
  const auto west = move_at(s.cell_of(2, 0), 3);
  auto contains = [](const std::vector<UnitActionCommand>& v, const UnitActionCommand& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  CHECK(contains(valid_unit_actions(s, second), west));
  const GameState sim = simulate_issue(s, move_at(0, 1));
  CHECK_FALSE(contains(valid_unit_actions(sim, second), west));
}

TEST_CASE("simulate_issue: NOOP marks the unit busy for one tick only") {
  const GameState s = game_from("rtsmap v1\n3 3\nw..\n...\n..W\n");
  GameState sim = simulate_issue(s, noop_at(0));
  REQUIRE(sim.unit_at(0)->busy);
  CHECK(sim.unit_at(0)->busy->ticks_remaining == 1);
  sim.find(sim.unit_at(0)->id)->busy.reset();
  CHECK(state_hash(sim) == state_hash(s));
  CHECK_THROWS_AS(simulate_issue(s, move_at(0, 0)), GameError);
  CHECK_THROWS_AS(simulate_issue(s, noop_at(4)), GameError);
}

TEST_CASE("state_hash") {
  GameState s = new_game(bases_workers_16x16(), default_unit_types(), 3, 2000);
  const GameState clone = s;
  CHECK(state_hash(s) == state_hash(clone));
  step(s, {}, {});
  CHECK(state_hash(s) != state_hash(clone));

  GameState other_seed = new_game(bases_workers_16x16(), default_unit_types(), 4, 2000);
  CHECK(state_hash(other_seed) != state_hash(clone));
}

TEST_CASE("replays with the same seed and script agree for 2000 ticks") {
  auto run = [](uint64_t seed) {
    GameState s = new_game(bases_workers_16x16(), default_unit_types(), seed, 2000);
    bots::RandomBot a(seed, 1.0, "a"), b(seed + 1, 1.0, "b");
    std::vector<GameEvent> log;
    while (!s.finished()) {
      auto r = step(s, a.act(s, Player::P1), b.act(s, Player::P2));
      log.insert(log.end(), r.events.begin(), r.events.end());
    }
    return std::make_pair(state_hash(s), log);
  };
  const auto x = run(11), y = run(11);
  CHECK(x.first == y.first);
  CHECK(x.second == y.second);
}

TEST_CASE("property: invariants, conservation and monotone ticks under random play") {
  std::mt19937_64 rng(2024);
  for (int game = 0; game < 20; ++game) {
    GameState s = new_game(game % 2 ? bases_workers_8x8() : bases_workers_16x16(), default_unit_types(),
                           game, 600);
    const int64_t total = total_resources(s);
    while (!s.finished()) {
      const int tick = s.tick;
      const auto p1 = random_valid_action(s, Player::P1, rng);
      const auto p2 = random_valid_action(s, Player::P2, rng);
      const auto r = step(s, p1, p2);
      CHECK(r.dropped == std::array<int, 2>{0, 0});
      CHECK(s.tick == tick + 1);
      check_invariants(s);
      REQUIRE(total_resources(s) == total);
    }
    CHECK(s.tick <= 600);
  }
}

TEST_CASE("property: step accepts a command iff the oracle lists it") {
  std::mt19937_64 rng(99);
  GameState s = new_game(bases_workers_8x8(), default_unit_types(), 5, 400);
  std::uniform_int_distribution<int> type(0, 5), dir(0, 3), kind(0, 6), pos(0, kAttackCells - 1);
  int checked = 0;
  while (!s.finished()) {
    for (const auto& u : s.units) {
      if (u.owner == Player::None || u.busy) continue;
      const auto valid = valid_unit_actions(s, u.id);
      for (int k = 0; k < 40; ++k) {
        UnitActionCommand c{.source = s.cell_of(u.x, u.y), .type = static_cast<ActionType>(type(rng)),
                            .move_dir = dir(rng), .harvest_dir = dir(rng), .return_dir = dir(rng),
                            .produce_dir = dir(rng), .produce_kind = kind(rng), .attack_pos = pos(rng)};
        const bool listed = std::find(valid.begin(), valid.end(), canonical(c)) != valid.end();
        GameState copy = s;
        const auto r = u.owner == Player::P1 ? step(copy, {c}, {}) : step(copy, {}, {c});
        CHECK(listed == (r.accepted[index_of(u.owner)] == 1));
        ++checked;
      }
    }
    step(s, random_valid_action(s, Player::P1, rng), random_valid_action(s, Player::P2, rng));
  }
  CHECK(checked > 1000);
}

}  // TEST_SUITE
