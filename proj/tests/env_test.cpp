#include <random>

#include "doctest.h"
#include "rts/env/env.hpp"
#include "test_util.hpp"

using namespace rts;
using rts::test::game_from;

namespace {

EnvConfig config_for(const std::string& map_text, int max_ticks = 2000, MaskLevel level = MaskLevel::Full) {
  EnvConfig cfg;
  cfg.map = parse_map(map_text);
  cfg.max_ticks = max_ticks;
  cfg.mask = level;
  return cfg;
}

EnvConfig config_for(MapSpec map, int max_ticks = 2000) {
  EnvConfig cfg;
  cfg.map = std::move(map);
  cfg.max_ticks = max_ticks;
  return cfg;
}

// Uniform over the set bits. A component whose mask is empty is never
// consumed by an allowed type, so any value will do there.
int pick(std::span<const uint8_t> mask, std::mt19937_64& rng, bool allow_empty = false) {
  std::vector<int> ok;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) ok.push_back(static_cast<int>(i));
  }
  if (ok.empty() && allow_empty) return 0;
  REQUIRE_FALSE(ok.empty());
  return ok[std::uniform_int_distribution<size_t>(0, ok.size() - 1)(rng)];
}

// Samples every component independently under the unit mask.
UnitActionCommand sample_unit_action(const UnitMask& m, int source, std::mt19937_64& rng) {
  UnitActionCommand c{.source = source};
  for (int comp = 0; comp < kNumUnitComponents; ++comp) {
    set_component(c, comp, pick(component_mask(m, comp), rng, true));
  }
  return c;
}

UnitActionCommand sample_decision(const UasEnv& env, std::mt19937_64& rng) {
  const int src = pick(env.source_mask(), rng);
  return sample_unit_action(env.unit_mask(src), src, rng);
}

std::vector<int> sample_grid(std::span<const uint8_t> grid_mask, int cells, std::mt19937_64& rng) {
  std::vector<int> out(static_cast<size_t>(cells) * kNumUnitComponents);
  for (int c = 0; c < cells; ++c) {
    const auto row = grid_mask.subspan(static_cast<size_t>(c) * kGridMaskWidth + 1, kUnitMaskWidth);
    for (int comp = 0; comp < kNumUnitComponents; ++comp) {
      out[static_cast<size_t>(c) * kNumUnitComponents + comp] = pick(component_mask(row, comp), rng, true);
    }
  }
  return out;
}

void put(std::vector<int>& grid, const UnitActionCommand& c) {
  for (int comp = 0; comp < kNumUnitComponents; ++comp) {
    grid[static_cast<size_t>(c.source) * kNumUnitComponents + comp] = component_value(c, comp);
  }
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("UAS round with two actionable units") {
  UasEnv env(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  const int base = env.state().cell_of(2, 2), worker = env.state().cell_of(1, 1);
  int call = 0;
  auto source = [&](const ObservationTensor& obs, std::span<const uint8_t> mask) {
    CHECK(obs.data.size() == 16u * 16u * 27u);
    if (call++ == 0) return base;
    CHECK(mask[base] == 0);
    return worker;
  };
  auto action = [&](const ObservationTensor&, const UnitMask& m, int src) {
    if (src == base) return noop_at(src);
    CHECK(m[static_cast<int>(ActionType::Harvest)] == 1);
    return harvest_at(src, 3);
  };
  const auto r = env.uas_episode_step(source, action);
  CHECK(r.source_calls == 2);
  CHECK(r.action_calls == 2);
  CHECK(env.state().tick == 1);
  CHECK(r.issued.size() == 2);
  REQUIRE(r.per_decision.size() == 2);
  CHECK(r.per_decision[0] == Reward());
  CHECK(r.per_decision[1].value() == 1.0);
  CHECK(r.reward.value() == 1.0);
  CHECK_FALSE(r.done);
  CHECK_FALSE(r.info.sparse_outcome);
}

TEST_CASE("UAS step with no actionable unit makes no decision calls") {
  UasEnv env(config_for("rtsmap v1\n3 1\nw.W\n"), std::make_unique<bots::Passive>(), 1);
  int calls = 0;
  auto first_source = [&](const ObservationTensor&, std::span<const uint8_t>) {
    ++calls;
    return 0;
  };
  auto move_east = [](const ObservationTensor&, const UnitMask&, int src) { return move_at(src, 1); };
  env.uas_episode_step(first_source, move_east);
  CHECK(calls == 1);
  const auto r = env.uas_episode_step(first_source, move_east);
  CHECK(calls == 1);
  CHECK(r.source_calls == 0);
  CHECK(r.action_calls == 0);
  CHECK(r.issued.empty());
  CHECK(env.state().tick == 2);
}

TEST_CASE("UAS rejects choices outside the masks") {
  UasEnv env(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  CHECK_THROWS_AS(env.decide(noop_at(env.state().cell_of(7, 7))), ProtocolError);
  CHECK_THROWS_AS(env.decide(move_at(env.state().cell_of(1, 1), 3)), ProtocolError);  // resource to the west
  CHECK_THROWS_AS(env.decide(attack_at(env.state().cell_of(1, 1), 1, 0)), ProtocolError);
  auto bad_source = [](const ObservationTensor&, std::span<const uint8_t>) { return 0; };
  auto noop = [](const ObservationTensor&, const UnitMask&, int src) { return noop_at(src); };
  CHECK_THROWS_AS(env.uas_episode_step(bad_source, noop), ProtocolError);
}

TEST_CASE("UAS decide: rewards per decision, rounds, auto-advance") {
  UasEnv env(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  const int base = env.state().cell_of(2, 2), worker = env.state().cell_of(1, 1);
  auto t = env.decide(produce_at(base, 2, UnitKind::Worker));
  CHECK(t.reward.value() == 1.0);
  CHECK_FALSE(t.round_complete);
  CHECK(env.state().tick == 0);
  CHECK(env.source_mask()[base] == 0);
  CHECK(env.simulated().stockpile[0] == 4);
  CHECK(env.state().stockpile[0] == 5);
  t = env.decide(harvest_at(worker, 3));
  CHECK(t.reward.value() == 1.0);
  CHECK(t.round_complete);
  // Both units are busy: the env advances to the harvest's resolution.
  CHECK(env.state().tick == (*default_unit_types())[UnitKind::Worker].harvest_time);
  CHECK(env.source_mask()[worker] == 1);
  CHECK(env.source_mask()[base] == 0);
}

TEST_CASE("UAS terminal transition carries the win and resets") {
  UasEnv env(config_for("rtsmap v1\n2 1\nlW\n"), std::make_unique<bots::Passive>(), 1);
  const auto t = env.decide(attack_at(0, 1, 0));
  CHECK(t.done);
  CHECK(t.round_complete);
  CHECK(t.reward.value() == 11.0);
  REQUIRE(t.info.sparse_outcome);
  CHECK(*t.info.sparse_outcome == 1);
  REQUIRE(t.episode);
  CHECK(t.episode->shaped_return.value() == 11.0);
  CHECK(t.episode->ticks == 5);
  CHECK(env.state().tick == 0);
  CHECK(env.source_mask()[0] == 1);
}

TEST_CASE("UAS without masks drops invalid decisions and ends the round") {
  EnvConfig cfg = config_for(bases_workers_16x16());
  cfg.mask = MaskLevel::None;
  UasEnv none(cfg, std::make_unique<bots::Passive>(), 1);
  for (auto v : none.source_mask()) CHECK(v == 1);
  const auto t = none.decide(move_at(none.state().cell_of(1, 1), 3));
  CHECK(t.info.dropped == 1);
  CHECK(t.round_complete);
  CHECK(t.reward == Reward());
  CHECK(none.state().tick == 1);
}

TEST_CASE("UAS partial masks keep the source and type bits") {
  EnvConfig cfg = config_for(bases_workers_16x16());
  cfg.mask = MaskLevel::Partial;
  UasEnv env(cfg, std::make_unique<bots::Passive>(), 1);
  int sources = 0;
  for (auto v : env.source_mask()) sources += v;
  CHECK(sources == 2);
  const UnitMask m = env.unit_mask(env.state().cell_of(1, 1));
  CHECK(m[static_cast<int>(ActionType::Attack)] == 0);
  CHECK(m[kComponentOffsets[kAttackComponent]] == 1);
}

TEST_CASE("UAS as player two sees the rotated board") {
  EnvConfig cfg = config_for(bases_workers_16x16());
  cfg.agent_seat = Player::P2;
  UasEnv p2(cfg, std::make_unique<bots::Passive>(), 1);
  UasEnv p1(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  CHECK(std::ranges::equal(p2.observation(), p1.observation()));
  CHECK(std::ranges::equal(p2.source_mask(), p1.source_mask()));
  // View-frame harvest west at (1,1) is the real worker at (14,14) harvesting east.
  const auto t = p2.decide(harvest_at(p2.state().cell_of(1, 1), 3));
  CHECK(t.reward.value() == 1.0);
  const Unit* w = p2.simulated().unit_at(p2.state().cell_of(14, 14));
  REQUIRE(w);
  REQUIRE(w->busy);
  CHECK(w->busy->command == harvest_at(p2.state().cell_of(14, 14), 1));
}

TEST_CASE("UAS simulated rewards agree with the engine over random play") {
  std::mt19937_64 rng(4);
  UasEnv env(config_for(bases_workers_8x8(), 800), make_bot("Random", 3), 9);
  int episodes = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto t = env.decide(sample_decision(env, rng));
    CHECK(t.info.dropped == 0);
    episodes += t.done;
  }
  CHECK(episodes > 0);
}

TEST_CASE("Gridnet: 4x5 map, 3 actionable units, 20 cell actions, 3 executed") {
  EnvConfig cfg = config_for("rtsmap v1\n5 4\nw.w..\n.....\n..w..\n....W\nstockpile 1 0\n");
  GridnetEnv env(cfg, std::make_unique<bots::Passive>(), 1);
  std::vector<int> grid(20 * kNumUnitComponents, 0);
  put(grid, move_at(0, 2));
  put(grid, move_at(2, 2));
  put(grid, move_at(12, 1));
  // Rows without a source are ignored whatever they hold.
  put(grid, move_at(7, 0));
  const auto r = env.step(grid);
  CHECK(grid.size() / kNumUnitComponents == 20);
  CHECK(r.executed == 3);
  CHECK(r.info.dropped == 0);
}

TEST_CASE("Gridnet all-NOOP grid advances one tick") {
  GridnetEnv env(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  const std::vector<int> grid(256 * kNumUnitComponents, 0);
  const auto r = env.step(grid);
  CHECK(env.state().tick == 1);
  CHECK(r.executed == 0);
  CHECK(r.reward == Reward());
  CHECK_THROWS_AS(env.step(std::vector<int>(5, 0)), ConfigError);
}

TEST_CASE("Gridnet sums simultaneous produce events into one reward") {
  const std::string map = "rtsmap v1\n5 3\nb....\n.....\n..k.W\nstockpile 1 5\n";
  GridnetEnv env(config_for(map), std::make_unique<bots::Passive>(), 1);
  std::vector<int> grid(15 * kNumUnitComponents, 0);
  put(grid, produce_at(0, 1, UnitKind::Worker));
  put(grid, produce_at(12, 0, UnitKind::Light));
  const auto r = env.step(grid);
  CHECK(r.executed == 2);
  GameState s = game_from(map);
  const auto events = step(s, {produce_at(0, 1, UnitKind::Worker), produce_at(12, 0, UnitKind::Light)}, {}).events;
  CHECK(r.reward == shape(events, Player::P1, RewardWeights{}));
  CHECK(r.reward.value() == 5.0);
}

TEST_CASE("Gridnet rejects selections outside the mask") {
  GridnetEnv env(config_for(bases_workers_16x16()), std::make_unique<bots::Passive>(), 1);
  std::vector<int> grid(256 * kNumUnitComponents, 0);
  put(grid, move_at(17, 3));
  CHECK_THROWS_AS(env.step(grid), ProtocolError);
}

TEST_CASE("Gridnet executed count equals valid non-NOOP selections") {
  std::mt19937_64 rng(6);
  EnvConfig cfg = config_for(bases_workers_8x8(), 600);
  cfg.mask = MaskLevel::Partial;
  GridnetEnv env(cfg, make_bot("Random", 2), 3);
  for (int t = 0; t < 600; ++t) {
    const auto grid = sample_grid(env.grid_mask(), 64, rng);
    GameState probe = env.state();
    int expected = 0;
    for (int c = 0; c < 64; ++c) {
      if (!env.grid_mask()[static_cast<size_t>(c) * kGridMaskWidth]) continue;
      UnitActionCommand cmd{.source = c};
      for (int comp = 0; comp < kNumUnitComponents; ++comp) {
        set_component(cmd, comp, grid[static_cast<size_t>(c) * kNumUnitComponents + comp]);
      }
      if (cmd.type == ActionType::Noop || !is_valid_command(probe, Player::P1, cmd)) continue;
      simulate_issue_in_place(probe, cmd);
      ++expected;
    }
    const auto r = env.step(grid);
    CHECK(r.executed == expected);
  }
}

TEST_CASE("Gridnet episode end replaces the observation with the reset one") {
  GridnetEnv env(config_for(bases_workers_8x8(), 3), std::make_unique<bots::Passive>(), 1);
  const std::vector<uint8_t> initial(env.observation().begin(), env.observation().end());
  std::mt19937_64 rng(1);
  GridnetEnv::SeatStep r;
  for (int t = 0; t < 3; ++t) r = env.step(sample_grid(env.grid_mask(), 64, rng));
  CHECK(r.done);
  REQUIRE(r.info.sparse_outcome);
  CHECK(*r.info.sparse_outcome == 0);
  CHECK(std::ranges::equal(env.observation(), initial));
  CHECK(env.state().tick == 0);
}

TEST_CASE("slot plans") {
  const auto plan = OpponentSlotPlan::from_mix(
      8, {{OpponentKind::LightRush, 0.5}, {OpponentKind::Random, 0.25}, {OpponentKind::Self, 0.25}});
  REQUIRE(plan.slots.size() == 8);
  CHECK(std::count(plan.slots.begin(), plan.slots.end(), OpponentKind::LightRush) == 4);
  CHECK(plan.self_slots() == 2);
  CHECK(plan.slots[6] == OpponentKind::Self);
  CHECK(plan.slots[7] == OpponentKind::Self);

  const auto apportioned = OpponentSlotPlan::parse(7, "LightRush:1, Random:1, WorkerRush:1");
  CHECK(apportioned.slots.size() == 7);
  CHECK(std::count(apportioned.slots.begin(), apportioned.slots.end(), OpponentKind::LightRush) == 3);

  CHECK_THROWS_AS(OpponentSlotPlan::parse(3, "SELF"), ConfigError);
  CHECK_THROWS_AS(OpponentSlotPlan::parse(4, "CoacAI"), ConfigError);
  CHECK_THROWS_AS(OpponentSlotPlan::parse(4, "Random:x"), ConfigError);
  CHECK_THROWS_AS(UasVecEnv(config_for(bases_workers_8x8()), OpponentSlotPlan::parse(2, "SELF"), 1), ConfigError);
}

TEST_CASE("vectorized UAS: slot mismatch and identical seeds") {
  const auto plan = OpponentSlotPlan::parse(4, "Random");
  UasVecEnv a(config_for(bases_workers_8x8(), 400), plan, 5), b(config_for(bases_workers_8x8(), 400), plan, 5);
  CHECK_THROWS_AS(a.step(std::vector<UnitActionCommand>(3)), ConfigError);
  std::mt19937_64 ra(1), rb(1);
  for (int t = 0; t < 2000; ++t) {
    std::vector<UnitActionCommand> da, db;
    for (int i = 0; i < 4; ++i) {
      da.push_back(sample_decision(a.slot(i), ra));
      db.push_back(sample_decision(b.slot(i), rb));
    }
    const auto xa = a.step(da), xb = b.step(db);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(xa[i].reward == xb[i].reward);
      REQUIRE(xa[i].done == xb[i].done);
      REQUIRE(std::ranges::equal(a.slot(i).observation(), b.slot(i).observation()));
    }
  }
  for (int i = 0; i < 4; ++i) CHECK(state_hash(a.slot(i).state()) == state_hash(b.slot(i).state()));
}

TEST_CASE("selfplay: two SELF slots share one game") {
  const auto plan = OpponentSlotPlan::parse(2, "SELF");
  GridnetVecEnv vec(config_for("rtsmap v1\n2 1\nlW\n"), plan, 1);
  CHECK(vec.num_slots() == 2);
  CHECK(vec.num_games() == 1);
  std::vector<int> a(2 * kNumUnitComponents, 0), b(2 * kNumUnitComponents, 0);
  put(a, attack_at(0, 1, 0));
  std::vector<GridnetEnv::SeatStep> r;
  for (int t = 0; t < 5; ++t) {
    const std::array<std::span<const int>, 2> grids{a, b};
    r = vec.step(grids);
    std::fill(a.begin(), a.end(), 0);
  }
  REQUIRE(r[0].done);
  REQUIRE(r[1].done);
  CHECK(*r[0].info.sparse_outcome == 1);
  CHECK(*r[1].info.sparse_outcome == -1);
  CHECK(r[0].reward.value() == 10.0);
  CHECK(r[1].reward.value() == -10.0);
  const std::vector<std::span<const int>> wrong{a};
  CHECK_THROWS_AS(vec.step(wrong), ConfigError);
}

TEST_CASE("selfplay: identical policies mirror each other on a symmetric start") {
  const auto plan = OpponentSlotPlan::parse(2, "SELF");
  GridnetVecEnv vec(config_for(bases_workers_16x16()), plan, 1);
  CHECK(std::ranges::equal(vec.observation(0), vec.observation(1)));
  CHECK(std::ranges::equal(vec.grid_mask(0), vec.grid_mask(1)));
  std::mt19937_64 r0(3), r1(3);
  const auto g0 = sample_grid(vec.grid_mask(0), 256, r0);
  const auto g1 = sample_grid(vec.grid_mask(1), 256, r1);
  CHECK(g0 == g1);
  const std::array<std::span<const int>, 2> grids{g0, g1};
  const auto r = vec.step(grids);
  CHECK(r[0].executed == r[1].executed);
  CHECK(r[0].reward == r[1].reward);
  CHECK(std::ranges::equal(vec.observation(0), vec.observation(1)));
  const GameState& s = vec.game_of(0).state();
  CHECK(encode_observation(s, Player::P1) == encode_observation(s, Player::P2));
}

TEST_CASE("mixed gridnet runner keeps slot order") {
  const auto plan = OpponentSlotPlan::parse(4, "Random:0.5,SELF:0.5");
  GridnetVecEnv vec(config_for(bases_workers_8x8(), 300), plan, 2);
  CHECK(vec.num_games() == 3);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::vector<int>> grids;
    for (int s = 0; s < 4; ++s) grids.push_back(sample_grid(vec.grid_mask(s), 64, rng));
    const std::vector<std::span<const int>> spans(grids.begin(), grids.end());
    const auto r = vec.step(spans);
    if (t == 299) {
      for (const auto& x : r) CHECK(x.done);
    }
  }
}

TEST_CASE("UAS per-unit rewards sum to the Gridnet collective reward") {
  // Same scripted commands through both protocols against a passive opponent.
  const std::string map = "rtsmap v1\n6 4\nr.b...\nrw.w..\n..k..W\n.....l\nstockpile 1 20\n";
  UasEnv uas(config_for(map), std::make_unique<bots::Passive>(), 1);
  GridnetEnv grid(config_for(map), std::make_unique<bots::Passive>(), 1);
  std::mt19937_64 rng(10);
  for (int tick = 0; tick < 300; ++tick) {
    PlayerAction script;
    auto choose_source = [&](const ObservationTensor&, std::span<const uint8_t> m) { return pick(m, rng); };
    auto choose_action = [&](const ObservationTensor&, const UnitMask& m, int src) {
      auto c = sample_unit_action(m, src, rng);
      script.push_back(c);
      return c;
    };
    const auto u = uas.uas_episode_step(choose_source, choose_action);
    std::vector<int> g(24 * kNumUnitComponents, 0);
    for (const auto& c : script) put(g, c);
    const auto r = grid.step(g);
    Reward per_unit;
    for (const auto& [id, rw] : u.per_unit) per_unit += rw;
    REQUIRE(per_unit == r.reward);
    REQUIRE(u.reward == r.reward);
    REQUIRE(state_hash(uas.state()) == state_hash(grid.state()));
    if (u.done) break;
  }
}

}  // TEST_SUITE
