#include "rts/engine.hpp"

#include <algorithm>
#include <string>

namespace rts {

UnitActionCommand canonical(const UnitActionCommand& c) {
  UnitActionCommand out{.source = c.source, .type = c.type};
  switch (c.type) {
    case ActionType::Noop: break;
    case ActionType::Move: out.move_dir = c.move_dir; break;
    case ActionType::Harvest: out.harvest_dir = c.harvest_dir; break;
    case ActionType::Return: out.return_dir = c.return_dir; break;
    case ActionType::Produce:
      out.produce_dir = c.produce_dir;
      out.produce_kind = c.produce_kind;
      break;
    case ActionType::Attack: out.attack_pos = c.attack_pos; break;
  }
  return out;
}

const Unit* GameState::find(int id) const {
  auto it = std::lower_bound(units.begin(), units.end(), id,
                             [](const Unit& u, int v) { return u.id < v; });
  return it != units.end() && it->id == id ? &*it : nullptr;
}

Unit* GameState::find(int id) {
  return const_cast<Unit*>(static_cast<const GameState&>(*this).find(id));
}

const Unit* GameState::unit_at(int cell) const {
  const int id = occupant[cell];
  return id < 0 ? nullptr : find(id);
}

Unit* GameState::unit_at(int cell) {
  const int id = occupant[cell];
  return id < 0 ? nullptr : find(id);
}

int64_t total_resources(const GameState& s) {
  int64_t total = s.stockpile[0] + s.stockpile[1] + s.produced_cost + s.in_production_cost +
                  s.lost_resources;
  for (const auto& u : s.units) total += u.carried;
  return total;
}

namespace {

bool dir_ok(int d) { return d >= 0 && d < kNumDirections; }

// Target cell of a canonical command, or -1 if it leaves the map.
int target_of(const GameState& s, const Unit& u, const UnitActionCommand& c) {
  int dir = -1;
  switch (c.type) {
    case ActionType::Noop: return -1;
    case ActionType::Move: dir = c.move_dir; break;
    case ActionType::Harvest: dir = c.harvest_dir; break;
    case ActionType::Return: dir = c.return_dir; break;
    case ActionType::Produce: dir = c.produce_dir; break;
    case ActionType::Attack: {
      if (c.attack_pos < 0 || c.attack_pos >= kAttackCells) return -1;
      const int x = u.x + attack_dx(c.attack_pos), y = u.y + attack_dy(c.attack_pos);
      return s.in_bounds(x, y) ? s.cell_of(x, y) : -1;
    }
  }
  if (!dir_ok(dir)) return -1;
  const int x = u.x + kDirDx[dir], y = u.y + kDirDy[dir];
  return s.in_bounds(x, y) ? s.cell_of(x, y) : -1;
}

bool cell_free(const GameState& s, int cell) { return s.occupant[cell] < 0 && s.reserved[cell] == 0; }

// `u` must be actionable; `c` canonical.
bool valid_for_unit(const GameState& s, const Unit& u, const UnitActionCommand& c) {
  const UnitTypeStats& st = s.stats(u);
  if (c.type == ActionType::Noop) return true;
  const int t = target_of(s, u, c);
  if (t < 0) return false;
  switch (c.type) {
    case ActionType::Noop: return true;
    case ActionType::Move: return st.can_move && cell_free(s, t);
    case ActionType::Harvest: {
      if (!st.can_harvest || u.carried != 0) return false;
      const Unit* r = s.unit_at(t);
      return r && r->kind == UnitKind::Resource && r->carried > 0;
    }
    case ActionType::Return: {
      if (!st.can_harvest || u.carried <= 0) return false;
      const Unit* b = s.unit_at(t);
      return b && b->kind == UnitKind::Base && b->owner == u.owner;
    }
    case ActionType::Produce: {
      if (c.produce_kind < 0 || c.produce_kind >= kNumUnitKinds) return false;
      const auto kind = static_cast<UnitKind>(c.produce_kind);
      return st.can_produce(kind) && cell_free(s, t) &&
             s.stockpile[index_of(u.owner)] >= (*s.utt)[kind].cost;
    }
    case ActionType::Attack: {
      if (!st.can_attack || c.attack_pos == kAttackCenter) return false;
      const int dx = attack_dx(c.attack_pos), dy = attack_dy(c.attack_pos);
      if (dx * dx + dy * dy > st.attack_range * st.attack_range) return false;
      const Unit* v = s.unit_at(t);
      return v && v->owner == opponent_of(u.owner);
    }
  }
  return false;
}

int duration_of(const GameState& s, const Unit& u, const UnitActionCommand& c) {
  const UnitTypeStats& st = s.stats(u);
  switch (c.type) {
    case ActionType::Noop: return 1;
    case ActionType::Move: return st.move_time;
    case ActionType::Harvest: return st.harvest_time;
    case ActionType::Return: return st.return_time;
    case ActionType::Produce: return (*s.utt)[static_cast<UnitKind>(c.produce_kind)].produce_time;
    case ActionType::Attack: return st.attack_time;
  }
  return 1;
}

EventKind produce_event(UnitKind produced) {
  switch (produced) {
    case UnitKind::Worker: return EventKind::ProduceWorker;
    case UnitKind::Base:
    case UnitKind::Barracks: return EventKind::ConstructBuilding;
    default: return EventKind::ProduceCombatUnit;
  }
}

// Issues a command already known to be valid. Appends initiation events.
void issue(GameState& s, Unit& u, const UnitActionCommand& c, std::vector<GameEvent>* events) {
  InProgressAction a{c, duration_of(s, u, c), target_of(s, u, c)};
  std::optional<EventKind> ev;
  switch (c.type) {
    case ActionType::Noop: break;
    case ActionType::Move: ++s.reserved[a.target_cell]; break;
    case ActionType::Harvest: ev = EventKind::Harvest; break;
    case ActionType::Return: ev = EventKind::ReturnResource; break;
    case ActionType::Produce: {
      const auto kind = static_cast<UnitKind>(c.produce_kind);
      const int cost = (*s.utt)[kind].cost;
      s.stockpile[index_of(u.owner)] -= cost;
      s.in_production_cost += cost;
      ++s.reserved[a.target_cell];
      ev = produce_event(kind);
      break;
    }
    case ActionType::Attack: ev = EventKind::AttackIssued; break;
  }
  u.busy = a;
  if (ev && events) events->push_back({*ev, u.owner, u.id, s.tick});
}

void release(GameState& s, const Unit& u) {
  if (!u.busy) return;
  const auto& a = *u.busy;
  if (a.command.type == ActionType::Move) {
    --s.reserved[a.target_cell];
  } else if (a.command.type == ActionType::Produce) {
    --s.reserved[a.target_cell];
    const int cost = (*s.utt)[static_cast<UnitKind>(a.command.produce_kind)].cost;
    s.in_production_cost -= cost;
    s.lost_resources += cost;
  }
}

void remove_unit(GameState& s, int id) {
  auto it = std::lower_bound(s.units.begin(), s.units.end(), id,
                             [](const Unit& u, int v) { return u.id < v; });
  release(s, *it);
  if (it->kind != UnitKind::Resource) s.lost_resources += it->carried;
  s.occupant[s.cell_of(it->x, it->y)] = -1;
  s.units.erase(it);
}

void add_unit(GameState& s, Player owner, UnitKind kind, int x, int y, int carried) {
  Unit u;
  u.id = s.next_id++;
  u.owner = owner;
  u.kind = kind;
  u.x = x;
  u.y = y;
  u.hp = (*s.utt)[kind].max_hp;
  u.carried = carried;
  s.occupant[s.cell_of(x, y)] = u.id;
  s.units.push_back(u);
}

void resolve(GameState& s, int id) {
  Unit* u = s.find(id);
  const InProgressAction a = *u->busy;
  u->busy.reset();
  const int t = a.target_cell;
  const Player owner = u->owner;
  switch (a.command.type) {
    case ActionType::Noop: break;
    case ActionType::Move:
      --s.reserved[t];
      if (s.occupant[t] < 0) {
        s.occupant[s.cell_of(u->x, u->y)] = -1;
        u->x = t % s.w;
        u->y = t / s.w;
        s.occupant[t] = u->id;
      }
      break;
    case ActionType::Harvest: {
      Unit* r = s.unit_at(t);
      if (r && r->kind == UnitKind::Resource && r->carried > 0 && u->carried == 0) {
        const int amount = std::min(s.stats(*u).harvest_amount, r->carried);
        r->carried -= amount;
        u->carried += amount;
        if (r->carried == 0) remove_unit(s, r->id);
      }
      break;
    }
    case ActionType::Return: {
      const Unit* b = s.unit_at(t);
      if (b && b->kind == UnitKind::Base && b->owner == owner && u->carried > 0) {
        s.stockpile[index_of(owner)] += u->carried;
        u->carried = 0;
      }
      break;
    }
    case ActionType::Produce: {
      --s.reserved[t];
      const auto kind = static_cast<UnitKind>(a.command.produce_kind);
      const int cost = (*s.utt)[kind].cost;
      s.in_production_cost -= cost;
      if (s.occupant[t] < 0) {
        s.produced_cost += cost;
        add_unit(s, owner, kind, t % s.w, t / s.w, 0);  // invalidates u
      } else {
        s.stockpile[index_of(owner)] += cost;
      }
      break;
    }
    case ActionType::Attack: {
      const int damage = s.stats(*u).attack_damage;
      Unit* v = s.unit_at(t);
      if (v && v->owner == opponent_of(owner)) {
        v->hp -= damage;
        if (v->hp <= 0) remove_unit(s, v->id);
      }
      break;
    }
  }
}

void require_actionable(const GameState& s, const Unit* u, int id) {
  if (!u) throw GameError("unknown unit " + std::to_string(id));
  if (u->owner == Player::None) throw GameError("unit " + std::to_string(id) + " is not player-owned");
  if (u->busy) throw GameError("unit " + std::to_string(id) + " is busy");
  (void)s;
}

constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

struct Fnv {
  uint64_t h = kFnvOffset;
  void add(uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= kFnvPrime;
    }
  }
};

}  // namespace

GameState new_game(const MapSpec& map, std::shared_ptr<const UnitTypeTable> utt, uint64_t seed,
                   int max_ticks) {
  if (!utt) throw ConfigError("new_game: missing unit type table");
  utt->validate();
  if (map.w < 1 || map.h < 1) throw ConfigError("new_game: empty map");
  if (max_ticks < 1) throw ConfigError("new_game: max_ticks must be >= 1");
  GameState s;
  s.w = map.w;
  s.h = map.h;
  s.max_ticks = max_ticks;
  s.rng_state = seed;
  s.utt = std::move(utt);
  s.occupant.assign(s.cells(), -1);
  s.reserved.assign(s.cells(), 0);
  for (int p = 0; p < 2; ++p) {
    if (map.stockpile[p] < 0) throw ConfigError("new_game: negative stockpile");
    s.stockpile[p] = map.stockpile[p];
  }
  for (const auto& pl : map.units) {
    const std::string where = "(" + std::to_string(pl.x) + "," + std::to_string(pl.y) + ")";
    if (!s.in_bounds(pl.x, pl.y)) throw ConfigError("new_game: unit out of bounds at " + where);
    if (s.occupant[s.cell_of(pl.x, pl.y)] >= 0) {
      throw ConfigError("new_game: overlapping units at " + where);
    }
    if ((pl.owner == Player::None) != (pl.kind == UnitKind::Resource)) {
      throw ConfigError("new_game: only resource nodes may be unowned, at " + where);
    }
    if (pl.kind == UnitKind::Resource && pl.amount < 0) {
      throw ConfigError("new_game: negative resource stock at " + where);
    }
    add_unit(s, pl.owner, pl.kind, pl.x, pl.y, pl.kind == UnitKind::Resource ? pl.amount : 0);
  }
  return s;
}

std::vector<UnitActionCommand> valid_unit_actions(const GameState& s, int unit_id) {
  const Unit* u = s.find(unit_id);
  require_actionable(s, u, unit_id);
  const int cell = s.cell_of(u->x, u->y);
  std::vector<UnitActionCommand> out;
  out.push_back(noop_at(cell));
  auto consider = [&](const UnitActionCommand& c) {
    if (valid_for_unit(s, *u, c)) out.push_back(c);
  };
  for (int d = 0; d < kNumDirections; ++d) consider(move_at(cell, d));
  for (int d = 0; d < kNumDirections; ++d) consider(harvest_at(cell, d));
  for (int d = 0; d < kNumDirections; ++d) consider(return_at(cell, d));
  for (int d = 0; d < kNumDirections; ++d) {
    for (int k = 0; k < kNumUnitKinds; ++k) consider(produce_at(cell, d, static_cast<UnitKind>(k)));
  }
  for (int i = 0; i < kAttackCells; ++i) {
    consider({.source = cell, .type = ActionType::Attack, .attack_pos = i});
  }
  return out;
}

bool is_valid_command(const GameState& s, Player player, const UnitActionCommand& cmd) {
  if (cmd.source < 0 || cmd.source >= s.cells()) return false;
  const Unit* u = s.unit_at(cmd.source);
  if (!u || u->owner != player || u->busy) return false;
  return valid_for_unit(s, *u, canonical(cmd));
}

std::vector<GameEvent> simulate_issue_in_place(GameState& s, const UnitActionCommand& cmd) {
  if (cmd.source < 0 || cmd.source >= s.cells()) throw GameError("simulate_issue: source out of range");
  Unit* u = s.unit_at(cmd.source);
  if (!u) throw GameError("simulate_issue: no unit at cell " + std::to_string(cmd.source));
  require_actionable(s, u, u->id);
  const UnitActionCommand c = canonical(cmd);
  if (!valid_for_unit(s, *u, c)) throw GameError("simulate_issue: invalid command");
  std::vector<GameEvent> events;
  issue(s, *u, c, &events);
  return events;
}

GameState simulate_issue(const GameState& s, const UnitActionCommand& cmd) {
  GameState out = s;
  simulate_issue_in_place(out, cmd);
  return out;
}

StepResult step(GameState& s, const PlayerAction& p1, const PlayerAction& p2) {
  StepResult r;
  if (s.outcome) {
    r.terminal = s.outcome;
    return r;
  }

  // Player 2 validates against its own view of the pre-step state so that
  // player 1's reservations made this tick do not influence it.
  std::optional<GameState> p2_view;
  if (!p1.empty() && !p2.empty()) p2_view = s;

  for (const auto& cmd : p1) {
    if (!is_valid_command(s, Player::P1, cmd)) {
      ++r.dropped[0];
      continue;
    }
    issue(s, *s.unit_at(cmd.source), canonical(cmd), &r.events);
    ++r.accepted[0];
  }
  for (const auto& cmd : p2) {
    GameState& view = p2_view ? *p2_view : s;
    if (!is_valid_command(view, Player::P2, cmd)) {
      ++r.dropped[1];
      continue;
    }
    const UnitActionCommand c = canonical(cmd);
    if (p2_view) issue(view, *view.unit_at(cmd.source), c, nullptr);
    issue(s, *s.unit_at(cmd.source), c, &r.events);
    ++r.accepted[1];
  }

  std::vector<int> resolving;
  for (auto& u : s.units) {
    if (u.busy && --u.busy->ticks_remaining <= 0) resolving.push_back(u.id);
  }
  for (int id : resolving) {
    if (s.find(id)) resolve(s, id);
  }

  bool alive[2] = {false, false};
  for (const auto& u : s.units) {
    if (u.owner != Player::None) alive[index_of(u.owner)] = true;
  }
  if (!alive[0] || !alive[1]) {
    s.outcome = !alive[0] && !alive[1] ? Outcome::Draw : (!alive[0] ? Outcome::P2Win : Outcome::P1Win);
  }
  const int event_tick = s.tick;
  ++s.tick;
  if (!s.outcome && s.tick >= s.max_ticks) s.outcome = Outcome::Draw;
  if (s.outcome) {
    r.terminal = s.outcome;
    for (Player p : {Player::P1, Player::P2}) {
      const int sign = outcome_sign(*s.outcome, p);
      const EventKind k = sign > 0 ? EventKind::Win : (sign < 0 ? EventKind::Loss : EventKind::Draw);
      r.events.push_back({k, p, -1, event_tick});
    }
  }
  return r;
}

uint64_t state_hash(const GameState& s) {
  Fnv f;
  f.add(s.w);
  f.add(s.h);
  f.add(s.tick);
  f.add(s.max_ticks);
  f.add(s.rng_state);
  f.add(s.next_id);
  f.add(s.outcome ? static_cast<uint64_t>(*s.outcome) + 1 : 0);
  f.add(s.stockpile[0]);
  f.add(s.stockpile[1]);
  f.add(s.produced_cost);
  f.add(s.in_production_cost);
  f.add(s.lost_resources);
  for (const auto& u : s.units) {
    f.add(u.id);
    f.add(static_cast<uint64_t>(u.owner));
    f.add(static_cast<uint64_t>(u.kind));
    f.add(u.x);
    f.add(u.y);
    f.add(u.hp);
    f.add(u.carried);
    if (u.busy) {
      const auto& c = u.busy->command;
      f.add(1 + static_cast<uint64_t>(c.type));
      f.add(c.move_dir | c.harvest_dir << 4 | c.return_dir << 8 | c.produce_dir << 12 |
            c.produce_kind << 16 | static_cast<uint64_t>(c.attack_pos) << 24);
      f.add(u.busy->ticks_remaining);
      f.add(static_cast<uint64_t>(u.busy->target_cell));
    } else {
      f.add(0);
    }
  }
  return f.h;
}

void check_invariants(const GameState& s) {
  auto fail = [](const std::string& what) { throw GameError("invariant violated: " + what); };
  if (s.tick > s.max_ticks) fail("tick exceeds max_ticks");
  if (s.stockpile[0] < 0 || s.stockpile[1] < 0) fail("negative stockpile");
  std::vector<int> occ(s.cells(), -1);
  std::vector<int> res(s.cells(), 0);
  int prev = -1;
  for (const auto& u : s.units) {
    if (u.id <= prev) fail("units not sorted by id");
    prev = u.id;
    if (!s.in_bounds(u.x, u.y)) fail("unit out of bounds");
    const int c = s.cell_of(u.x, u.y);
    if (occ[c] >= 0) fail("two units share a cell");
    occ[c] = u.id;
    if (u.hp < 1 || u.hp > s.stats(u).max_hp) fail("hp out of range");
    if (u.carried < 0) fail("negative carried resources");
    if ((u.owner == Player::None) != (u.kind == UnitKind::Resource)) fail("ownership mismatch");
    if (u.busy && (u.busy->command.type == ActionType::Move || u.busy->command.type == ActionType::Produce)) {
      ++res[u.busy->target_cell];
    }
  }
  if (occ != s.occupant) fail("occupancy grid out of sync");
  for (int c = 0; c < s.cells(); ++c) {
    if (res[c] != s.reserved[c]) fail("reservation grid out of sync");
  }
}

}  // namespace rts
