#include "rts/bots.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace rts {
namespace bots {

namespace {

bool is_biased_type(ActionType t) {
  return t == ActionType::Attack || t == ActionType::Harvest || t == ActionType::Return;
}

std::vector<int> actionable_ids(const GameState& s, Player me) {
  std::vector<int> ids;
  for (const auto& u : s.units) {
    if (u.owner == me && !u.busy) ids.push_back(u.id);
  }
  return ids;
}

// Enemy within attack range of `u`: lowest hp first, then lowest id.
const Unit* target_in_range(const GameState& s, const Unit& u) {
  const auto& st = s.stats(u);
  if (!st.can_attack) return nullptr;
  const Unit* best = nullptr;
  for (const auto& v : s.units) {
    if (v.owner != opponent_of(u.owner)) continue;
    const int dx = v.x - u.x, dy = v.y - u.y;
    if (dx * dx + dy * dy > st.attack_range * st.attack_range) continue;
    if (!best || v.hp < best->hp) best = &v;
  }
  return best;
}

int dir_to_adjacent(const Unit& u, int tx, int ty) {
  for (int d = 0; d < kNumDirections; ++d) {
    if (u.x + kDirDx[d] == tx && u.y + kDirDy[d] == ty) return d;
  }
  return -1;
}

std::vector<uint8_t> cells_adjacent_to(const GameState& s, const std::vector<const Unit*>& targets) {
  std::vector<uint8_t> goal(s.cells(), 0);
  for (const Unit* t : targets) {
    for (int d = 0; d < kNumDirections; ++d) {
      const int x = t->x + kDirDx[d], y = t->y + kDirDy[d];
      if (s.in_bounds(x, y)) goal[s.cell_of(x, y)] = 1;
    }
  }
  return goal;
}

// Attack an enemy in range, otherwise step towards the closest cell from
// which an enemy would be in range. Returns false if nothing was issued.
bool attack_or_approach(ActionBuilder& b, const Unit& u) {
  const GameState& s = b.sim();
  const int cell = s.cell_of(u.x, u.y);
  if (const Unit* v = target_in_range(s, u)) {
    b.add(attack_at(cell, v->x - u.x, v->y - u.y));
    return true;
  }
  const auto& st = s.stats(u);
  if (!st.can_move) return false;
  std::vector<uint8_t> goal(s.cells(), 0);
  bool any = false;
  const int r = st.attack_range;
  for (const auto& v : s.units) {
    if (v.owner != opponent_of(u.owner)) continue;
    any = true;
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (dx * dx + dy * dy > r * r) continue;
        if (s.in_bounds(v.x + dx, v.y + dy)) goal[s.cell_of(v.x + dx, v.y + dy)] = 1;
      }
    }
  }
  if (!any) return false;
  const int d = bfs_first_step(s, cell, goal);
  if (d < 0) return false;
  b.add(move_at(cell, d));
  return true;
}

// One worker shuttling between resources and the closest own base.
bool harvest_duty(ActionBuilder& b, const Unit& u) {
  const GameState& s = b.sim();
  const int cell = s.cell_of(u.x, u.y);
  std::vector<const Unit*> targets;
  if (u.carried > 0) {
    for (const auto& v : s.units) {
      if (v.owner == u.owner && v.kind == UnitKind::Base) targets.push_back(&v);
    }
  } else {
    for (const auto& v : s.units) {
      if (v.kind == UnitKind::Resource && v.carried > 0) targets.push_back(&v);
    }
  }
  if (targets.empty()) return false;
  for (const Unit* t : targets) {
    const int d = dir_to_adjacent(u, t->x, t->y);
    if (d < 0) continue;
    b.add(u.carried > 0 ? return_at(cell, d) : harvest_at(cell, d));
    return true;
  }
  const int d = bfs_first_step(s, cell, cells_adjacent_to(s, targets));
  if (d < 0) return false;
  b.add(move_at(cell, d));
  return true;
}

bool produce_anywhere(ActionBuilder& b, const Unit& u, UnitKind kind) {
  const GameState& s = b.sim();
  const int cell = s.cell_of(u.x, u.y);
  for (int d = 0; d < kNumDirections; ++d) {
    const auto c = produce_at(cell, d, kind);
    if (is_valid_command(s, u.owner, c)) {
      b.add(c);
      return true;
    }
  }
  return false;
}

int lowest_worker_id(const GameState& s, Player me) {
  for (const auto& u : s.units) {
    if (u.owner == me && u.kind == UnitKind::Worker) return u.id;
  }
  return -1;
}

bool producing(const Unit& u, UnitKind kind) {
  return u.busy && u.busy->command.type == ActionType::Produce &&
         u.busy->command.produce_kind == static_cast<int>(kind);
}

}  // namespace

int bfs_first_step(const GameState& s, int from, const std::vector<uint8_t>& goal) {
  if (goal[from]) return -1;
  std::vector<int8_t> first(s.cells(), -1);
  std::vector<uint8_t> seen(s.cells(), 0);
  std::deque<int> queue;
  seen[from] = 1;
  const int fx = from % s.w, fy = from / s.w;
  for (int d = 0; d < kNumDirections; ++d) {
    const int x = fx + kDirDx[d], y = fy + kDirDy[d];
    if (!s.in_bounds(x, y) || !s.is_free(x, y)) continue;
    const int c = s.cell_of(x, y);
    if (goal[c]) return d;
    seen[c] = 1;
    first[c] = static_cast<int8_t>(d);
    queue.push_back(c);
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int cx = c % s.w, cy = c / s.w;
    for (int d = 0; d < kNumDirections; ++d) {
      const int x = cx + kDirDx[d], y = cy + kDirDy[d];
      if (!s.in_bounds(x, y)) continue;
      const int n = s.cell_of(x, y);
      if (seen[n] || !s.is_free(x, y)) continue;
      if (goal[n]) return first[c];
      seen[n] = 1;
      first[n] = first[c];
      queue.push_back(n);
    }
  }
  return -1;
}

PlayerAction Passive::act(const GameState& s, Player me) {
  PlayerAction out;
  for (const auto& u : s.units) {
    if (u.owner == me && !u.busy) out.push_back(noop_at(s.cell_of(u.x, u.y)));
  }
  return out;
}

UnitActionCommand RandomBot::choose(const std::vector<UnitActionCommand>& valid) {
  if (bias_ == 1.0) {
    std::uniform_int_distribution<size_t> pick(0, valid.size() - 1);
    return valid[pick(rng_)];
  }
  std::vector<double> weights;
  weights.reserve(valid.size());
  for (const auto& c : valid) weights.push_back(is_biased_type(c.type) ? bias_ : 1.0);
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  return valid[pick(rng_)];
}

PlayerAction RandomBot::act(const GameState& s, Player me) {
  ActionBuilder b(s);
  for (int id : actionable_ids(s, me)) b.add(choose(valid_unit_actions(b.sim(), id)));
  return b.take();
}

PlayerAction WorkerRush::act(const GameState& s, Player me) {
  ActionBuilder b(s);
  const int harvester = lowest_worker_id(s, me);
  for (int id : actionable_ids(s, me)) {
    const Unit& u = *b.sim().find(id);
    switch (u.kind) {
      case UnitKind::Base: produce_anywhere(b, u, UnitKind::Worker); break;
      case UnitKind::Worker:
        if (id == harvester && harvest_duty(b, u)) break;
        attack_or_approach(b, u);
        break;
      default: attack_or_approach(b, u); break;
    }
  }
  return b.take();
}

PlayerAction LightRush::act(const GameState& s, Player me) {
  ActionBuilder b(s);
  const auto& utt = *s.utt;
  int workers = 0;
  bool barracks = false;
  const Unit* base = nullptr;
  for (const auto& u : s.units) {
    if (u.owner != me) continue;
    if (u.kind == UnitKind::Worker) ++workers;
    if (u.kind == UnitKind::Barracks || producing(u, UnitKind::Barracks)) barracks = true;
    if (producing(u, UnitKind::Worker)) ++workers;
    if (u.kind == UnitKind::Base && !base) base = &u;
  }
  const int harvester = lowest_worker_id(s, me);

  // Barracks site: first free cell next to the base, scanning N, E, S, W.
  int site = -1;
  if (!barracks && base) {
    for (int d = 0; d < kNumDirections && site < 0; ++d) {
      const int x = base->x + kDirDx[d], y = base->y + kDirDy[d];
      if (s.in_bounds(x, y) && s.is_free(x, y)) site = s.cell_of(x, y);
    }
  }
  int builder = -1;
  if (site >= 0 && s.stockpile[index_of(me)] >= utt[UnitKind::Barracks].cost) {
    for (int id : actionable_ids(s, me)) {
      const Unit& u = *s.find(id);
      if (u.kind != UnitKind::Worker) continue;
      if (builder < 0 || (builder == harvester && id != harvester)) builder = id;
    }
  }

  for (int id : actionable_ids(s, me)) {
    const Unit& u = *b.sim().find(id);
    const int cell = b.sim().cell_of(u.x, u.y);
    switch (u.kind) {
      case UnitKind::Base: {
        const int reserve = barracks ? 0 : utt[UnitKind::Barracks].cost;
        if (workers < 2 && b.sim().stockpile[index_of(me)] - reserve >= utt[UnitKind::Worker].cost) {
          produce_anywhere(b, u, UnitKind::Worker);
        }
        break;
      }
      case UnitKind::Barracks: produce_anywhere(b, u, UnitKind::Light); break;
      case UnitKind::Worker: {
        if (id == builder) {
          const int sx = site % s.w, sy = site / s.w;
          const int d = dir_to_adjacent(u, sx, sy);
          const auto c = produce_at(cell, d < 0 ? 0 : d, UnitKind::Barracks);
          if (d >= 0 && is_valid_command(b.sim(), me, c)) {
            b.add(c);
            break;
          }
          std::vector<uint8_t> goal(s.cells(), 0);
          for (int k = 0; k < kNumDirections; ++k) {
            const int x = sx + kDirDx[k], y = sy + kDirDy[k];
            if (s.in_bounds(x, y)) goal[s.cell_of(x, y)] = 1;
          }
          const int step = bfs_first_step(b.sim(), cell, goal);
          if (step >= 0 && b.sim().cell_of(u.x + kDirDx[step], u.y + kDirDy[step]) != site) {
            b.add(move_at(cell, step));
            break;
          }
        }
        if (id == harvester && harvest_duty(b, u)) break;
        attack_or_approach(b, u);
        break;
      }
      default: attack_or_approach(b, u); break;
    }
  }
  return b.take();
}

}  // namespace bots

std::unique_ptr<Agent> make_bot(std::string_view name, uint64_t seed) {
  if (name == "PassiveAI" || name == "passive") return std::make_unique<bots::Passive>();
  if (name == "Random" || name == "random") return std::make_unique<bots::RandomBot>(seed, 1.0, "Random");
  if (name == "RandomBiasedAI" || name == "random_biased") {
    return std::make_unique<bots::RandomBot>(seed, kRandomBiasFactor, "RandomBiasedAI");
  }
  if (name == "WorkerRush" || name == "worker_rush") return std::make_unique<bots::WorkerRush>();
  if (name == "LightRush" || name == "light_rush") return std::make_unique<bots::LightRush>();
  throw ConfigError("unknown bot '" + std::string(name) + "'");
}

const std::vector<std::string>& bot_names() {
  static const std::vector<std::string> names = {"PassiveAI", "Random", "RandomBiasedAI", "WorkerRush",
                                                 "LightRush"};
  return names;
}

}  // namespace rts
