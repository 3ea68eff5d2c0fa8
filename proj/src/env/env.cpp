#include "rts/env/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

namespace rts {

namespace {

bool has_actionable(const GameState& s, Player p) {
  return std::any_of(s.units.begin(), s.units.end(),
                     [p](const Unit& u) { return u.owner == p && !u.busy; });
}

Reward terminal_reward(const StepResult& r, Player p, const RewardWeights& w) {
  Reward out;
  for (const auto& e : r.events) {
    if (e.unit_id < 0 && e.player == p) out += w.weight(e.kind);
  }
  return out;
}

void require_in_mask(std::span<const uint8_t> unit_mask, const UnitActionCommand& c) {
  const int type = static_cast<int>(c.type);
  if (type < 0 || type >= kComponentWidths[kTypeComponent] || !unit_mask[type]) {
    throw ProtocolError("action type outside the unit mask");
  }
  for (int comp : consumed_components(c.type)) {
    const int v = component_value(c, comp);
    if (v < 0 || v >= kComponentWidths[comp] || !unit_mask[kComponentOffsets[comp] + v]) {
      throw ProtocolError("action parameter outside the unit mask");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- UAS

UasEnv::UasEnv(EnvConfig cfg, std::unique_ptr<Agent> opponent, uint64_t seed)
    : cfg_(std::move(cfg)),
      opponent_(std::move(opponent)),
      view_(cfg_.map.w, cfg_.map.h, cfg_.agent_seat),
      seed_(seed) {
  if (!opponent_) throw ConfigError("UAS environments need a scripted opponent");
  if (cfg_.agent_seat == Player::None) throw ConfigError("agent seat must be P1 or P2");
  reset();
}

void UasEnv::reset() {
  state_ = new_game(cfg_.map, cfg_.utt, seed_, cfg_.max_ticks);
  while (!state_.finished() && !has_actionable(state_, seat())) step_real({});
  if (state_.finished()) throw GameError("episode ended before the agent could act");
  sim_ = state_;
  pending_.clear();
  round_sim_reward_ = {};
  episode_return_ = {};
  refresh();
}

void UasEnv::refresh() {
  obs_.resize(static_cast<size_t>(sim_.cells()) * kNumPlanes);
  encode_observation_into(sim_, seat(), obs_);
  source_mask_.resize(sim_.cells());
  if (cfg_.mask == MaskLevel::None) {
    std::fill(source_mask_.begin(), source_mask_.end(), 1);
  } else {
    source_unit_mask_into(sim_, seat(), source_mask_);
  }
}

UnitMask UasEnv::unit_mask(int view_cell) const {
  if (view_cell < 0 || view_cell >= sim_.cells()) throw ProtocolError("source cell out of range");
  if (cfg_.mask == MaskLevel::None) {
    UnitMask m;
    m.fill(1);
    return m;
  }
  const Unit* u = sim_.unit_at(view_.cell(view_cell));
  if (!u || u->owner != seat() || u->busy) throw ProtocolError("source cell holds no actionable unit");
  return unit_action_mask(sim_, u->id, cfg_.mask);
}

void UasEnv::check_in_mask(const UnitActionCommand& view_cmd) const {
  if (view_cmd.source < 0 || view_cmd.source >= sim_.cells() || !source_mask_[view_cmd.source]) {
    throw ProtocolError("source outside the source mask");
  }
  const UnitMask m = unit_mask(view_cmd.source);
  require_in_mask(m, view_cmd);
}

StepResult UasEnv::step_real(const PlayerAction& agent_cmds) {
  const Player other = opponent_of(seat());
  const PlayerAction opp = opponent_->act(state_, other);
  return seat() == Player::P1 ? step(state_, agent_cmds, opp) : step(state_, opp, agent_cmds);
}

void UasEnv::finish_episode(Outcome outcome, Transition& t) {
  t.done = true;
  t.info.sparse_outcome = sparse_reward(outcome, seat());
  t.episode = EpisodeSummary{episode_return_, *t.info.sparse_outcome, state_.tick};
  reset();
}

UasEnv::Transition UasEnv::decide(const UnitActionCommand& view_cmd) {
  check_in_mask(view_cmd);
  Transition t;
  const UnitActionCommand real = canonical(view_.command(view_cmd));
  const bool ok = is_valid_command(sim_, seat(), real);
  if (ok) {
    const int unit_id = sim_.unit_at(real.source)->id;
    const auto events = simulate_issue_in_place(sim_, real);
    t.reward = shape(events, seat(), cfg_.weights);
    round_sim_reward_ += t.reward;
    round_by_unit_[unit_id] += t.reward;
    pending_.push_back(real);
  } else {
    t.info.dropped = 1;
  }

  if (ok && has_actionable(sim_, seat())) {
    t.info.tick = state_.tick;
    episode_return_ += t.reward;
    refresh();
    return t;
  }

  t.round_complete = true;
  StepResult r = step_real(pending_);
  t.info.dropped += r.dropped[index_of(seat())];

  // The rewards handed out during simulation must match the real step's
  // events joined on the initiating unit.
  std::map<int, Reward> joined;
  for (const auto& [id, rw] : shape_by_unit(r.events, seat(), cfg_.weights)) {
    if (id >= 0) joined[id] += rw;
  }
  std::erase_if(joined, [](const auto& kv) { return kv.second == Reward(); });
  std::erase_if(round_by_unit_, [](const auto& kv) { return kv.second == Reward(); });
  if (joined != round_by_unit_) throw std::logic_error("simulated rewards diverged from the engine step");

  t.reward += terminal_reward(r, seat(), cfg_.weights);
  pending_.clear();
  round_sim_reward_ = {};
  round_by_unit_.clear();
  while (!state_.finished() && !has_actionable(state_, seat())) {
    r = step_real({});
    t.reward += terminal_reward(r, seat(), cfg_.weights);
  }
  t.info.tick = state_.tick;
  episode_return_ += t.reward;
  if (state_.finished()) {
    finish_episode(*state_.outcome, t);
    return t;
  }
  sim_ = state_;
  refresh();
  return t;
}

UasEnv::TickResult UasEnv::uas_episode_step(const SourceFn& choose_source, const ActionFn& choose_action) {
  if (!pending_.empty()) throw std::logic_error("uas_episode_step called inside a decision round");
  TickResult out;
  std::vector<int> decided;
  ObservationTensor obs{sim_.h, sim_.w, {}};
  while (has_actionable(sim_, seat())) {
    obs.data = obs_;
    const int src = choose_source(obs, source_mask_);
    ++out.source_calls;
    if (src < 0 || src >= sim_.cells() || !source_mask_[src]) throw ProtocolError("source outside the source mask");
    const UnitMask um = unit_mask(src);
    UnitActionCommand c = choose_action(obs, um, src);
    ++out.action_calls;
    c.source = src;
    require_in_mask(um, c);
    const UnitActionCommand real = canonical(view_.command(c));
    if (!is_valid_command(sim_, seat(), real)) {
      ++out.info.dropped;
      break;
    }
    decided.push_back(sim_.unit_at(real.source)->id);
    simulate_issue_in_place(sim_, real);
    pending_.push_back(real);
    refresh();
  }

  const StepResult r = step_real(pending_);
  out.issued = std::move(pending_);
  pending_.clear();
  out.reward = shape(r.events, seat(), cfg_.weights);
  out.per_unit = shape_by_unit(r.events, seat(), cfg_.weights);
  for (int id : decided) {
    Reward sum;
    for (const auto& [uid, rw] : out.per_unit) {
      if (uid == id) sum += rw;
    }
    out.per_decision.push_back(sum);
  }
  out.info.dropped += r.dropped[index_of(seat())];
  out.info.tick = state_.tick;
  if (state_.finished()) {
    out.done = true;
    out.info.sparse_outcome = sparse_reward(*state_.outcome, seat());
    reset();
  } else {
    sim_ = state_;
    refresh();
  }
  return out;
}

// ---------------------------------------------------------------- Gridnet

GridnetEnv::GridnetEnv(EnvConfig cfg, std::unique_ptr<Agent> opponent, uint64_t seed)
    : cfg_(std::move(cfg)), opponent_(std::move(opponent)), seed_(seed) {
  if (opponent_ && cfg_.agent_seat == Player::None) throw ConfigError("agent seat must be P1 or P2");
  obs_.resize(num_seats());
  mask_.resize(num_seats());
  reset();
}

Player GridnetEnv::seat_player(int seat) const {
  if (opponent_) return cfg_.agent_seat;
  return seat == 0 ? Player::P1 : Player::P2;
}

void GridnetEnv::reset() {
  state_ = new_game(cfg_.map, cfg_.utt, seed_, cfg_.max_ticks);
  episode_return_ = {};
  refresh();
}

void GridnetEnv::refresh() {
  for (int seat = 0; seat < num_seats(); ++seat) {
    const Player p = seat_player(seat);
    obs_[seat].resize(static_cast<size_t>(state_.cells()) * kNumPlanes);
    encode_observation_into(state_, p, obs_[seat]);
    mask_[seat] = gridnet_mask(state_, p, cfg_.mask);
  }
}

PlayerAction GridnetEnv::commands_for(int seat, std::span<const int> actions) const {
  const int cells = state_.cells();
  if (actions.size() != static_cast<size_t>(cells) * kNumUnitComponents) {
    throw ConfigError("gridnet action has " + std::to_string(actions.size()) + " entries, expected " +
                      std::to_string(cells * kNumUnitComponents));
  }
  const Perspective view(state_.w, state_.h, seat_player(seat));
  PlayerAction out;
  for (int c = 0; c < cells; ++c) {
    const auto row = std::span<const uint8_t>(mask_[seat]).subspan(static_cast<size_t>(c) * kGridMaskWidth,
                                                                   kGridMaskWidth);
    if (!row[0]) continue;
    const int type = actions[static_cast<size_t>(c) * kNumUnitComponents];
    if (type < 0 || type >= kComponentWidths[kTypeComponent]) throw ProtocolError("action type out of range");
    UnitActionCommand cmd{.source = c, .type = static_cast<ActionType>(type)};
    for (int comp = 1; comp < kNumUnitComponents; ++comp) {
      set_component(cmd, comp, actions[static_cast<size_t>(c) * kNumUnitComponents + comp]);
    }
    require_in_mask(row.subspan(1), cmd);
    if (cmd.type == ActionType::Noop) continue;
    out.push_back(canonical(view.command(cmd)));
  }
  return out;
}

std::vector<GridnetEnv::SeatStep> GridnetEnv::step(std::span<const std::span<const int>> actions) {
  if (static_cast<int>(actions.size()) != num_seats()) throw ConfigError("one action grid per seat expected");
  std::array<PlayerAction, 2> cmds;
  for (int seat = 0; seat < num_seats(); ++seat) {
    cmds[index_of(seat_player(seat))] = commands_for(seat, actions[seat]);
  }
  if (opponent_) {
    const Player other = opponent_of(cfg_.agent_seat);
    cmds[index_of(other)] = opponent_->act(state_, other);
  }
  const StepResult r = rts::step(state_, cmds[0], cmds[1]);

  std::vector<SeatStep> out(num_seats());
  for (int seat = 0; seat < num_seats(); ++seat) {
    const Player p = seat_player(seat);
    SeatStep& s = out[seat];
    s.reward = shape(r.events, p, cfg_.weights);
    s.executed = r.accepted[index_of(p)];
    s.info.dropped = r.dropped[index_of(p)];
    s.info.tick = state_.tick;
    episode_return_[seat] += s.reward;
    if (state_.finished()) {
      s.done = true;
      s.info.sparse_outcome = sparse_reward(*state_.outcome, p);
      s.episode = EpisodeSummary{episode_return_[seat], *s.info.sparse_outcome, state_.tick};
    }
  }
  if (state_.finished()) {
    reset();
  } else {
    refresh();
  }
  return out;
}

GridnetEnv::SeatStep GridnetEnv::step(std::span<const int> actions) {
  const std::array<std::span<const int>, 1> one{actions};
  return step(std::span<const std::span<const int>>(one)).front();
}

// ---------------------------------------------------------------- opponents

OpponentKind opponent_kind_from_name(std::string_view name) {
  if (name == "PassiveAI" || name == "passive") return OpponentKind::Passive;
  if (name == "Random" || name == "random") return OpponentKind::Random;
  if (name == "RandomBiasedAI" || name == "random_biased") return OpponentKind::RandomBiased;
  if (name == "WorkerRush" || name == "worker_rush") return OpponentKind::WorkerRush;
  if (name == "LightRush" || name == "light_rush") return OpponentKind::LightRush;
  if (name == "SELF" || name == "self") return OpponentKind::Self;
  throw ConfigError("unknown opponent '" + std::string(name) + "'");
}

std::string_view name_of(OpponentKind k) {
  switch (k) {
    case OpponentKind::Passive: return "PassiveAI";
    case OpponentKind::Random: return "Random";
    case OpponentKind::RandomBiased: return "RandomBiasedAI";
    case OpponentKind::WorkerRush: return "WorkerRush";
    case OpponentKind::LightRush: return "LightRush";
    case OpponentKind::Self: return "SELF";
  }
  return "?";
}

std::unique_ptr<Agent> make_opponent(OpponentKind k, uint64_t seed) {
  if (k == OpponentKind::Self) throw ConfigError("SELF is not a scripted opponent");
  return make_bot(name_of(k), seed);
}

OpponentSlotPlan OpponentSlotPlan::from_mix(int n, const std::vector<std::pair<OpponentKind, double>>& mix) {
  if (n <= 0) throw ConfigError("slot count must be positive");
  if (mix.empty()) throw ConfigError("opponent mix is empty");
  double total = 0.0;
  for (const auto& [k, f] : mix) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw ConfigError("opponent fraction must be non-negative");
    total += f;
  }
  if (total <= 0.0) throw ConfigError("opponent fractions sum to zero");

  std::vector<int> count(mix.size());
  std::vector<double> rest(mix.size());
  int assigned = 0;
  for (size_t i = 0; i < mix.size(); ++i) {
    const double exact = n * mix[i].second / total;
    count[i] = static_cast<int>(std::floor(exact));
    rest[i] = exact - count[i];
    assigned += count[i];
  }
  std::vector<size_t> order(mix.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rest[a] > rest[b]; });
  for (size_t i = 0; assigned < n; ++i, ++assigned) ++count[order[i % order.size()]];

  OpponentSlotPlan plan;
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t i = 0; i < mix.size(); ++i) {
      if ((mix[i].first == OpponentKind::Self) != (pass == 1)) continue;
      plan.slots.insert(plan.slots.end(), count[i], mix[i].first);
    }
  }
  plan.validate();
  return plan;
}

OpponentSlotPlan OpponentSlotPlan::parse(int n, std::string_view spec) {
  std::vector<std::pair<OpponentKind, double>> mix;
  std::stringstream ss{std::string(spec)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    double frac = 1.0;
    if (colon != std::string::npos) {
      try {
        frac = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad opponent fraction in '" + item + "'");
      }
    }
    mix.emplace_back(opponent_kind_from_name(item.substr(0, colon)), frac);
  }
  return from_mix(n, mix);
}

int OpponentSlotPlan::self_slots() const {
  return static_cast<int>(std::count(slots.begin(), slots.end(), OpponentKind::Self));
}

void OpponentSlotPlan::validate() const {
  if (slots.empty()) throw ConfigError("slot plan is empty");
  if (self_slots() % 2 != 0) throw ConfigError("SELF slots must come in pairs");
}

// ---------------------------------------------------------------- vectorized runners

UasVecEnv::UasVecEnv(const EnvConfig& cfg, const OpponentSlotPlan& plan, uint64_t seed) {
  plan.validate();
  if (plan.self_slots() > 0) throw ConfigError("selfplay is only supported with the gridnet protocol");
  for (size_t i = 0; i < plan.slots.size(); ++i) {
    envs_.push_back(std::make_unique<UasEnv>(cfg, make_opponent(plan.slots[i], mix_seed(seed, 2 * i + 1)),
                                             mix_seed(seed, 2 * i)));
  }
}

std::vector<UasEnv::Transition> UasVecEnv::step(std::span<const UnitActionCommand> decisions) {
  if (decisions.size() != envs_.size()) throw ConfigError("decision count does not match slot count");
  std::vector<UasEnv::Transition> out(envs_.size());
  const int n = num_slots();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) out[i] = envs_[i]->decide(decisions[i]);
  return out;
}

GridnetVecEnv::GridnetVecEnv(const EnvConfig& cfg, const OpponentSlotPlan& plan, uint64_t seed) {
  plan.validate();
  bool pending_self = false;
  for (size_t i = 0; i < plan.slots.size(); ++i) {
    const OpponentKind k = plan.slots[i];
    if (k == OpponentKind::Self) {
      if (pending_self) {
        slot_map_.emplace_back(num_games() - 1, 1);
        pending_self = false;
        continue;
      }
      games_.push_back(std::make_unique<GridnetEnv>(cfg, nullptr, mix_seed(seed, 2 * i)));
      slot_map_.emplace_back(num_games() - 1, 0);
      pending_self = true;
      continue;
    }
    games_.push_back(
        std::make_unique<GridnetEnv>(cfg, make_opponent(k, mix_seed(seed, 2 * i + 1)), mix_seed(seed, 2 * i)));
    slot_map_.emplace_back(num_games() - 1, 0);
  }
}

std::span<const uint8_t> GridnetVecEnv::observation(int slot) const {
  const auto [g, seat] = slot_map_[slot];
  return games_[g]->observation(seat);
}

std::span<const uint8_t> GridnetVecEnv::grid_mask(int slot) const {
  const auto [g, seat] = slot_map_[slot];
  return games_[g]->grid_mask(seat);
}

std::vector<GridnetEnv::SeatStep> GridnetVecEnv::step(std::span<const std::span<const int>> actions) {
  if (actions.size() != slot_map_.size()) throw ConfigError("action count does not match slot count");
  std::vector<std::vector<std::span<const int>>> per_game(games_.size());
  for (size_t s = 0; s < slot_map_.size(); ++s) {
    auto& v = per_game[slot_map_[s].first];
    v.resize(std::max<size_t>(v.size(), slot_map_[s].second + 1));
    v[slot_map_[s].second] = actions[s];
  }
  std::vector<std::vector<GridnetEnv::SeatStep>> results(games_.size());
  const int n = num_games();
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < n; ++g) results[g] = games_[g]->step(per_game[g]);
  std::vector<GridnetEnv::SeatStep> out(slot_map_.size());
  for (size_t s = 0; s < slot_map_.size(); ++s) out[s] = results[slot_map_[s].first][slot_map_[s].second];
  return out;
}

}  // namespace rts
