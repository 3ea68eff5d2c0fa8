#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rts/action_space.hpp"
#include "rts/bots.hpp"
#include "rts/engine.hpp"
#include "rts/observation.hpp"
#include "rts/rewards.hpp"

namespace rts {

// The decision maker chose something outside the mask it was given.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EnvConfig {
  MapSpec map;
  std::shared_ptr<const UnitTypeTable> utt = default_unit_types();
  int max_ticks = 2000;
  MaskLevel mask = MaskLevel::Full;
  RewardWeights weights;
  Player agent_seat = Player::P1;
};

struct EnvInfo {
  std::optional<int> sparse_outcome;  // set only when the episode ended
  int dropped = 0;                    // agent commands rejected by the engine
  int tick = 0;
};

struct EpisodeSummary {
  Reward shaped_return;
  int sparse_outcome = 0;
  int ticks = 0;
};

// Unit Action Simulation: the agent commands one unit per decision; each
// command is issued on a simulated copy of the state so later masks reflect
// earlier commitments. The real game advances once every actionable unit
// has a command.
class UasEnv {
 public:
  UasEnv(EnvConfig cfg, std::unique_ptr<Agent> opponent, uint64_t seed);

  void reset();

  const EnvConfig& config() const { return cfg_; }
  const GameState& state() const { return state_; }
  const GameState& simulated() const { return sim_; }
  Player seat() const { return cfg_.agent_seat; }
  const Perspective& perspective() const { return view_; }

  // Current decision point, in the agent's view frame.
  std::span<const uint8_t> observation() const { return obs_; }
  std::span<const uint8_t> source_mask() const { return source_mask_; }
  // Mask for the unit at `view_cell`; all-true under MaskLevel::None.
  UnitMask unit_mask(int view_cell) const;

  struct Transition {
    Reward reward;
    bool done = false;
    bool round_complete = false;
    EnvInfo info;
    std::optional<EpisodeSummary> episode;
  };

  // One unit decision. When it completes the round the real game is stepped,
  // then advanced (opponent only) until the agent can act again or the
  // episode ends; a finished episode resets automatically.
  Transition decide(const UnitActionCommand& view_cmd);

  using SourceFn = std::function<int(const ObservationTensor&, std::span<const uint8_t>)>;
  using ActionFn =
      std::function<UnitActionCommand(const ObservationTensor&, const UnitMask&, int view_source)>;

  struct TickResult {
    Reward reward;                                 // collective, from the real step
    std::vector<std::pair<int, Reward>> per_unit;  // real-step events joined on unit id
    std::vector<Reward> per_decision;              // rewards seen at simulation time
    PlayerAction issued;                           // real frame
    int source_calls = 0;
    int action_calls = 0;
    bool done = false;
    EnvInfo info;
  };

  // Full decision round through callbacks, then exactly one engine step.
  TickResult uas_episode_step(const SourceFn& choose_source, const ActionFn& choose_action);

 private:
  void refresh();
  void check_in_mask(const UnitActionCommand& view_cmd) const;
  StepResult step_real(const PlayerAction& agent_cmds);
  void finish_episode(Outcome outcome, Transition& t);

  EnvConfig cfg_;
  std::unique_ptr<Agent> opponent_;
  Perspective view_;
  GameState state_;
  GameState sim_;
  PlayerAction pending_;
  Reward round_sim_reward_;
  std::map<int, Reward> round_by_unit_;
  Reward episode_return_;
  std::vector<uint8_t> obs_;
  std::vector<uint8_t> source_mask_;
  uint64_t seed_;
};

// Gridnet: one 7-component unit action per map cell, all issued in a single
// engine step. Supports one agent seat against a bot, or two agent seats
// sharing one game (selfplay, second seat in the rotated view).
class GridnetEnv {
 public:
  // `opponent` == nullptr makes both seats agent-controlled.
  GridnetEnv(EnvConfig cfg, std::unique_ptr<Agent> opponent, uint64_t seed);

  void reset();

  int num_seats() const { return opponent_ ? 1 : 2; }
  Player seat_player(int seat) const;
  const GameState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }

  std::span<const uint8_t> observation(int seat = 0) const { return obs_[seat]; }
  // (h*w) x 79, view frame of the seat.
  std::span<const uint8_t> grid_mask(int seat = 0) const { return mask_[seat]; }

  struct SeatStep {
    Reward reward;
    bool done = false;
    int executed = 0;  // accepted non-NOOP commands
    EnvInfo info;
    std::optional<EpisodeSummary> episode;
  };

  // actions[seat] holds (h*w) x 7 component values in the seat's view frame.
  std::vector<SeatStep> step(std::span<const std::span<const int>> actions);
  SeatStep step(std::span<const int> actions);

 private:
  void refresh();
  PlayerAction commands_for(int seat, std::span<const int> actions) const;

  EnvConfig cfg_;
  std::unique_ptr<Agent> opponent_;
  GameState state_;
  std::vector<std::vector<uint8_t>> obs_;
  std::vector<std::vector<uint8_t>> mask_;
  std::array<Reward, 2> episode_return_{};
  uint64_t seed_;
};

enum class OpponentKind : uint8_t { Passive, Random, RandomBiased, WorkerRush, LightRush, Self };
OpponentKind opponent_kind_from_name(std::string_view name);
std::string_view name_of(OpponentKind k);
std::unique_ptr<Agent> make_opponent(OpponentKind k, uint64_t seed);

struct OpponentSlotPlan {
  std::vector<OpponentKind> slots;

  // Largest-remainder apportionment of `n` slots to the given fractions;
  // SELF slots are listed last. Throws ConfigError on an odd SELF count.
  static OpponentSlotPlan from_mix(int n, const std::vector<std::pair<OpponentKind, double>>& mix);
  static OpponentSlotPlan parse(int n, std::string_view spec);  // "LightRush:0.75,Random:0.25"
  void validate() const;
  int self_slots() const;
};

// Fixed-size batch of UAS environments stepped together.
class UasVecEnv {
 public:
  UasVecEnv(const EnvConfig& cfg, const OpponentSlotPlan& plan, uint64_t seed);

  int num_slots() const { return static_cast<int>(envs_.size()); }
  UasEnv& slot(int i) { return *envs_[i]; }
  const UasEnv& slot(int i) const { return *envs_[i]; }

  // One decision per slot; slots advance in parallel.
  std::vector<UasEnv::Transition> step(std::span<const UnitActionCommand> decisions);

 private:
  std::vector<std::unique_ptr<UasEnv>> envs_;
};

// Fixed-size batch of Gridnet slots. Pairs of SELF slots share one game:
// the first of the pair plays seat P1, the second P2.
class GridnetVecEnv {
 public:
  GridnetVecEnv(const EnvConfig& cfg, const OpponentSlotPlan& plan, uint64_t seed);

  int num_slots() const { return static_cast<int>(slot_map_.size()); }
  int num_games() const { return static_cast<int>(games_.size()); }
  std::span<const uint8_t> observation(int slot) const;
  std::span<const uint8_t> grid_mask(int slot) const;
  const GridnetEnv& game_of(int slot) const { return *games_[slot_map_[slot].first]; }

  // actions[slot] is (h*w) x 7 values; throws ConfigError on a count mismatch.
  std::vector<GridnetEnv::SeatStep> step(std::span<const std::span<const int>> actions);

 private:
  std::vector<std::unique_ptr<GridnetEnv>> games_;
  std::vector<std::pair<int, int>> slot_map_;  // slot -> (game, seat)
};

}  // namespace rts
