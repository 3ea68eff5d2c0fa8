#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rts/command.hpp"
#include "rts/game_state.hpp"
#include "rts/map.hpp"

namespace rts {

enum class EventKind : uint8_t {
  Harvest,
  ReturnResource,
  ProduceWorker,
  ConstructBuilding,
  ProduceCombatUnit,
  AttackIssued,
  Win,
  Draw,
  Loss,
};
constexpr int kNumEventKinds = 9;

// Emitted once, at the tick an action is initiated (terminal events at the
// final tick). unit_id is -1 for terminal events.
struct GameEvent {
  EventKind kind;
  Player player;
  int unit_id;
  int tick;

  friend bool operator==(const GameEvent&, const GameEvent&) = default;
};

struct StepResult {
  std::vector<GameEvent> events;
  std::optional<Outcome> terminal;
  std::array<int, 2> dropped{};  // invalid commands per player
  std::array<int, 2> accepted{};
};

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GameState new_game(const MapSpec& map, std::shared_ptr<const UnitTypeTable> utt, uint64_t seed,
                   int max_ticks);

// True when `unit` belongs to a player and has no action in progress.
inline bool is_actionable(const Unit& u) { return u.owner != Player::None && !u.busy; }

// Brute-force enumeration of every legal canonical command for the unit.
// Throws GameError if the unit does not exist, is a resource node, or is busy.
std::vector<UnitActionCommand> valid_unit_actions(const GameState& s, int unit_id);

// Fast check used by step(); agrees with valid_unit_actions.
bool is_valid_command(const GameState& s, Player player, const UnitActionCommand& cmd);

// Advances one tick. Each player's commands are validated in order against
// the pre-step state plus that player's own earlier commands this tick;
// invalid ones are dropped and counted. Stepping a finished game is a no-op.
StepResult step(GameState& s, const PlayerAction& p1, const PlayerAction& p2);

// Marks the commanded unit busy, reserves target cell and production cost,
// exactly as step() would at issuance. Returns the initiation events.
// Throws GameError if the command is not valid for the unit's owner.
std::vector<GameEvent> simulate_issue_in_place(GameState& s, const UnitActionCommand& cmd);
GameState simulate_issue(const GameState& s, const UnitActionCommand& cmd);

uint64_t state_hash(const GameState& s);

// Throws GameError describing the first broken invariant.
void check_invariants(const GameState& s);

}  // namespace rts
