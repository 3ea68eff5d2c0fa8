#pragma once

#include <memory>
#include <random>
#include <string>

#include "rts/action_space.hpp"
#include "rts/bots.hpp"
#include "rts/learn/network.hpp"
#include "rts/learn/policy.hpp"

namespace rts::harness {

using Net = learn::PolicyValueNet<float>;

// View-frame command from a source cell and unit-action components.
UnitActionCommand view_command(int source, const learn::UnitSelection& sel, int cells);

// A trained network playing through the Agent interface. UAS networks are
// queried once per unit on a simulated copy of the state; Gridnet networks
// once per tick. Both see the board from their own seat.
class PolicyAgent final : public Agent {
 public:
  PolicyAgent(std::shared_ptr<const Net> net, bool greedy, uint64_t seed, MaskLevel mask = MaskLevel::Full,
              std::string name = "Agent");

  std::string name() const override { return name_; }
  PlayerAction act(const GameState& s, Player me) override;

  // Commands proposed under the mask that the engine would reject.
  long long invalid() const { return invalid_; }

 private:
  PlayerAction act_uas(const GameState& s, Player me);
  PlayerAction act_gridnet(const GameState& s, Player me);

  std::shared_ptr<const Net> net_;
  bool greedy_;
  std::mt19937_64 rng_;
  MaskLevel mask_;
  std::string name_;
  Net::Cache cache_;
  long long invalid_ = 0;
};

// Loads a checkpoint into a new network.
std::shared_ptr<const Net> load_policy(const std::string& checkpoint_path);

// A scripted bot by name, or "agent" for the given policy.
std::unique_ptr<Agent> make_player(const std::string& name, uint64_t seed, const std::shared_ptr<const Net>& policy,
                                   bool greedy, MaskLevel mask = MaskLevel::Full);

}  // namespace rts::harness
