#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rts/engine.hpp"

namespace rts {

// Anything that can produce a player action from a full game state: scripted
// bots and trained agents alike.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual PlayerAction act(const GameState& s, Player me) = 0;
};

// Builds a player action command by command, issuing each on a private copy
// of the state so later commands see earlier reservations.
class ActionBuilder {
 public:
  explicit ActionBuilder(const GameState& s) : sim_(s) {}

  const GameState& sim() const { return sim_; }
  void add(const UnitActionCommand& c) {
    simulate_issue_in_place(sim_, c);
    out_.push_back(c);
  }
  PlayerAction take() { return std::move(out_); }

 private:
  GameState sim_;
  PlayerAction out_;
};

namespace bots {

class Passive final : public Agent {
 public:
  std::string name() const override { return "PassiveAI"; }
  PlayerAction act(const GameState& s, Player me) override;
};

// Uniform over each unit's valid commands; biased variant weights attack,
// harvest and return commands `bias` times more than the rest.
class RandomBot final : public Agent {
 public:
  RandomBot(uint64_t seed, double bias, std::string name)
      : rng_(seed), bias_(bias), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  PlayerAction act(const GameState& s, Player me) override;

  // Picks one command from `valid` using this bot's weighting.
  UnitActionCommand choose(const std::vector<UnitActionCommand>& valid);

 private:
  std::mt19937_64 rng_;
  double bias_;
  std::string name_;
};

class WorkerRush final : public Agent {
 public:
  std::string name() const override { return "WorkerRush"; }
  PlayerAction act(const GameState& s, Player me) override;
};

class LightRush final : public Agent {
 public:
  std::string name() const override { return "LightRush"; }
  PlayerAction act(const GameState& s, Player me) override;
};

// First step (direction) of a shortest path over free cells from `from` to
// any cell with goal[c] != 0. Returns -1 when unreachable or already there.
int bfs_first_step(const GameState& s, int from, const std::vector<uint8_t>& goal);

}  // namespace bots

constexpr double kRandomBiasFactor = 5.0;

// Names: PassiveAI, Random, RandomBiasedAI, WorkerRush, LightRush.
std::unique_ptr<Agent> make_bot(std::string_view name, uint64_t seed);
const std::vector<std::string>& bot_names();

}  // namespace rts
