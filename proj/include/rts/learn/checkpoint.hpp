#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "rts/learn/network.hpp"

namespace rts::learn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointHeader {
  std::string descriptor;
  uint64_t update = 0;
  uint64_t seed = 0;
};

// Layout (little-endian): "RTSCKPT1", u32 descriptor length, descriptor,
// u64 update, u64 seed, u32 array count, then per array: u32 name length,
// name, u64 element count, float32 data.
void save_checkpoint(const std::string& path, const PolicyValueNet<float>& net, uint64_t update, uint64_t seed);

// Reads the header only.
CheckpointHeader read_checkpoint_header(const std::string& path);

// Parses the descriptor back into a spec.
NetSpec spec_from_descriptor(const std::string& descriptor);

// Loads into a network whose descriptor must match the file.
CheckpointHeader load_checkpoint(const std::string& path, PolicyValueNet<float>& net);

}  // namespace rts::learn
