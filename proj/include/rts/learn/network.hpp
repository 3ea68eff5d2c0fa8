#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rts/learn/kernels.hpp"

namespace rts::learn {

enum class Head { Uas, Gridnet };
Head head_from_name(std::string_view name);
std::string_view name_of(Head head);

struct NetSpec {
  int height = 8;
  int width = 8;
  Head head = Head::Uas;
  int hidden1 = 128;
  int hidden2 = 128;

  int cells() const { return height * width; }
  int input_size() const;
  // h*w + 78 for UAS, h*w*78 for Gridnet.
  int policy_size() const;
  std::string descriptor() const;
};

struct ParamInfo {
  std::string name;
  size_t offset;
  int rows;
  int cols;
  size_t size() const { return static_cast<size_t>(rows) * cols; }
};

// flatten(h*w*27) -> dense -> ReLU -> dense -> ReLU -> {policy logits, value}.
// The first layer consumes binary planes as sparse index lists.
template <class R>
class PolicyValueNet {
 public:
  struct Cache {
    int batch = 0;
    SparseRows x;
    std::vector<R> z1, a1, z2, a2;
    std::vector<R> logits;  // batch x policy_size
    std::vector<R> value;   // batch
  };

  explicit PolicyValueNet(NetSpec spec);

  const NetSpec& spec() const { return spec_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  std::vector<R>& params() { return params_; }
  const std::vector<R>& params() const { return params_; }
  const ParamInfo& info(std::string_view name) const;
  std::span<R> param(std::string_view name);
  std::span<const R> param(std::string_view name) const;

  // Orthogonal weights (gains sqrt(2), sqrt(2), 0.01, 1), zero biases.
  void init_orthogonal(uint64_t seed);

  // obs holds batch rows of input_size() binary entries.
  void forward(std::span<const uint8_t> obs, int batch, Cache& c, Exec ex = Exec::Serial) const;
  // Accumulates into grad (same layout as params).
  void backward(const Cache& c, std::span<const R> dlogits, std::span<const R> dvalue, std::span<R> grad,
                Exec ex = Exec::Serial) const;

  template <class S>
  PolicyValueNet<S> cast() const {
    PolicyValueNet<S> out(spec_);
    for (size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<S>(params_[i]);
    return out;
  }

 private:
  NetSpec spec_;
  std::vector<ParamInfo> layout_;
  std::vector<R> params_;
};

}  // namespace rts::learn
