#include "rts/learn/network.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rts/action_space.hpp"
#include "rts/observation.hpp"
#include "rts/types.hpp"

namespace rts::learn {

Head head_from_name(std::string_view name) {
  if (name == "uas") return Head::Uas;
  if (name == "gridnet") return Head::Gridnet;
  throw ConfigError("unknown head: " + std::string(name));
}

std::string_view name_of(Head head) { return head == Head::Uas ? "uas" : "gridnet"; }

int NetSpec::input_size() const { return cells() * kNumPlanes; }

int NetSpec::policy_size() const {
  return head == Head::Uas ? cells() + kUnitMaskWidth : cells() * kUnitMaskWidth;
}

std::string NetSpec::descriptor() const {
  return "mlp map=" + std::to_string(height) + "x" + std::to_string(width) + " head=" + std::string(name_of(head)) +
         " in=" + std::to_string(input_size()) + " hidden=" + std::to_string(hidden1) + "," +
         std::to_string(hidden2) + " pi=" + std::to_string(policy_size()) + " v=1";
}

template <class R>
PolicyValueNet<R>::PolicyValueNet(NetSpec spec) : spec_(spec) {
  if (spec.height <= 0 || spec.width <= 0 || spec.hidden1 <= 0 || spec.hidden2 <= 0) {
    throw ConfigError("network: non-positive dimension");
  }
  size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    layout_.push_back({std::move(name), offset, rows, cols});
    offset += static_cast<size_t>(rows) * cols;
  };
  add("enc0.w", spec.input_size(), spec.hidden1);
  add("enc0.b", 1, spec.hidden1);
  add("enc1.w", spec.hidden1, spec.hidden2);
  add("enc1.b", 1, spec.hidden2);
  add("pi.w", spec.hidden2, spec.policy_size());
  add("pi.b", 1, spec.policy_size());
  add("v.w", spec.hidden2, 1);
  add("v.b", 1, 1);
  params_.assign(offset, R(0));
}

template <class R>
const ParamInfo& PolicyValueNet<R>::info(std::string_view name) const {
  for (const auto& p : layout_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

template <class R>
std::span<R> PolicyValueNet<R>::param(std::string_view name) {
  const auto& p = info(name);
  return std::span<R>(params_).subspan(p.offset, p.size());
}

template <class R>
std::span<const R> PolicyValueNet<R>::param(std::string_view name) const {
  const auto& p = info(name);
  return std::span<const R>(params_).subspan(p.offset, p.size());
}

namespace {

// Orthogonal matrix of shape (in x out) scaled by gain: the columns (or rows,
// whichever are fewer) are orthonormal.
Eigen::MatrixXd orthogonal(int in, int out, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = std::max(in, out);
  const int n = std::min(in, out);
  Eigen::MatrixXd a(m, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
  const auto diag = qr.matrixQR().diagonal();
  for (int j = 0; j < n; ++j) {
    if (diag(j) < 0) q.col(j) *= -1.0;
  }
  if (in < out) q.transposeInPlace();
  return gain * q;
}

}  // namespace

template <class R>
void PolicyValueNet<R>::init_orthogonal(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::fill(params_.begin(), params_.end(), R(0));
  const std::pair<const char*, double> weights[] = {
      {"enc0.w", std::sqrt(2.0)}, {"enc1.w", std::sqrt(2.0)}, {"pi.w", 0.01}, {"v.w", 1.0}};
  for (const auto& [name, gain] : weights) {
    const auto& p = info(name);
    const Eigen::MatrixXd q = orthogonal(p.rows, p.cols, gain, rng);
    R* w = params_.data() + p.offset;
    for (int i = 0; i < p.rows; ++i) {
      for (int o = 0; o < p.cols; ++o) w[static_cast<size_t>(i) * p.cols + o] = static_cast<R>(q(i, o));
    }
  }
}

template <class R>
void PolicyValueNet<R>::forward(std::span<const uint8_t> obs, int batch, Cache& c, Exec ex) const {
  const int in = spec_.input_size();
  if (batch < 0 || obs.size() != static_cast<size_t>(batch) * in) {
    throw std::invalid_argument("network forward: observation shape mismatch");
  }
  const int h1 = spec_.hidden1, h2 = spec_.hidden2, np = spec_.policy_size();
  c.batch = batch;
  c.x.clear(in);
  for (int r = 0; r < batch; ++r) c.x.add_row(obs.subspan(static_cast<size_t>(r) * in, in));
  c.z1.resize(static_cast<size_t>(batch) * h1);
  c.a1.resize(c.z1.size());
  c.z2.resize(static_cast<size_t>(batch) * h2);
  c.a2.resize(c.z2.size());
  c.logits.resize(static_cast<size_t>(batch) * np);
  c.value.resize(batch);
  const R* P = params_.data();
  sparse_forward(ex, c.x, P + info("enc0.w").offset, P + info("enc0.b").offset, h1, c.z1.data());
  relu_forward(ex, c.z1.data(), static_cast<int>(c.z1.size()), c.a1.data());
  dense_forward(ex, c.a1.data(), batch, h1, P + info("enc1.w").offset, P + info("enc1.b").offset, h2, c.z2.data());
  relu_forward(ex, c.z2.data(), static_cast<int>(c.z2.size()), c.a2.data());
  dense_forward(ex, c.a2.data(), batch, h2, P + info("pi.w").offset, P + info("pi.b").offset, np, c.logits.data());
  dense_forward(ex, c.a2.data(), batch, h2, P + info("v.w").offset, P + info("v.b").offset, 1, c.value.data());
}

template <class R>
void PolicyValueNet<R>::backward(const Cache& c, std::span<const R> dlogits, std::span<const R> dvalue,
                                 std::span<R> grad, Exec ex) const {
  const int batch = c.batch;
  const int h1 = spec_.hidden1, h2 = spec_.hidden2, np = spec_.policy_size();
  if (dlogits.size() != static_cast<size_t>(batch) * np || dvalue.size() != static_cast<size_t>(batch) ||
      grad.size() != params_.size()) {
    throw std::invalid_argument("network backward: shape mismatch");
  }
  const R* P = params_.data();
  R* G = grad.data();
  const auto& pw = info("pi.w");
  const auto& pb = info("pi.b");
  const auto& vw = info("v.w");
  const auto& vb = info("v.b");
  const auto& e1w = info("enc1.w");
  const auto& e1b = info("enc1.b");
  const auto& e0w = info("enc0.w");
  const auto& e0b = info("enc0.b");

  dense_backward_params(ex, c.a2.data(), dlogits.data(), batch, h2, np, G + pw.offset, G + pb.offset);
  dense_backward_params(ex, c.a2.data(), dvalue.data(), batch, h2, 1, G + vw.offset, G + vb.offset);

  std::vector<R> da2(static_cast<size_t>(batch) * h2);
  std::vector<R> dv(static_cast<size_t>(batch) * h2);
  dense_backward_input(ex, dlogits.data(), batch, np, P + pw.offset, h2, da2.data());
  dense_backward_input(ex, dvalue.data(), batch, 1, P + vw.offset, h2, dv.data());
  for (size_t i = 0; i < da2.size(); ++i) da2[i] += dv[i];

  std::vector<R> dz2(da2.size());
  relu_backward(ex, c.z2.data(), da2.data(), static_cast<int>(dz2.size()), dz2.data());
  dense_backward_params(ex, c.a1.data(), dz2.data(), batch, h1, h2, G + e1w.offset, G + e1b.offset);

  std::vector<R> da1(static_cast<size_t>(batch) * h1);
  dense_backward_input(ex, dz2.data(), batch, h2, P + e1w.offset, h1, da1.data());
  std::vector<R> dz1(da1.size());
  relu_backward(ex, c.z1.data(), da1.data(), static_cast<int>(dz1.size()), dz1.data());
  sparse_backward_params(ex, c.x, dz1.data(), h1, G + e0w.offset, G + e0b.offset);
}

template class PolicyValueNet<float>;
template class PolicyValueNet<double>;

}  // namespace rts::learn
