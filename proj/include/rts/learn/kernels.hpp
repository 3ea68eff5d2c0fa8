#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rts::learn {

// Serial is the reference; Parallel splits the same loops across OpenMP
// threads without changing any summation order, so both give bit-identical
// results.
enum class Exec { Serial, Parallel };

// Batch of binary input rows stored as the indices of their non-zero entries.
struct SparseRows {
  int cols = 0;
  std::vector<int> row_ptr{0};  // rows() + 1 entries
  std::vector<int> index;

  int rows() const { return static_cast<int>(row_ptr.size()) - 1; }
  void clear(int columns) {
    cols = columns;
    row_ptr.assign(1, 0);
    index.clear();
  }
  void add_row(std::span<const uint8_t> dense);
};

// Weights are stored input-major: W[i * out + o].

// y = x W + b, x dense (batch x in).
template <class R>
void dense_forward(Exec ex, const R* x, int batch, int in, const R* W, const R* b, int out, R* y);

// y = x W + b, x binary sparse.
template <class R>
void sparse_forward(Exec ex, const SparseRows& x, const R* W, const R* b, int out, R* y);

// dx = dy W^T.
template <class R>
void dense_backward_input(Exec ex, const R* dy, int batch, int out, const R* W, int in, R* dx);

// dW += x^T dy, db += column sums of dy.
template <class R>
void dense_backward_params(Exec ex, const R* x, const R* dy, int batch, int in, int out, R* dW, R* db);

// dW += x^T dy for binary sparse x, db += column sums of dy.
template <class R>
void sparse_backward_params(Exec ex, const SparseRows& x, const R* dy, int out, R* dW, R* db);

template <class R>
void relu_forward(Exec ex, const R* z, int n, R* a);

// dz = da where z > 0, else 0.
template <class R>
void relu_backward(Exec ex, const R* z, const R* da, int n, R* dz);

}  // namespace rts::learn
