#include "rts/learn/kernels.hpp"

#include <algorithm>
#include <cstring>

namespace rts::learn {

void SparseRows::add_row(std::span<const uint8_t> dense) {
  for (size_t i = 0; i < dense.size(); ++i) {
    if (dense[i]) index.push_back(static_cast<int>(i));
  }
  row_ptr.push_back(static_cast<int>(index.size()));
}

namespace {

bool parallel(Exec ex, long work) { return ex == Exec::Parallel && work > 4096; }

template <class R>
void dense_row(const R* x, int in, const R* W, const R* b, int out, R* y) {
  std::copy(b, b + out, y);
  for (int i = 0; i < in; ++i) {
    const R xi = x[i];
    if (xi == R(0)) continue;
    const R* w = W + static_cast<size_t>(i) * out;
    for (int o = 0; o < out; ++o) y[o] += xi * w[o];
  }
}

template <class R>
void sparse_row(const int* idx, int n, const R* W, const R* b, int out, R* y) {
  std::copy(b, b + out, y);
  for (int k = 0; k < n; ++k) {
    const R* w = W + static_cast<size_t>(idx[k]) * out;
    for (int o = 0; o < out; ++o) y[o] += w[o];
  }
}

template <class R>
void column_sums(const R* dy, int batch, int out, R* db) {
  for (int r = 0; r < batch; ++r) {
    const R* g = dy + static_cast<size_t>(r) * out;
    for (int o = 0; o < out; ++o) db[o] += g[o];
  }
}

}  // namespace

template <class R>
void dense_forward(Exec ex, const R* x, int batch, int in, const R* W, const R* b, int out, R* y) {
#pragma omp parallel for schedule(static) if (parallel(ex, static_cast<long>(batch) * in * out))
  for (int r = 0; r < batch; ++r) {
    dense_row(x + static_cast<size_t>(r) * in, in, W, b, out, y + static_cast<size_t>(r) * out);
  }
}

template <class R>
void sparse_forward(Exec ex, const SparseRows& x, const R* W, const R* b, int out, R* y) {
  const int batch = x.rows();
#pragma omp parallel for schedule(static) if (parallel(ex, static_cast<long>(x.index.size()) * out))
  for (int r = 0; r < batch; ++r) {
    sparse_row(x.index.data() + x.row_ptr[r], x.row_ptr[r + 1] - x.row_ptr[r], W, b, out,
               y + static_cast<size_t>(r) * out);
  }
}

template <class R>
void dense_backward_input(Exec ex, const R* dy, int batch, int out, const R* W, int in, R* dx) {
#pragma omp parallel for schedule(static) if (parallel(ex, static_cast<long>(batch) * in * out))
  for (int r = 0; r < batch; ++r) {
    const R* g = dy + static_cast<size_t>(r) * out;
    R* d = dx + static_cast<size_t>(r) * in;
    for (int i = 0; i < in; ++i) {
      const R* w = W + static_cast<size_t>(i) * out;
      R acc = 0;
      for (int o = 0; o < out; ++o) acc += g[o] * w[o];
      d[i] = acc;
    }
  }
}

template <class R>
void dense_backward_params(Exec ex, const R* x, const R* dy, int batch, int in, int out, R* dW, R* db) {
  // Each thread owns whole rows of dW; the batch is summed in order.
#pragma omp parallel for schedule(static) if (parallel(ex, static_cast<long>(batch) * in * out))
  for (int i = 0; i < in; ++i) {
    R* gw = dW + static_cast<size_t>(i) * out;
    for (int r = 0; r < batch; ++r) {
      const R xi = x[static_cast<size_t>(r) * in + i];
      if (xi == R(0)) continue;
      const R* g = dy + static_cast<size_t>(r) * out;
      for (int o = 0; o < out; ++o) gw[o] += xi * g[o];
    }
  }
  column_sums(dy, batch, out, db);
}

template <class R>
void sparse_backward_params(Exec ex, const SparseRows& x, const R* dy, int out, R* dW, R* db) {
  const int batch = x.rows();
  if (!parallel(ex, static_cast<long>(x.index.size()) * out)) {
    for (int r = 0; r < batch; ++r) {
      const R* g = dy + static_cast<size_t>(r) * out;
      for (int k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) {
        R* gw = dW + static_cast<size_t>(x.index[k]) * out;
        for (int o = 0; o < out; ++o) gw[o] += g[o];
      }
    }
  } else {
    // Transpose to (input -> rows) so each thread owns whole rows of dW;
    // rows stay in ascending order, matching the serial summation.
    std::vector<int> count(static_cast<size_t>(x.cols) + 1, 0);
    for (int i : x.index) ++count[i + 1];
    for (int c = 0; c < x.cols; ++c) count[c + 1] += count[c];
    std::vector<int> rows_of(x.index.size());
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (int r = 0; r < batch; ++r) {
      for (int k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) rows_of[fill[x.index[k]]++] = r;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < x.cols; ++i) {
      R* gw = dW + static_cast<size_t>(i) * out;
      for (int k = count[i]; k < count[i + 1]; ++k) {
        const R* g = dy + static_cast<size_t>(rows_of[k]) * out;
        for (int o = 0; o < out; ++o) gw[o] += g[o];
      }
    }
  }
  column_sums(dy, batch, out, db);
}

template <class R>
void relu_forward(Exec ex, const R* z, int n, R* a) {
#pragma omp parallel for schedule(static) if (parallel(ex, n))
  for (int i = 0; i < n; ++i) a[i] = z[i] > R(0) ? z[i] : R(0);
}

template <class R>
void relu_backward(Exec ex, const R* z, const R* da, int n, R* dz) {
#pragma omp parallel for schedule(static) if (parallel(ex, n))
  for (int i = 0; i < n; ++i) dz[i] = z[i] > R(0) ? da[i] : R(0);
}

#define RTS_INSTANTIATE(R)                                                                          \
  template void dense_forward<R>(Exec, const R*, int, int, const R*, const R*, int, R*);           \
  template void sparse_forward<R>(Exec, const SparseRows&, const R*, const R*, int, R*);           \
  template void dense_backward_input<R>(Exec, const R*, int, int, const R*, int, R*);              \
  template void dense_backward_params<R>(Exec, const R*, const R*, int, int, int, R*, R*);         \
  template void sparse_backward_params<R>(Exec, const SparseRows&, const R*, int, R*, R*);         \
  template void relu_forward<R>(Exec, const R*, int, R*);                                           \
  template void relu_backward<R>(Exec, const R*, const R*, int, R*);

RTS_INSTANTIATE(float)
RTS_INSTANTIATE(double)
#undef RTS_INSTANTIATE

}  // namespace rts::learn
