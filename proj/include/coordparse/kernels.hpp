#pragma once

#include <cstddef>

#include "coordparse/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coordparse::kernels {

// Thread count for the OpenMP kernels. 1 (the default) keeps every kernel on
// the calling thread. Parallelism is over output rows, so results are bitwise
// identical to the serial reference at any thread count.
void set_threads(int n);
int threads();

// ---- serial reference implementations -----------------------------------

// y += A x   (A: m x n, x: n, y: m)
template <typename S>
void matvec_serial(const Mat<S>& a, const S* x, S* y) {
  for (int r = 0; r < a.rows; ++r) {
    const S* ar = a.row(r);
    S acc = S(0);
    for (int c = 0; c < a.cols; ++c) acc += ar[c] * x[c];
    y[r] += acc;
  }
}

// y += A^T x  (A: m x n, x: m, y: n)
template <typename S>
void matvec_t_serial(const Mat<S>& a, const S* x, S* y) {
  for (int c = 0; c < a.cols; ++c) {
    S acc = S(0);
    for (int r = 0; r < a.rows; ++r) acc += a(r, c) * x[r];
    y[c] += acc;
  }
}

// A += u v^T  (u: m, v: n, A: m x n)
template <typename S>
void outer_add_serial(const S* u, const S* v, Mat<S>& a) {
  for (int r = 0; r < a.rows; ++r) {
    S* ar = a.row(r);
    const S ur = u[r];
    for (int c = 0; c < a.cols; ++c) ar[c] += ur * v[c];
  }
}

// ---- OpenMP kernels -------------------------------------------------------

template <typename S>
void matvec(const Mat<S>& a, const S* x, S* y) {
#ifdef _OPENMP
  if (threads() > 1 && a.rows >= 64) {
#pragma omp parallel for num_threads(threads())
    for (int r = 0; r < a.rows; ++r) {
      const S* ar = a.row(r);
      S acc = S(0);
      for (int c = 0; c < a.cols; ++c) acc += ar[c] * x[c];
      y[r] += acc;
    }
    return;
  }
#endif
  matvec_serial(a, x, y);
}

template <typename S>
void matvec_t(const Mat<S>& a, const S* x, S* y) {
#ifdef _OPENMP
  if (threads() > 1 && a.cols >= 64) {
#pragma omp parallel for num_threads(threads())
    for (int c = 0; c < a.cols; ++c) {
      S acc = S(0);
      for (int r = 0; r < a.rows; ++r) acc += a(r, c) * x[r];
      y[c] += acc;
    }
    return;
  }
#endif
  matvec_t_serial(a, x, y);
}

template <typename S>
void outer_add(const S* u, const S* v, Mat<S>& a) {
#ifdef _OPENMP
  if (threads() > 1 && a.rows >= 64) {
#pragma omp parallel for num_threads(threads())
    for (int r = 0; r < a.rows; ++r) {
      S* ar = a.row(r);
      const S ur = u[r];
      for (int c = 0; c < a.cols; ++c) ar[c] += ur * v[c];
    }
    return;
  }
#endif
  outer_add_serial(u, v, a);
}

}  // namespace coordparse::kernels
