#include "mgp/linalg.hpp"

#include <cmath>
#include <string>

namespace mgp::linalg {

SymMatrix SymMatrix::from_fn(int dim, const std::function<double(int, int)>& fn) {
  if (dim < 1) raise(ErrorKind::DimensionMismatch, "SymMatrix: dim must be >= 1");
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) m.set(i, j, fn(i, j));
  return m;
}

SymMatrix SymMatrix::from_rows(int dim, const Vec& rows) {
  if (dim < 1 || rows.size() != static_cast<std::size_t>(dim) * dim)
    raise(ErrorKind::DimensionMismatch, "SymMatrix: bad row array size");
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      double lo = rows[static_cast<std::size_t>(i) * dim + j];
      double hi = rows[static_cast<std::size_t>(j) * dim + i];
      if (lo != hi)
        raise(ErrorKind::DimensionMismatch, "SymMatrix: input array is not symmetric");
      m.set(i, j, lo);
    }
  return m;
}

namespace {

// Plain right-looking Cholesky; returns false instead of throwing so the
// jitter ladder can retry.
bool try_factor(const SymMatrix& m, double delta, LowerTriangular& out) {
  const int n = m.dim();
  out = LowerTriangular(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = m.at(i, j) + (i == j ? delta : 0.0);
      for (int k = 0; k < j; ++k) acc -= out.at(i, k) * out.at(j, k);
      if (i == j) {
        if (!(acc > 0.0) || !std::isfinite(acc)) return false;
        out.set(i, i, std::sqrt(acc));
      } else {
        out.set(i, j, acc / out.at(j, j));
      }
    }
  }
  return true;
}

}  // namespace

CholResult cholesky(const SymMatrix& m, const JitterPolicy& policy) {
  if (m.dim() < 1) raise(ErrorKind::DimensionMismatch, "cholesky: dim must be >= 1");
  CholResult res;
  if (try_factor(m, 0.0, res.L)) {
    res.jitter = 0.0;
    return res;
  }
  if (policy.mode == JitterPolicy::Mode::Adaptive) {
    for (double delta = policy.start; delta <= policy.max * (1.0 + 1e-12); delta *= 10.0) {
      if (try_factor(m, delta, res.L)) {
        res.jitter = delta;
        return res;
      }
    }
  }
  raise(ErrorKind::NotPositiveDefinite,
        "cholesky: matrix not positive definite at any jitter level (dim=" +
            std::to_string(m.dim()) + ")");
}

Vec solve_lower(const LowerTriangular& L, const Vec& b) {
  const int n = L.dim();
  if (b.size() != static_cast<std::size_t>(n))
    raise(ErrorKind::DimensionMismatch, "solve_lower: vector length " +
                                            std::to_string(b.size()) + " != dim " +
                                            std::to_string(n));
  Vec x(b.size());
  for (int i = 0; i < n; ++i) {
    double acc = b[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k) acc -= L.at(i, k) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] = acc / L.at(i, i);
  }
  return x;
}

LowerTriangular inverse_lower(const LowerTriangular& L) {
  const int n = L.dim();
  LowerTriangular inv(n);
  // Solve L * col_j = e_j; the solution is zero above row j.
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      double acc = (i == j) ? 1.0 : 0.0;
      for (int k = j; k < i; ++k) acc -= L.at(i, k) * inv.at(k, j);
      inv.set(i, j, acc / L.at(i, i));
    }
  }
  return inv;
}

double log_det_from_chol(const LowerTriangular& L) {
  double acc = 0.0;
  for (int i = 0; i < L.dim(); ++i) acc += std::log(L.at(i, i));
  return 2.0 * acc;
}

double quad_form_inv(const LowerTriangular& L, const Vec& v) {
  Vec x = solve_lower(L, v);
  double acc = 0.0;
  for (double xi : x) acc += xi * xi;
  return acc;
}

Vec lower_times_vec(const LowerTriangular& L, const Vec& x) {
  const int n = L.dim();
  if (x.size() != static_cast<std::size_t>(n))
    raise(ErrorKind::DimensionMismatch, "lower_times_vec: length mismatch");
  Vec y(x.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k <= i; ++k) acc += L.at(i, k) * x[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

}  // namespace mgp::linalg
