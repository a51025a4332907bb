#pragma once

#include <functional>
#include <vector>

#include "mgp/errors.hpp"

namespace mgp::linalg {

// Dense linear algebra for the prior/KL path. Everything here is double
// precision: the structured covariances (near-pinned bridge frames, small
// Hurst exponents) are ill-conditioned enough that 32-bit factorization is
// not reliable, while the matrices themselves are tiny (n = frame count).

using Vec = std::vector<double>;

// Symmetric matrix, row-major, dim x dim. Construction goes through
// from_fn/set so entries (i,j) and (j,i) are the same stored double.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  static SymMatrix from_fn(int dim, const std::function<double(int, int)>& fn);
  // Validates exact symmetry of a full row-major array.
  static SymMatrix from_rows(int dim, const Vec& rows);

  int dim() const { return dim_; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  void set(int i, int j, double v) {
    a_[static_cast<std::size_t>(i) * dim_ + j] = v;
    a_[static_cast<std::size_t>(j) * dim_ + i] = v;
  }
  const Vec& data() const { return a_; }

 private:
  int dim_ = 0;
  Vec a_;
};

// Lower-triangular matrix, row-major dense storage, zeros above the diagonal.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  int dim() const { return dim_; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  void set(int i, int j, double v) { a_[static_cast<std::size_t>(i) * dim_ + j] = v; }
  const Vec& data() const { return a_; }

 private:
  int dim_ = 0;
  Vec a_;
};

struct JitterPolicy {
  enum class Mode { None, Adaptive };
  Mode mode = Mode::Adaptive;
  double start = 1e-10;
  double max = 1e-4;

  static JitterPolicy none() { return {Mode::None, 0.0, 0.0}; }
  static JitterPolicy adaptive(double start = 1e-10, double max = 1e-4) {
    return {Mode::Adaptive, start, max};
  }
};

struct CholResult {
  LowerTriangular L;
  double jitter = 0.0;  // delta actually added to the diagonal (0 if none)
};

// Cholesky factorization m + delta*I = L*L^T. With an adaptive policy, delta
// walks the geometric ladder start, 10*start, ... <= max until the
// factorization succeeds. Throws NotPositiveDefinite if every level fails.
CholResult cholesky(const SymMatrix& m, const JitterPolicy& policy = JitterPolicy::adaptive());

// Forward substitution: solves L x = b.
Vec solve_lower(const LowerTriangular& L, const Vec& b);

// Columns of L^{-1}, itself lower triangular.
LowerTriangular inverse_lower(const LowerTriangular& L);

// log det(L L^T) = 2 sum_i log L[i][i].
double log_det_from_chol(const LowerTriangular& L);

// v^T (L L^T)^{-1} v = ||L^{-1} v||^2.
double quad_form_inv(const LowerTriangular& L, const Vec& v);

// y = L x (dense lower-triangular times vector).
Vec lower_times_vec(const LowerTriangular& L, const Vec& x);

}  // namespace mgp::linalg
