#pragma once

#include "smdet/types.hpp"

namespace smdet {

/// Cholesky factor of a Hermitian positive definite matrix. One retry with
/// 1e-12 * I jitter, then NotPositiveDefinite.
class HpdFactor {
 public:
  HpdFactor() = default;
  explicit HpdFactor(const CMatrix& gamma);

  Eigen::Index size() const { return lower_.rows(); }
  double log_det() const { return log_det_; }
  bool jittered() const { return jittered_; }

  /// L^{-1} x, so that quad(x) = ||whiten(x)||^2.
  CMatrix whiten(const CMatrix& x) const;
  CMatrix solve(const CMatrix& x) const;
  CMatrix inverse() const;
  /// x^H Gamma^{-1} x.
  CMatrix quad(const CMatrix& x) const;
  double quad(const CVector& x) const;
  const CMatrix& lower() const { return lower_; }

 private:
  CMatrix lower_;
  double log_det_ = 0.0;
  bool jittered_ = false;
};

/// G(Gamma, chi) = chi^H Gamma^{-1} chi via Cholesky solve.
CMatrix quad_form(const CMatrix& gamma, const CMatrix& chi);

bool is_hermitian(const CMatrix& m, double tol = 1e-10);

/// Hermitian square root S with S S^H = M; eigenvalues below 1e-12 clamp to 0.
CMatrix psd_sqrt(const CMatrix& m);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Toeplitz matrix with first column c (real symmetric).
RMatrix toeplitz(const RVector& c);

}  // namespace smdet
