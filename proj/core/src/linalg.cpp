#include "smdet/linalg.hpp"

#include <cmath>

#include "smdet/errors.hpp"

namespace smdet {

namespace {

bool try_cholesky(const CMatrix& a, CMatrix& lower) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double d = lower(i, i).real();
    if (!(d > 0.0) || !std::isfinite(d)) return false;
  }
  return true;
}

}  // namespace

HpdFactor::HpdFactor(const CMatrix& gamma) {
  if (gamma.rows() != gamma.cols())
    raise(ErrorCode::ShapeMismatch, "HpdFactor expects a square matrix");
  if (!try_cholesky(gamma, lower_)) {
    CMatrix jitter = gamma;
    jitter.diagonal().array() += 1e-12;
    if (!try_cholesky(jitter, lower_))
      raise(ErrorCode::NotPositiveDefinite, "Cholesky failed after jitter");
    jittered_ = true;
  }
  log_det_ = 2.0 * lower_.diagonal().real().array().log().sum();
}

CMatrix HpdFactor::whiten(const CMatrix& x) const {
  return lower_.triangularView<Eigen::Lower>().solve(x);
}

CMatrix HpdFactor::solve(const CMatrix& x) const {
  CMatrix w = whiten(x);
  return lower_.adjoint().triangularView<Eigen::Upper>().solve(w);
}

CMatrix HpdFactor::inverse() const { return solve(CMatrix::Identity(size(), size())); }

CMatrix HpdFactor::quad(const CMatrix& x) const {
  CMatrix w = whiten(x);
  return w.adjoint() * w;
}

double HpdFactor::quad(const CVector& x) const {
  CVector w = lower_.triangularView<Eigen::Lower>().solve(x);
  return w.squaredNorm();
}

CMatrix quad_form(const CMatrix& gamma, const CMatrix& chi) {
  return HpdFactor(gamma).quad(chi);
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

CMatrix psd_sqrt(const CMatrix& m) {
  if (!is_hermitian(m)) raise(ErrorCode::NotHermitian, "psd_sqrt input is not Hermitian");
  CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  RVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) < 1e-12 ? 0.0 : std::sqrt(ev(i));
  const CMatrix& v = es.eigenvectors();
  return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

RMatrix toeplitz(const RVector& c) {
  const Eigen::Index n = c.size();
  RMatrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) t(i, j) = c(std::abs(i - j));
  return t;
}

}  // namespace smdet
