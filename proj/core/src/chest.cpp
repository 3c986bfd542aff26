#include "smdet/chest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "smdet/errors.hpp"

namespace smdet {

Eigen::Matrix3d mb_pilot_matrix(int k_p, int n) {
  Eigen::Matrix3d t;
  for (int r = 0; r < 3; ++r) {
    const double k = static_cast<double>(k_p) + r * static_cast<double>(n);
    t(r, 0) = k * k;
    t(r, 1) = k;
    t(r, 2) = 1.0;
  }
  return t;
}

Eigen::RowVector3d mb_weights(int k, int k_p, int n) {
  if (n <= 0) raise(ErrorCode::SingularT, "pilot epochs coincide (N <= 0)");
  const int tau = k - k_p;
  if (tau < 0 || tau > 2 * n)
    raise(ErrorCode::InvalidArgument, "block index outside the MB window");
  const Eigen::Matrix3d t = mb_pilot_matrix(0, n);
  const Eigen::Vector3d tk(static_cast<double>(tau) * tau, tau, 1.0);
  // w T = t(k)^T  <=>  T^T w^T = t(k)
  const Eigen::Vector3d w = t.transpose().fullPivLu().solve(tk);
  return w.transpose();
}

ChannelEstimate mb_estimate(const MbWindow& window, int k) {
  const Eigen::RowVector3d w = mb_weights(k, window.k_p, window.n);
  const double scale = 1.0 / std::sqrt(window.pilot_power);
  ChannelEstimate out;
  out.h_hat = scale * (w(0) * window.pilot_obs[0] + w(1) * window.pilot_obs[1] +
                       w(2) * window.pilot_obs[2]);
  out.source = EstimateSource::MB;
  out.block_idx = k;
  return out;
}

MbTerms mb_temporal_terms(int k, int k_p, int n, const RhoFn& rho) {
  MbTerms out;
  out.w = mb_weights(k, k_p, n);
  const int tau = k - k_p;
  const Eigen::Vector3d q(rho(tau), rho(tau - n), rho(tau - 2 * n));
  const double r1 = rho(n);
  const double r2 = rho(2 * n);
  Eigen::Matrix3d r3;
  r3 << 1.0, r1, r2, r1, 1.0, r1, r2, r1, 1.0;
  out.cross_gain = out.w.dot(q.transpose());
  out.nu = (out.w * r3 * out.w.transpose())(0, 0);
  out.w_norm2 = out.w.squaredNorm();
  return out;
}

CMatrix mb_error_covariance(int k, const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho) {
  const MbTerms t = mb_temporal_terms(k, 0, cfg.frame_len, rho);
  const double est_noise = cfg.noise_var / cfg.pilot_power;
  CMatrix psi = (t.nu - 2.0 * t.cross_gain + 1.0) * phi;
  psi.diagonal().array() += est_noise * t.w_norm2;
  return psi;
}

ChannelEstimate dd_update(const ChannelEstimate& prev, const CMatrix& y, const CMatrix& x_hat) {
  if (x_hat.rows() != prev.h_hat.cols() || y.cols() != x_hat.cols() ||
      y.rows() != prev.h_hat.rows())
    raise(ErrorCode::ShapeMismatch, "dd_update dimensions disagree");
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < x_hat.rows(); ++i)
    if (x_hat.row(i).cwiseAbs().maxCoeff() > 0.0) active.push_back(i);
  if (active.empty()) raise(ErrorCode::RankDeficientTruncation, "decided block has no active antenna");

  CMatrix xbar(static_cast<Eigen::Index>(active.size()), x_hat.cols());
  for (std::size_t r = 0; r < active.size(); ++r) xbar.row(r) = x_hat.row(active[r]);

  // Y Xbar^+ with Xbar of full row rank: Y Xbar^H (Xbar Xbar^H)^{-1}.
  const CMatrix gram = xbar * xbar.adjoint();
  Eigen::LLT<CMatrix> llt(gram);
  const double scale = gram.diagonal().real().maxCoeff();
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const CMatrix l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      if (std::norm(l(i, i)) <= 1e-12 * scale) ok = false;
  }
  if (!ok) raise(ErrorCode::RankDeficientTruncation, "truncated block is rank deficient");
  const CMatrix h_sub = llt.solve(xbar * y.adjoint()).adjoint();

  ChannelEstimate out;
  out.h_hat = prev.h_hat;
  for (std::size_t r = 0; r < active.size(); ++r) out.h_hat.col(active[r]) = h_sub.col(r);
  out.source = EstimateSource::DD;
  out.block_idx = prev.block_idx + 1;
  return out;
}

ChannelEstimate pilot_estimate(const CMatrix& y, const SystemConfig& cfg, int block_idx) {
  ChannelEstimate out;
  out.h_hat = y / std::sqrt(cfg.pilot_power);
  out.source = EstimateSource::DD;
  out.block_idx = block_idx;
  return out;
}

namespace {

double fit_objective(double c, const RMatrix& mag) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < mag.rows(); ++i)
    for (Eigen::Index j = 0; j < mag.cols(); ++j) {
      const double e = std::pow(c, static_cast<double>(std::abs(i - j))) - mag(i, j);
      f += e * e;
    }
  return f;
}

CMatrix refine(double c, const CMatrix& bar) {
  const Eigen::Index n = bar.rows();
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sgn = bar(i, j).real() < 0.0 ? -1.0 : 1.0;
      out(i, j) = sgn * std::pow(c, static_cast<double>(std::abs(i - j)));
    }
  return out;
}

CMatrix unit_diagonal(const CMatrix& m) {
  const RVector d = m.diagonal().real().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  return d.cast<cplx>().asDiagonal() * m * d.cast<cplx>().asDiagonal();
}

}  // namespace

double fit_exponential_coefficient(const CMatrix& bar) {
  const RMatrix mag = bar.cwiseAbs();
  constexpr double hi = 1.0 - 1e-6;
  constexpr int grid = 64;
  int best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double c = hi * i / (grid - 1);
    const double f = fit_objective(c, mag);
    if (f < best_f) {
      best_f = f;
      best = i;
    }
  }
  double a = hi * std::max(0, best - 1) / (grid - 1);
  double b = hi * std::min(grid - 1, best + 1) / (grid - 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = fit_objective(x1, mag);
  double f2 = fit_objective(x2, mag);
  while (b - a > 1e-6) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = fit_objective(x1, mag);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = fit_objective(x2, mag);
    }
  }
  const double c = 0.5 * (a + b);
  // Keep the grid winner if the bracket refinement landed somewhere worse.
  const double c_grid = hi * best / (grid - 1);
  return fit_objective(c, mag) <= best_f ? c : c_grid;
}

CorrelationEstimate estimate_spatial_correlation(const std::array<CMatrix, 3>& pilot_estimates) {
  const Eigen::Index nr = pilot_estimates[0].rows();
  const Eigen::Index nt = pilot_estimates[0].cols();
  CorrelationEstimate out;
  out.phi_r_bar = CMatrix::Zero(nr, nr);
  out.phi_t_bar = CMatrix::Zero(nt, nt);
  for (const CMatrix& h : pilot_estimates) {
    out.phi_r_bar += h * h.adjoint();
    out.phi_t_bar += h.transpose() * h.conjugate();
  }
  out.phi_r_bar /= 3.0 * static_cast<double>(nt);
  out.phi_t_bar /= 3.0 * static_cast<double>(nr);
  // Fit on the unit-diagonal version: with three pilot blocks the overall power
  // of bar fluctuates a lot, and since c < 1 that drags the raw fit downwards.
  out.r_hat = fit_exponential_coefficient(unit_diagonal(out.phi_r_bar));
  out.t_hat = fit_exponential_coefficient(unit_diagonal(out.phi_t_bar));
  out.phi_r_hat = refine(out.r_hat, out.phi_r_bar);
  out.phi_t_hat = refine(out.t_hat, out.phi_t_bar);
  return out;
}

double estimate_doppler(const std::array<CMatrix, 3>& pilot_estimates, int n, int block_len) {
  cplx cross = (pilot_estimates[0].adjoint() * pilot_estimates[1]).trace() +
               (pilot_estimates[1].adjoint() * pilot_estimates[2]).trace();
  const double power = 0.5 * pilot_estimates[0].squaredNorm() + pilot_estimates[1].squaredNorm() +
                       0.5 * pilot_estimates[2].squaredNorm();
  double rho = power > 0.0 ? cross.real() / power : 0.0;
  rho = std::clamp(rho, 0.0, 1.0);
  // J0 decreases monotonically on [0, j_{0,1}]; bisect there.
  constexpr double first_zero = 2.404825557695773;
  double lo = 0.0;
  double hi = first_zero;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j0(mid) > rho)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  return x / (2.0 * kPi * static_cast<double>(n) * block_len);
}

}  // namespace smdet
