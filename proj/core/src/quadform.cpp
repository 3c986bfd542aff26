#include "smdet/quadform.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>

#include "smdet/errors.hpp"

namespace smdet {

namespace {

// Real-form terms: each complex term is lambda/2 times a noncentral chi-square
// with two degrees of freedom and noncentrality 2|mu|^2.
struct ImhofTerms {
  std::vector<double> lam;
  std::vector<double> delta2;
  double normal_var = 0.0;
  double x = 0.0;

  double theta(double u) const {
    double t = -0.5 * x * u;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const double lu = lam[i] * u;
      t += std::atan(lu) + 0.5 * delta2[i] * lu / (1.0 + lu * lu);
    }
    return t;
  }

  double log_rho(double u) const {
    double r = 0.125 * normal_var * u * u;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      const double l2u2 = lam[i] * lam[i] * u * u;
      r += 0.5 * std::log1p(l2u2) + 0.5 * delta2[i] * l2u2 / (1.0 + l2u2);
    }
    return r;
  }

  double slope_at_zero() const {
    double s = -0.5 * x;
    for (std::size_t i = 0; i < lam.size(); ++i) s += lam[i] * (1.0 + 0.5 * delta2[i]);
    return s;
  }

  double operator()(double u) const {
    if (u <= 0.0) return slope_at_zero();
    return std::sin(theta(u)) / u * std::exp(-log_rho(u));
  }
};

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Adaptive bisection on a 31-point Gauss-Kronrod rule with an absolute
// error target (the integrand may vanish identically). The target is floored
// at a small multiple of eps * integral of |f|, below which the Kronrod
// estimate only measures rounding.
template <typename F>
double integrate_piece(const F& f, double a, double b, double budget) {
  using boost::math::quadrature::gauss_kronrod;
  struct Piece {
    double a, b, value, error, l1;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto rule = [&f](double lo, double hi) {
    double err = 0.0, l1 = 0.0;
    const double v = gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0, &err, &l1);
    // Boost reports the single-rule error on the [-1, 1] scale; only L1 is
    // mapped back to [lo, hi].
    return Piece{lo, hi, v, err * 0.5 * (hi - lo), l1};
  };
  constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();
  std::priority_queue<Piece> queue;
  queue.push(rule(a, b));
  double value = queue.top().value;
  double error = queue.top().error;
  double l1 = queue.top().l1;
  constexpr int kMaxSplits = 5000;
  for (int it = 0; it < kMaxSplits && error > std::max(budget, kRoundoff * l1); ++it) {
    const Piece p = queue.top();
    queue.pop();
    const double mid = 0.5 * (p.a + p.b);
    const Piece left = rule(p.a, mid);
    const Piece right = rule(mid, p.b);
    value += left.value + right.value - p.value;
    error += left.error + right.error - p.error;
    l1 += left.l1 + right.l1 - p.l1;
    queue.push(left);
    queue.push(right);
  }
  if (!std::isfinite(value) || error > std::max(budget, kRoundoff * l1))
    raise(ErrorCode::IntegrationNotConverged,
          "quadrature error " + fmt_g(error) + " above budget " + fmt_g(budget) + " (l1 " +
              fmt_g(l1) + ") on [" + fmt_g(a) + ", " + fmt_g(b) + "]");
  return value;
}

// Wynn epsilon extrapolation of the latest partial sums.
double wynn_epsilon(const std::vector<double>& sums) {
  const std::size_t n = std::min<std::size_t>(sums.size(), 21);
  std::vector<double> prev(n + 1, 0.0);  // e_{k-1}
  std::vector<double> cur(sums.end() - n, sums.end());
  double best = cur.back();
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> next(n - k);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double d = cur[i + 1] - cur[i];
      if (d == 0.0) return (k % 2 == 1) ? cur[i + 1] : best;
      next[i] = prev[i + 1] + 1.0 / d;
    }
    prev = cur;
    cur = std::move(next);
    if (k % 2 == 0) best = cur.back();
  }
  return best;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double quadratic_form_cdf(const QuadFormSpec& spec, double tol) {
  if (spec.eigenvalues.size() != spec.shifts.size())
    raise(ErrorCode::ShapeMismatch, "eigenvalues and shifts differ in length");
  if (!(tol > 0.0)) raise(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (spec.normal_var < 0.0) raise(ErrorCode::InvalidArgument, "normal_var must be >= 0");

  ImhofTerms f;
  f.normal_var = spec.normal_var;
  f.x = spec.threshold;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues[i] == 0.0) continue;
    f.lam.push_back(0.5 * spec.eigenvalues[i]);
    f.delta2.push_back(2.0 * std::norm(spec.shifts[i]));
  }
  if (f.lam.empty()) {
    if (spec.normal_var > 0.0) return normal_cdf(spec.threshold / std::sqrt(spec.normal_var));
    raise(ErrorCode::InvalidArgument, "quadratic form needs a nonzero eigenvalue");
  }

  double min_lam = std::numeric_limits<double>::infinity();
  for (double l : f.lam) min_lam = std::min(min_lam, std::abs(l));
  const double share = kPi * tol / 4.0;
  double u0 = 10.0 / min_lam;
  bool tail_needed = true;
  if (spec.normal_var > 0.0) {
    // exp(-s^2 u^2 / 8) < e^{-40} beyond this point
    const double u_s = std::sqrt(320.0 / spec.normal_var);
    if (u_s <= u0) {
      u0 = u_s;
      tail_needed = false;
    }
  }
  {
    // Tail beyond U is at most exp(-N(U)) / (m U^m prod|lambda|), with N the
    // noncentral part of log rho. Large shifts make this bite long before u0.
    auto log_bound = [&f](double u) {
      const double m = static_cast<double>(f.lam.size());
      double b = -std::log(m) - m * std::log(u);
      for (std::size_t i = 0; i < f.lam.size(); ++i) {
        const double l2u2 = f.lam[i] * f.lam[i] * u * u;
        b -= std::log(std::abs(f.lam[i])) + 0.5 * f.delta2[i] * l2u2 / (1.0 + l2u2);
      }
      return b;
    };
    const double target = std::log(share / 2.0);
    if (log_bound(u0) <= target) {
      double lo = 0.0, hi = u0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_bound(mid) <= target ? hi : lo) = mid;
      }
      u0 = hi;
      tail_needed = false;
    }
  }
  const double ax = std::abs(f.x);

  // Head: [0, u0] in chunks of a few oscillation periods.
  double total = 0.0;
  {
    const double period = ax > 0.0 ? 4.0 * kPi / ax : u0;
    const double chunk = std::max(u0 / 20000.0, std::min(u0, 8.0 * period));
    const int n_chunks = static_cast<int>(std::ceil(u0 / chunk));
    for (int c = 0; c < n_chunks; ++c) {
      const double a = u0 * c / n_chunks;
      const double b = u0 * (c + 1) / n_chunks;
      total += integrate_piece(f, a, b, share / n_chunks);
    }
  }

  if (tail_needed) {
    // Beyond u0 theta is close to its asymptote  const - x u / 2, so the
    // integrand oscillates with half period 2 pi / |x|.
    const double half_period = ax > 0.0 ? 2.0 * kPi / ax : std::numeric_limits<double>::infinity();
    const double u1 = std::max(u0, half_period);
    if (u1 > u0) {
      // Slowly varying stretch: integrate in t = 1/u.
      auto g = [&f](double t) {
        if (t <= 0.0) return 0.0;
        return f(1.0 / t) / (t * t);
      };
      const double t_lo = std::isfinite(u1) ? 1.0 / u1 : 0.0;
      total += integrate_piece(g, t_lo, 1.0 / u0, share);
    }
    if (std::isfinite(u1)) {
      std::vector<double> sums;
      double partial = 0.0;
      double last_est = std::numeric_limits<double>::quiet_NaN();
      int stable = 0;
      bool converged = false;
      constexpr int kMaxPeriods = 4000;
      for (int j = 0; j < kMaxPeriods; ++j) {
        const double a = u1 + j * half_period;
        partial += integrate_piece(f, a, a + half_period, share / 64.0);
        sums.push_back(partial);
        const double est = sums.size() >= 3 ? wynn_epsilon(sums) : partial;
        if (std::abs(est - last_est) <= share / 4.0)
          ++stable;
        else
          stable = 0;
        last_est = est;
        if (stable >= 3) {
          converged = true;
          break;
        }
      }
      if (!converged)
        raise(ErrorCode::IntegrationNotConverged, "oscillatory tail did not converge");
      total += last_est;
    }
  }

  const double p = 0.5 - total / kPi;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace smdet
