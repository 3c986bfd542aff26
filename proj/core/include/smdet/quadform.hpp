#pragma once

#include <vector>

#include "smdet/types.hpp"

namespace smdet {

/// Q = sum_i lambda_i |w_i + mu_i|^2 + g, with w_i ~ CN(0, 1) independent and
/// g ~ N(0, normal_var) real. The Gaussian term absorbs directions where the
/// quadratic part vanishes and only a linear term survives.
struct QuadFormSpec {
  std::vector<double> eigenvalues;
  std::vector<cplx> shifts;
  double normal_var = 0.0;
  double threshold = 0.0;
};

/// P{Q <= threshold} by Imhof inversion of the characteristic function.
/// Absolute accuracy tol; IntegrationNotConverged if the budget runs out.
double quadratic_form_cdf(const QuadFormSpec& spec, double tol = 1e-8);

}  // namespace smdet
