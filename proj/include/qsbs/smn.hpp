#pragma once

#include "qsbs/family.hpp"

namespace qsbs {

// Standard normal building blocks.
double normal_pdf(double y);
double normal_log_pdf(double y);
double normal_cdf(double y);
double normal_quantile(double p);

/// Lower regularized incomplete gamma of (shape, rate * x); the CDF at x of a
/// Gamma(shape, rate) law.
double regularized_gamma_cdf(double x, double shape, double rate);

/// Density of the standardized (location 0, scale 1) mixture kernel.
/// The slash case integrates the mixing law numerically.
double smn_pdf(double y, const MixtureFamily& family);

/// Log-density, stable far into the tails (the slash case goes through the
/// incomplete-gamma form instead of quadrature).
double smn_log_pdf(double y, const MixtureFamily& family);

/// Distribution function of the standardized kernel.
double smn_cdf(double y, const MixtureFamily& family);

/// Inverse of smn_cdf on (0,1). Normal and Student-t use standard inverses;
/// the contaminated normal and slash cases bracket and bisect the CDF.
double smn_quantile(double p, const MixtureFamily& family);

}  // namespace qsbs
