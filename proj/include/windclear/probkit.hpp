#pragma once

#include <stdexcept>

namespace windclear {

// Scalar Gaussian kernels shared by every market formulation. All functions are
// pure and thread-safe.

struct GaussianSpec {
  double mean = 0.0;
  double std = 1.0;

  GaussianSpec() = default;
  GaussianSpec(double mean_, double std_);
};

enum class TruncSide { Below, Above };

struct TruncatedMoments {
  double mean;
  double variance;
};

// Standard normal density phi(z).
double normal_pdf(double z);

// Standard normal CDF Phi(z), absolute error well below 1e-12.
double normal_cdf(double z);

// Inverse CDF. Throws std::domain_error for p outside (0, 1).
double normal_quantile(double p);

// Hazard ratio phi(z) / (1 - Phi(z)), stable far into the upper tail.
double normal_hazard_upper(double z);

// Hazard ratio phi(z) / Phi(z), stable far into the lower tail.
double normal_hazard_lower(double z);

// E[max(Y, 0)] for Y ~ N(mu, sigma^2); sigma == 0 degenerates to max(mu, 0).
double expected_overload(double mu, double sigma);

// Mean and variance of the Gaussian conditioned on {X <= cut} (Below) or
// {X > cut} (Above). Infinite cuts reduce to the untruncated moments.
TruncatedMoments truncated_moments(const GaussianSpec& spec, double cut, TruncSide side);

// Large-deviation rate function 0.5 * ((omega - mean)/std)^2.
double rate_function(const GaussianSpec& spec, double omega);

}  // namespace windclear
