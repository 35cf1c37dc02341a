#include "windclear/probkit.hpp"

#include <cmath>
#include <limits>

namespace windclear {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;
constexpr double kSqrt2 = 1.4142135623730950488016887;
// Deep-tail switch for the hazard expansion z + 1/z - 2/z^3.
constexpr double kHazardTailZ = 8.0;
}  // namespace

GaussianSpec::GaussianSpec(double mean_, double std_) : mean(mean_), std(std_) {
  if (!(std::isfinite(mean) && std::isfinite(std)))
    throw std::invalid_argument("GaussianSpec: fields must be finite");
  if (!(std > 0.0)) throw std::invalid_argument("GaussianSpec: std must be > 0");
}

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  // erfc is a correctly-rounded libm primitive; this form keeps full relative
  // accuracy in the lower tail where 1 - erf would cancel.
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  // Acklam's rational initial guess, then Newton refinements on normal_cdf.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Two Newton steps; the guess is already ~1e-9 accurate.
  for (int it = 0; it < 2; ++it) {
    double err = normal_cdf(x) - p;
    double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= err / pdf;
  }
  return x;
}

double normal_hazard_upper(double z) {
  if (z > kHazardTailZ) {
    double zi = 1.0 / z;
    return z + zi - 2.0 * zi * zi * zi;
  }
  return normal_pdf(z) / (0.5 * std::erfc(z * kInvSqrt2));
}

double normal_hazard_lower(double z) { return normal_hazard_upper(-z); }

double expected_overload(double mu, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("expected_overload: sigma must be >= 0");
  if (sigma == 0.0) return mu > 0.0 ? mu : 0.0;
  double m = mu / sigma;
  if (m < -38.0) return 0.0;
  if (m > 38.0) return mu;
  return mu * normal_cdf(m) + sigma * normal_pdf(m);
}

TruncatedMoments truncated_moments(const GaussianSpec& spec, double cut, TruncSide side) {
  if (std::isnan(cut)) throw std::invalid_argument("truncated_moments: cut is NaN");
  double var = spec.std * spec.std;
  if (std::isinf(cut)) {
    bool vacuous = (side == TruncSide::Below && cut > 0) || (side == TruncSide::Above && cut < 0);
    if (vacuous) return {spec.mean, var};
    throw std::invalid_argument("truncated_moments: truncation removes all mass");
  }
  double z = (cut - spec.mean) / spec.std;
  // Everything reduces to the upper-tail hazard via symmetry.
  double h, zs;
  if (side == TruncSide::Above) {
    h = normal_hazard_upper(z);
    zs = z;
  } else {
    h = normal_hazard_upper(-z);
    zs = -z;
  }
  double mean_shift = spec.std * h;
  double factor = 1.0 + zs * h - h * h;
  if (factor < 0.0) factor = 0.0;  // guard rounding in the very deep tail
  double mean = (side == TruncSide::Above) ? spec.mean + mean_shift : spec.mean - mean_shift;
  return {mean, var * factor};
}

double rate_function(const GaussianSpec& spec, double omega) {
  double t = (omega - spec.mean) / spec.std;
  return 0.5 * t * t;
}

}  // namespace windclear
