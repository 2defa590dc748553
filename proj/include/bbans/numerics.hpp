#pragma once

// Special functions that must evaluate identically on the encoder and the
// decoder. Anything that feeds a quantized distribution goes through here
// rather than through <cmath>'s erf/lgamma, whose accuracy varies by libm.

namespace bbans {

/// Standard normal CDF. Hart (1968) double-precision rational approximation
/// in the form published by West (2005); absolute error below 1e-15.
/// Returns exactly 0 and 1 for -inf and +inf.
double normal_cdf(double z) noexcept;

/// Standard normal quantile, Wichura's AS241 (PPND16); relative error below
/// 1e-15. normal_quantile(0) = -inf and normal_quantile(1) = +inf.
double normal_quantile(double p) noexcept;

/// log Gamma(x) for x > 0 by the Lanczos approximation (g = 7, 9 terms),
/// with reflection below 0.5. Relative error below 1e-13 away from the
/// roots at 1 and 2, absolute error below 1e-14 near them.
double log_gamma(double x) noexcept;

}  // namespace bbans
