#pragma once

namespace cgflab {

// Standard normal density.
double normal_pdf(double z);

// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double z);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation,
// relative accuracy about 1e-15).  Throws InputError for p outside (0, 1).
double normal_quantile(double p);

}  // namespace cgflab
