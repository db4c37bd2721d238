#pragma once

namespace wnc {

/// Marcum Q-function of order 1, Q1(a, b) = P(|a + Z1 + i Z2| > b) for
/// independent standard normals. Poisson-weighted incomplete gamma series.
double marcum_q1(double a, double b);

/// 1 - Q1(a, b), summed directly so that small values keep relative accuracy.
double marcum_q1_complement(double a, double b);

}  // namespace wnc
