#pragma once

namespace dergame {

/// Quadratic utility U(x) = M x - N x^2 / 2 for x <= M/N, saturating at M^2/(2N).
double consumer_utility(double m, double n, double x);

/// Surplus-maximizing flexible demand, clamp((M - pi) / N, 0, M / N).
double flexible_demand(double m, double n, double pi);

/// U(d + D) - pi (d + D).
double consumer_surplus(double m, double n, double d, double inflexible, double pi);

}  // namespace dergame
