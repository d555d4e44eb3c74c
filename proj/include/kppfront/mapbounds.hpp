#pragma once

#include "kppfront/domain.hpp"

#include <cmath>
#include <vector>

namespace kpp {

/// f(A) = 2A / (c + sqrt(c^2 + 4A)): the root of y^2 + c y - A = 0 nearest 0.
template <typename Scalar>
Scalar f_bound(Scalar A, Scalar c) {
    Scalar disc = c * c + Scalar(4) * A;
    if (disc < Scalar(0)) throw DomainError("f_bound needs c^2 + 4A >= 0");
    return Scalar(2) * A / (c + std::sqrt(disc));
}

template <typename Scalar>
Scalar f_bound_prime(Scalar A, Scalar c) {
    return Scalar(1) / std::sqrt(c * c + Scalar(4) * A);
}

/// w(x) = e^{-x} - 1.
template <typename Scalar>
Scalar w_map(Scalar x) {
    return std::expm1(-x);
}

/// Closed-form Schwarzian of f o w.
template <typename Scalar>
Scalar schwarzian_fg(Scalar x, Scalar c) {
    if (c < Scalar(2)) throw DomainError("schwarzian_fg needs c >= 2");
    Scalar d = std::exp(x) * (c * c - Scalar(4)) + Scalar(4);
    return Scalar(6) / (d * d) - Scalar(1) / Scalar(2);
}

struct MapBounds {
    double L = 0.0;
    double U = 0.0;
    double L_e = 1.0;
    double U_e = 1.0;
    double B_star = 0.0;
};

MapBounds apriori_bounds(const Params& p);

/// x -> h f(w(x)).
double map_step(double x, const Params& p);

struct MapOrbit {
    std::vector<double> orbit;  // x_0 .. x_{2k}
    std::vector<double> even;   // x_0, x_2, .., x_{2k}
};

MapOrbit map_iterate(double M0, const Params& p, int k);

/// Nontrivial fixed point of the second iterate, searched by bisection on a
/// log grid over [lo, hi] (lo > 0). Returns false when G(x) = F(F(x)) - x
/// has no sign change there.
struct TwoCycle {
    bool found = false;
    double x = 0.0;         // positive member
    double partner = 0.0;   // F(x)
    double residual = 0.0;  // |F(F(x)) - x|
};

TwoCycle find_two_cycle(const Params& p, double lo = 1e-8, double hi = 0.0, int grid = 2000);

/// Bisection in tau for the onset of a nontrivial 2-cycle at speed c.
struct ThresholdResult {
    double tau_c = 0.0;
    double multiplier = 0.0;  // |h f'(0) w'(0)| = tau_c
    int bisection_steps = 0;
};

ThresholdResult stability_threshold_probe(double c, double tau_lo, double tau_hi, double tol = 1e-6);

}  // namespace kpp
