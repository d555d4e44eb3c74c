#include "kppfront/mapbounds.hpp"

#include <algorithm>
#include <cmath>

namespace kpp {

MapBounds apriori_bounds(const Params& p) {
    if (!(p.c >= 2.0)) throw AdmissibilityError("a priori bounds need c >= 2");
    const double c = p.c, h = p.h();
    if (!(h > 0.0)) throw DomainError("a priori bounds need h > 0");
    MapBounds b;
    b.B_star = -2.0 * h / (c + std::sqrt((c - 2.0) * (c + 2.0)));
    b.L = std::min(-c * h, b.B_star);
    b.U = h * f_bound(std::expm1(-b.L), c);
    b.L_e = std::exp(-b.U);
    b.U_e = std::exp(-b.L);
    return b;
}

double map_step(double x, const Params& p) { return p.h() * f_bound(w_map(x), p.c); }

MapOrbit map_iterate(double M0, const Params& p, int k) {
    if (!(p.c >= 2.0)) throw AdmissibilityError("map iteration needs c >= 2");
    MapOrbit o;
    o.orbit.reserve(2 * static_cast<size_t>(k) + 1);
    o.even.reserve(static_cast<size_t>(k) + 1);
    double x = M0;
    o.orbit.push_back(x);
    o.even.push_back(x);
    for (int i = 0; i < k; ++i) {
        x = map_step(x, p);
        o.orbit.push_back(x);
        x = map_step(x, p);
        o.orbit.push_back(x);
        o.even.push_back(x);
    }
    return o;
}

TwoCycle find_two_cycle(const Params& p, double lo, double hi, int grid) {
    if (hi <= 0.0) hi = apriori_bounds(p).U;
    auto G = [&p](double x) { return map_step(map_step(x, p), p) - x; };
    TwoCycle r;
    // Scan downward from the top so the outermost cycle is found first.
    double prev_x = hi, prev_g = G(hi);
    for (int i = grid - 1; i >= 0; --i) {
        double x = lo * std::pow(hi / lo, static_cast<double>(i) / (grid - 1));
        double g = G(x);
        if ((g > 0.0) != (prev_g > 0.0)) {
            double a = x, b = prev_x, ga = g;
            for (int it = 0; it < 200; ++it) {
                double m = 0.5 * (a + b);
                if (m <= a || m >= b) break;
                double gm = G(m);
                if ((gm > 0.0) == (ga > 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            r.x = std::abs(G(a)) < std::abs(G(b)) ? a : b;
            r.found = true;
            r.partner = map_step(r.x, p);
            r.residual = std::abs(G(r.x));
            return r;
        }
        prev_x = x;
        prev_g = g;
    }
    return r;
}

ThresholdResult stability_threshold_probe(double c, double tau_lo, double tau_hi, double tol) {
    if (!(tau_lo < tau_hi)) throw DomainError("need tau_lo < tau_hi");
    if (!(c >= 2.0)) throw AdmissibilityError("threshold probe needs c >= 2");
    auto has_cycle = [c](double tau) { return find_two_cycle(Params{c, tau}).found; };
    bool lo_c = has_cycle(tau_lo), hi_c = has_cycle(tau_hi);
    if (lo_c == hi_c) throw ComputeError("no change in 2-cycle existence across the tau bracket");
    ThresholdResult r;
    double a = tau_lo, b = tau_hi;
    while (b - a > tol && r.bisection_steps < 200) {
        double m = 0.5 * (a + b);
        if (has_cycle(m) == lo_c) a = m; else b = m;
        ++r.bisection_steps;
    }
    // Report the side of the bracket on which the cycle exists.
    r.tau_c = lo_c ? a : b;
    r.multiplier = r.tau_c;
    return r;
}

}  // namespace kpp
