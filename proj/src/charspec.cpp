#include "kppfront/charspec.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace kpp {

namespace {

constexpr double kPi = std::numbers::pi;

/// Bisection on a sign change of f over [a, b]; fa and fb must differ in sign.
double bisect(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 300; ++it) {
        double m = 0.5 * (a + b);
        if (m <= std::min(a, b) || m >= std::max(a, b)) break;
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

CharRoot real_root(double x, const Params& p, int strip, int mult) {
    return CharRoot{x, 0.0, strip, mult, std::abs(psi_real(x, p.c, p.h()))};
}

}  // namespace

double CriticalSpeed::as_double() const {
    return kind == Kind::Infinite ? std::numeric_limits<double>::infinity() : value;
}

double tau2() {
    const double s5 = std::sqrt(5.0);
    return std::acos(2.0 - s5) / (2.0 * std::sqrt(s5 - 2.0));
}

RatePair chi_roots(double c) {
    if (!(c >= 2.0)) throw DomainError("chi has complex roots for c < 2");
    double d = std::sqrt((c - 2.0) * (c + 2.0));
    double mu = 0.5 * (c + d);
    return RatePair{1.0 / mu, mu};
}

ShiftRoots quadratic_roots_b(double c, double b) {
    if (!(b > 0.0)) throw DomainError("shift b must be positive");
    double d = std::sqrt(c * c + 4.0 * b);
    if (c >= 0.0) {
        double z2 = 0.5 * (c + d);
        return ShiftRoots{-b / z2, z2};
    }
    double z1 = 0.5 * (c - d);
    return ShiftRoots{z1, -b / z1};
}

std::vector<CharRoot> real_roots_psi(const Params& p, const RealRootOptions& opt) {
    const double c = p.c, h = p.h();
    std::vector<CharRoot> out;
    if (h == 0.0) {
        double zp = 0.5 * (c + std::sqrt(c * c + 4.0));
        out.push_back(real_root(zp, p, -1, 1));
        out.push_back(real_root(-1.0 / zp, p, 0, 1));
        return out;
    }
    auto f = [&](double x) { return psi_real(x, c, h); };
    auto df = [&](double x) { return dpsi_real(x, c, h); };

    // psi(0) = -1 and psi(R) > 0 once R exceeds the positive root of z^2 - c z - 1.
    double R = 0.5 * (c + std::sqrt(c * c + 4.0)) + 1.0;
    out.push_back(real_root(bisect(f, 0.0, R), p, -1, 1));

    // psi' is convex with its minimum at z_m; the maximum of psi on the
    // negative axis sits at the leftmost zero of psi'.
    double zm = std::log(h * h / 2.0) / h;
    double zr = std::min(0.0, zm);
    if (df(zr) >= 0.0) return out;
    double a = zr - 1.0;
    while (df(a) <= 0.0) a = zr - 2.0 * (zr - a);
    double zs = bisect(df, a, zr);
    double top = f(zs);
    if (top < -opt.merge_value) return out;
    if (top <= opt.merge_value) {
        out.push_back(real_root(zs, p, 0, 2));
        return out;
    }
    double lo = zs - 1.0;
    while (f(lo) >= 0.0) lo = zs - 2.0 * (zs - lo);
    double l1 = bisect(f, lo, zs);
    double l0 = bisect(f, zs, 0.0);
    if (std::abs(l0 - l1) <= opt.merge_radius) {
        out.push_back(real_root(0.5 * (l0 + l1), p, 0, 2));
    } else {
        out.push_back(real_root(l0, p, 0, 1));
        out.push_back(real_root(l1, p, 1, 1));
    }
    return out;
}

double lambda0_real(const Params& p) {
    auto roots = real_roots_psi(p);
    if (roots.size() < 2) throw ComputeError("psi has no negative real zero at these parameters");
    return roots[1].re;
}

DoubleRoot double_root_point(double tau) {
    if (!(tau > std::exp(-1.0))) throw DomainError("no double negative zero for tau <= 1/e");
    // With s = -x h the double-zero conditions reduce to
    // tau = s e^{-s} / (2 - s) on s in (1, 2), which is increasing in s.
    auto g = [tau](double s) { return std::log(s) - s - std::log(2.0 - s) - std::log(tau); };
    double s = bisect(g, 1.0 + 1e-300, 2.0 - 1e-16);
    double c = (2.0 - s) * std::exp(0.5 * s) / std::sqrt(s - 1.0);
    double x = -std::sqrt((s - 1.0) * std::exp(s));

    // Newton polish on (psi, psi_z) = 0 in the unknowns (x, c).
    auto residual = [tau](double xx, double cc) {
        double e = std::exp(-xx * cc * tau);
        return Eigen::Vector2d(xx * xx - cc * xx - e, 2.0 * xx - cc + cc * tau * e);
    };
    Eigen::Vector2d r = residual(x, c);
    for (int it = 0; it < 8 && r.cwiseAbs().maxCoeff() > 1e-15; ++it) {
        double e = std::exp(-x * c * tau);
        Eigen::Matrix2d J;
        J(0, 0) = 2.0 * x - c + c * tau * e;
        J(0, 1) = -x + x * tau * e;
        J(1, 0) = 2.0 - c * c * tau * tau * e;
        J(1, 1) = -1.0 + tau * e - c * tau * x * tau * e;
        Eigen::Vector2d step = J.partialPivLu().solve(r);
        Eigen::Vector2d rn = residual(x - step[0], c - step[1]);
        if (!(rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff())) break;
        x -= step[0];
        c -= step[1];
        r = rn;
    }
    return DoubleRoot{x, c, r.cwiseAbs().maxCoeff()};
}

CriticalSpeed c_star(double tau) {
    if (!(tau >= 0.0)) throw DomainError("delay must be >= 0");
    if (tau <= std::exp(-1.0)) return CriticalSpeed{CriticalSpeed::Kind::Infinite, 0.0};
    DoubleRoot d = double_root_point(tau);
    auto kind = d.c >= 2.0 ? CriticalSpeed::Kind::Finite : CriticalSpeed::Kind::BelowMinimal;
    return CriticalSpeed{kind, d.c};
}

double hopf_omega(double c) {
    // (sqrt(c^4+4) - c^2)/2 in cancellation-free form.
    return std::sqrt(2.0 / (std::sqrt(c * c * c * c + 4.0) + c * c));
}

double hopf_tau(double c) {
    double w = hopf_omega(c);
    return std::acos(-w * w) / (c * w);
}

CriticalSpeed c_starstar(double tau) {
    if (!(tau >= 0.0)) throw DomainError("delay must be >= 0");
    if (tau <= kPi / 2.0) return CriticalSpeed{CriticalSpeed::Kind::Infinite, 0.0};
    // hopf_tau decreases from +inf (c -> 0) to pi/2 (c -> inf).
    double hi = 2.0;
    while (hopf_tau(hi) >= tau) hi *= 2.0;
    double lo = 2.0;
    while (hopf_tau(lo) <= tau) lo *= 0.5;
    double c = bisect([tau](double cc) { return hopf_tau(cc) - tau; }, lo, hi);
    auto kind = c >= 2.0 - 1e-12 ? CriticalSpeed::Kind::Finite : CriticalSpeed::Kind::BelowMinimal;
    return CriticalSpeed{kind, c};
}

namespace {

using cd = std::complex<double>;

/// Accumulated change of arg(psi) along the segment a -> b with adaptive
/// refinement where a single step turns by more than pi/3.
double arg_change(const Params& p, cd a, cd b, cd fa, cd fb, int depth) {
    double d = std::arg(fb / fa);
    if (std::abs(d) <= kPi / 3.0 || depth > 48) return d;
    cd m = 0.5 * (a + b);
    cd fm = eval_psi(m, p);
    if (std::abs(fm) == 0.0) throw ComputeError("characteristic zero on a search contour");
    return arg_change(p, a, m, fa, fm, depth + 1) + arg_change(p, m, b, fm, fb, depth + 1);
}

double contour_winding(const Params& p, const std::vector<cd>& corners, int samples) {
    double total_len = 0.0;
    for (size_t k = 0; k < corners.size(); ++k) total_len += std::abs(corners[(k + 1) % corners.size()] - corners[k]);
    double acc = 0.0;
    for (size_t k = 0; k < corners.size(); ++k) {
        cd a = corners[k], b = corners[(k + 1) % corners.size()];
        int m = std::max(64, static_cast<int>(samples * std::abs(b - a) / total_len));
        cd prev = a;
        cd fprev = eval_psi(prev, p);
        if (std::abs(fprev) == 0.0) throw ComputeError("characteristic zero on a search contour");
        for (int i = 1; i <= m; ++i) {
            cd z = a + (b - a) * (static_cast<double>(i) / m);
            cd fz = eval_psi(z, p);
            if (std::abs(fz) == 0.0) throw ComputeError("characteristic zero on a search contour");
            acc += arg_change(p, prev, z, fprev, fz, 0);
            prev = z;
            fprev = fz;
        }
    }
    return acc / (2.0 * kPi);
}

struct Box {
    double re_lo, re_hi, im_lo, im_hi;
};

int count_box(const Params& p, const Box& b, int samples) {
    std::vector<cd> corners = {cd(b.re_lo, b.im_lo), cd(b.re_hi, b.im_lo), cd(b.re_hi, b.im_hi), cd(b.re_lo, b.im_hi)};
    return static_cast<int>(std::lround(contour_winding(p, corners, samples)));
}

bool newton(const Params& p, cd& z, double tol) {
    cd f = eval_psi(z, p);
    for (int it = 0; it < 100; ++it) {
        if (std::abs(f) <= tol) return true;
        cd df = eval_dpsi<double>(z, p.c, p.h());
        if (std::abs(df) == 0.0) return false;
        cd step = f / df;
        double t = 1.0;
        cd zn = z - step;
        cd fn = eval_psi(zn, p);
        while (!(std::abs(fn) < std::abs(f)) && t > 1e-6) {
            t *= 0.5;
            zn = z - t * step;
            fn = eval_psi(zn, p);
        }
        if (!(std::abs(fn) < std::abs(f))) return std::abs(f) <= 1e3 * tol;
        z = zn;
        f = fn;
    }
    return std::abs(f) <= tol;
}

void locate(const Params& p, const Box& b, int count, int samples, double tol, std::vector<cd>& out, int depth) {
    if (count <= 0) return;
    double w = b.re_hi - b.re_lo, hgt = b.im_hi - b.im_lo;
    if (count == 1 && (std::max(w, hgt) < 0.5 || depth > 40)) {
        cd z(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi));
        double pad = 1e-9 * (1.0 + std::max(w, hgt));
        if (newton(p, z, tol) && z.real() >= b.re_lo - pad && z.real() <= b.re_hi + pad &&
            z.imag() >= b.im_lo - pad && z.imag() <= b.im_hi + pad) {
            out.push_back(z);
            return;
        }
        if (depth > 60) throw ComputeError("Newton refinement failed inside an isolating box");
    }
    // Split the longer side; nudge the cut until both halves count cleanly.
    for (double frac : {0.5, 0.4871, 0.5237, 0.4519}) {
        Box l = b, r = b;
        if (w >= hgt) {
            double cut = b.re_lo + frac * w;
            l.re_hi = cut;
            r.re_lo = cut;
        } else {
            double cut = b.im_lo + frac * hgt;
            l.im_hi = cut;
            r.im_lo = cut;
        }
        int nl, nr;
        try {
            nl = count_box(p, l, samples);
            nr = count_box(p, r, samples);
        } catch (const ComputeError&) {
            continue;
        }
        if (nl < 0 || nr < 0 || nl + nr != count) continue;
        locate(p, l, nl, samples, tol, out, depth + 1);
        locate(p, r, nr, samples, tol, out, depth + 1);
        return;
    }
    throw ComputeError("inconsistent argument-principle counts while isolating zeros");
}

}  // namespace

int count_zeros_in_box(const Params& p, double re_lo, double re_hi, double im_lo, double im_hi, int samples) {
    return count_box(p, Box{re_lo, re_hi, im_lo, im_hi}, samples);
}

std::vector<CharRoot> complex_roots_in_strips(const Params& p, int j_max, const RootSearchOptions& opt) {
    const double c = p.c, h = p.h();
    if (!(h > 0.0)) throw DomainError("strip search needs a positive lag h = c tau");
    if (j_max < 0) throw DomainError("j_max must be >= 0");
    if (real_roots_psi(p).size() > 1)
        throw DomainError("strip search needs c > C*(tau) (psi has negative real zeros here)");

    const double top = (2.0 * j_max + 1.0) * kPi / h;
    // Far enough left that |exp(-z h)| dominates |z^2 - c z| on the whole edge.
    double X = 1.0;
    while (std::exp(X * h) < 4.0 * ((X + top) * (X + top) + c * (X + top)) + 4.0) X *= 2.0;
    const double re_hi = c + 1.0;  // no zeros with Re z >= c + 1
    const double delta = 1e-6 * kPi / h;

    std::vector<cd> found;
    std::vector<int> strip_count(j_max + 1, 0);
    for (int j = 0; j <= j_max; ++j) {
        Box b{-X, re_hi, j == 0 ? delta : 2.0 * j * kPi / h, (2.0 * j + 1.0) * kPi / h};
        int n = count_box(p, b, opt.boundary_samples);
        strip_count[j] = n;
        std::vector<cd> zs;
        locate(p, b, n, opt.boundary_samples, opt.newton_tol, zs, 0);
        found.insert(found.end(), zs.begin(), zs.end());
    }
    // Zeros with Re z > 0 have |z||z - c| < 1, hence |Im z| < 1; some of
    // them may sit between strips.
    for (int g = 0; g <= j_max; ++g) {
        double lo = (2.0 * g + 1.0) * kPi / h, hi = (2.0 * g + 2.0) * kPi / h;
        if (lo >= 1.0) break;
        Box b{0.0, re_hi, lo, std::min(hi, 1.0)};
        int n = count_box(p, b, opt.boundary_samples);
        std::vector<cd> zs;
        locate(p, b, n, opt.boundary_samples, opt.newton_tol, zs, 0);
        found.insert(found.end(), zs.begin(), zs.end());
    }

    std::vector<CharRoot> out(j_max + 1);
    std::vector<bool> filled(j_max + 1, false);
    std::vector<cd> extra;
    for (const cd& z : found) {
        double k = h * z.imag() / (2.0 * kPi);
        int j = static_cast<int>(std::floor(k));
        bool in_strip = (k - j) < 0.5 && j >= 0 && j <= j_max;
        if (in_strip && z.real() <= 0.0 && !filled[j]) {
            out[j] = CharRoot{z.real(), z.imag(), j, 1, std::abs(eval_psi(z, p))};
            filled[j] = true;
        } else {
            extra.push_back(z);
        }
    }
    // Zeros that crossed into Re z > 0: keep their own strip when it is free,
    // otherwise fill the empty strips in order of decreasing real part.
    std::sort(extra.begin(), extra.end(), [](const cd& a, const cd& b) { return a.real() > b.real(); });
    std::vector<cd> rest;
    for (const cd& z : extra) {
        double k = h * z.imag() / (2.0 * kPi);
        int j = static_cast<int>(std::floor(k));
        if ((k - j) < 0.5 && j >= 0 && j <= j_max && !filled[j]) {
            out[j] = CharRoot{z.real(), z.imag(), j, 1, std::abs(eval_psi(z, p))};
            filled[j] = true;
        } else {
            rest.push_back(z);
        }
    }
    size_t next = 0;
    for (int j = 0; j <= j_max; ++j) {
        if (filled[j]) continue;
        if (next >= rest.size())
            throw ComputeError("no characteristic zero located for strip " + std::to_string(j));
        const cd& z = rest[next++];
        out[j] = CharRoot{z.real(), z.imag(), j, 1, std::abs(eval_psi(z, p))};
        filled[j] = true;
    }

    for (int j = 0; j <= j_max; ++j) {
        if (out[j].residual > 1e-10)
            throw ComputeError("zero in strip " + std::to_string(j) + " not refined below 1e-10");
        if (j > 0 && !(out[j].re < out[j - 1].re))
            throw ComputeError("real parts of strip zeros are not strictly decreasing");
    }
    CriticalSpeed css = c_starstar(p.tau);
    if (c > css.as_double()) {
        for (const auto& r : out)
            if (r.re <= 0.0 && !(std::abs(r.im) > 2.0 * kPi / h))
                throw ComputeError("zero with Re <= 0 and |Im| <= 2 pi / h beyond c_starstar");
    }
    return out;
}

double transversality(double c0, double tau, double w, double tol) {
    if (!(w > 0.0)) throw DomainError("crossing frequency must be positive");
    double a = c0 * tau * w;
    if (std::abs(std::cos(a) + w * w) > tol || std::abs(std::sin(a) - c0 * w) > tol)
        throw DomainError("(c0, tau, w) is not a crossing triple");
    return transversality_formula(c0, tau, w);
}

}  // namespace kpp
