#pragma once

#include "kppfront/domain.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace kpp {

/// psi(z) = z^2 - c z - exp(-z h), the characteristic function at the
/// positive steady state.
template <typename Scalar>
std::complex<Scalar> eval_psi(const std::complex<Scalar>& z, Scalar c, Scalar h) {
    return z * z - c * z - std::exp(-z * h);
}

template <typename Scalar>
std::complex<Scalar> eval_dpsi(const std::complex<Scalar>& z, Scalar c, Scalar h) {
    return Scalar(2) * z - c + h * std::exp(-z * h);
}

template <typename Scalar>
Scalar psi_real(Scalar x, Scalar c, Scalar h) {
    return x * x - c * x - std::exp(-x * h);
}

template <typename Scalar>
Scalar dpsi_real(Scalar x, Scalar c, Scalar h) {
    return Scalar(2) * x - c + h * std::exp(-x * h);
}

/// chi(z) = z^2 - c z + 1, the characteristic function at 0.
template <typename Scalar>
Scalar chi(Scalar z, Scalar c) {
    return z * z - c * z + Scalar(1);
}

inline std::complex<double> eval_psi(std::complex<double> z, const Params& p) {
    return eval_psi<double>(z, p.c, p.h());
}

struct RatePair {
    double lambda = 0.0;
    double mu = 0.0;
};

/// Roots 0 < lambda <= mu of z^2 - c z + 1. Throws DomainError for c < 2.
RatePair chi_roots(double c);

struct ShiftRoots {
    double z1 = 0.0;  // < 0
    double z2 = 0.0;  // > 0
};

/// Roots z1 < 0 < z2 of z^2 - c z - b. Throws DomainError for b <= 0.
ShiftRoots quadratic_roots_b(double c, double b);

struct CharRoot {
    double re = 0.0;
    double im = 0.0;
    int strip_index = 0;
    int multiplicity = 1;
    double residual = 0.0;
};

/// Critical speed value with explicit sentinels. BelowMinimal carries the
/// continued (c < 2) value of the defining equations in `value`.
struct CriticalSpeed {
    enum class Kind { Finite, Infinite, BelowMinimal };
    Kind kind = Kind::Infinite;
    double value = 0.0;

    bool infinite() const { return kind == Kind::Infinite; }
    /// Speed usable in comparisons: +inf for the sentinel.
    double as_double() const;
};

inline constexpr double kTau1 = 0.560771160;
/// Delay at which c_starstar reaches 2: arccos(2 - sqrt 5) / (2 sqrt(sqrt 5 - 2)).
double tau2();

/// Real zeros of psi: lambda_{-1} > 0 (strip -1) first, then the negative
/// zeros lambda_0 >= lambda_1 when they exist. A double negative zero is
/// reported once with multiplicity 2. At tau = 0 psi is the quadratic
/// z^2 - c z - 1 and its single negative zero is returned with strip 0.
struct RealRootOptions {
    double merge_radius = 1e-8;
    /// A negative critical point with |psi| below this is a double zero.
    double merge_value = 1e-8;
};
std::vector<CharRoot> real_roots_psi(const Params& p, const RealRootOptions& opt = {});

/// The leading negative zero lambda_0 (throws ComputeError if psi has no
/// negative real zero, i.e. c > C*(tau)).
double lambda0_real(const Params& p);

/// Largest speed with two negative real zeros of psi.
CriticalSpeed c_star(double tau);

/// Double-zero point (x, c) solving psi = psi_z = 0 for tau > 1/e.
struct DoubleRoot {
    double x = 0.0;
    double c = 0.0;
    double residual = 0.0;  // max(|psi|, |psi_z|)
};
DoubleRoot double_root_point(double tau);

/// Hopf frequency omega(c) with omega^2 = (sqrt(c^4 + 4) - c^2) / 2.
double hopf_omega(double c);
/// tau(c) = arccos(-omega^2) / (c omega): the delay at which lambda_0 is purely imaginary.
double hopf_tau(double c);

/// Speed at which lambda_0 crosses the imaginary axis.
CriticalSpeed c_starstar(double tau);

struct RootSearchOptions {
    int boundary_samples = 4096;
    double newton_tol = 1e-12;
    double merge_radius = 1e-8;
};

/// One zero per strip j = 0..j_max with h Im in (2 j pi, (2 j + 1) pi).
/// Requires c > C*(tau) so that psi has no negative real zeros.
std::vector<CharRoot> complex_roots_in_strips(const Params& p, int j_max, const RootSearchOptions& opt = {});

/// Net number of zeros of psi inside the rectangle, by the argument principle.
int count_zeros_in_box(const Params& p, double re_lo, double re_hi, double im_lo, double im_hi,
                       int samples = 4096);

/// Closed form Re lambda'(c0) at a crossing triple; throws DomainError when
/// cos(c0 tau w) = -w^2, sin(c0 tau w) = c0 w fails by more than tol.
double transversality(double c0, double tau, double w, double tol = 1e-8);

template <typename Scalar>
Scalar transversality_formula(Scalar c, Scalar tau, Scalar w) {
    Scalar a = Scalar(1) + tau * w * w;
    Scalar b = c * c * tau - Scalar(2);
    return Scalar(2) * w * w * a / (c * c * a * a + w * w * b * b);
}

}  // namespace kpp
