#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace kpp {

/// Bad input to an operation (negative delay, c < 2 for chi roots, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The parameter pair lies outside the region where fronts can exist.
class AdmissibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce an answer within its budget.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Params {
    double c = 2.0;
    double tau = 0.0;

    double h() const { return c * tau; }
    /// Fronts (and semi-wavefronts) exist only for c >= 2.
    bool admissible() const { return c >= 2.0; }
};

Params make_params(double c, double tau);

/// phi(t) ~ coefficient * (-t)^poly_degree * exp(rate * t) as t -> -inf.
struct LeftTail {
    double coefficient = 0.0;
    double rate = 0.0;
    int poly_degree = 0;
};

struct RightTail {
    enum class Kind { ConstantLimit, ExponentialGrowth };
    Kind kind = Kind::ConstantLimit;
    double limit = 1.0;  // used when kind == ConstantLimit
    double rate = 0.0;   // used when kind == ExponentialGrowth
};

/// Uniform samples t_i = t0 + i*dt of a non-negative profile.
struct GridProfile {
    double t0 = 0.0;
    double dt = 1.0;
    Eigen::VectorXd values;
    LeftTail left;
    RightTail right;
    std::optional<Params> params;

    Eigen::Index size() const { return values.size(); }
    double t(Eigen::Index i) const { return t0 + dt * static_cast<double>(i); }
    double t_end() const { return t(size() - 1); }
    Eigen::VectorXd times() const;

    /// Cubic (4-point Lagrange) interpolation inside the grid, tail models outside.
    double at(double t) const;
    /// Value of the left tail model at t (used for delayed lookups before t0).
    double left_model(double t) const;
};

/// Throws DomainError if dt <= 0, any value is negative or non-finite, or a
/// constant right tail is not reached by the last 10% of samples within tol.
void validate(const GridProfile& p, double limit_tol = 1e-6);

/// True when the right tail is constant 1 and the last 10% of samples are
/// within tol of it.
bool is_wavefront_candidate(const GridProfile& p, double tol = 1e-6);

struct LogProfile {
    double t0 = 0.0;
    double dt = 1.0;
    Eigen::VectorXd values;  // x_i = -ln(phi_i)
};

LogProfile to_log_profile(const GridProfile& p);
Eigen::VectorXd from_log_values(const LogProfile& x);

/// Shift the profile so that phi(0) = level on its leading edge. The grid is
/// kept; samples are re-interpolated. Returns the applied shift s, i.e. the
/// new profile is old(t + s).
double normalize_shift(GridProfile& p, double level = 0.5);

/// First t where the profile crosses `level` from below, sub-grid accurate.
double leading_crossing(const GridProfile& p, double level = 0.5);

/// Computational grid for profile solves: 0 is always a node. The lag h is an
/// exact multiple nh of dt unless h is so small that this would force dt
/// below the floor; then nh = 0 and delayed values are interpolated.
struct FrontGrid {
    double dt = 0.0;
    Eigen::Index n = 0;
    Eigen::Index i0 = 0;  // index of t = 0
    int nh = 0;           // lag in grid steps (0 when h == 0 or fractional)

    double t(Eigen::Index i) const { return dt * static_cast<double>(i - i0); }
    double t0() const { return t(0); }
    double t_end() const { return t(n - 1); }
};

struct GridOptions {
    int nh = 64;                     // samples per lag
    double dt_floor = 1.0 / 256.0;   // smallest dt; nh shrinks for small lags
    double dt_no_delay = 1.0 / 64.0; // dt used when h == 0
    double t_min = 0.0;          // 0 means "derive from the left rate"
    double t_max = 0.0;          // 0 means "derive from the right rate"
    double clip = 200.0;
};

/// Window [-40/left_rate, 40/right_rate] clipped to [-clip, clip] unless the
/// options pin it.
FrontGrid make_front_grid(const Params& p, double left_rate, double right_rate,
                          const GridOptions& opt = {});

}  // namespace kpp
