#pragma once

#include "kppfront/domain.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace kpp {

enum class InitialKind { Bump, Step, Ramp, Custom };
enum class TimeScheme { Imex, Explicit };

struct SimConfig {
    double x_min = 0.0;
    double x_max = 450.0;
    double dx = 0.2;
    double dt_step = 0.02;
    double T_end = 200.0;
    double tau = 0.3;
    InitialKind initial = InitialKind::Bump;
    double bump_height = 0.5;
    double bump_width = 5.0;   // support [x_min, x_min + width]
    double step_edge = 10.0;   // u0 = 1 left of x_min + step_edge
    /// Ramp: u0 = min(1, exp(-kappa (x - x_min - step_edge))) with
    /// kappa + 1/kappa = ramp_speed, which launches a front at that speed.
    double ramp_speed = 3.0;
    std::vector<double> custom;  // samples on the grid (Custom)
    /// u(s, x) for s in [-tau, 0); the t = 0 profile held constant when empty.
    std::function<double(double, double)> history;
    TimeScheme scheme = TimeScheme::Imex;
    /// Time between stored field rows (rounded to whole steps).
    double snapshot_every = 0.5;
    /// Abort when the level-1/2 position comes within this distance of x_max.
    double boundary_margin = 10.0;
};

/// Stored rows u(t_k, x_j), t_k = k * dt_row, x_j = x0 + j * dx.
struct SimField {
    double x0 = 0.0;
    double dx = 0.0;
    double dt_row = 0.0;
    double dt_step = 0.0;
    double tau = 0.0;
    std::vector<double> times;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> u;

    Eigen::Index nx() const { return u.cols(); }
    Eigen::Index nt() const { return u.rows(); }
    double x(Eigen::Index j) const { return x0 + dx * static_cast<double>(j); }
};

struct SimDiagnostics {
    long steps = 0;
    double min_value = 0.0;
    double max_value = 0.0;
};

struct SimResult {
    SimField field;
    SimDiagnostics diag;
};

/// Throws DomainError for inconsistent configurations (tau not a multiple of
/// dt_step, CFL violation in explicit mode, bad custom data) and ComputeError
/// on negativity below -1e-12, non-finite values or boundary contact.
SimResult simulate(const SimConfig& cfg);

struct SpeedEstimate {
    double level = 0.5;
    std::vector<double> times;
    std::vector<double> positions;
    double fitted_speed = 0.0;
    /// +1 when the level set moves towards larger x.
    int direction = 1;
    double fit_from = 0.0;
    double fit_to = 0.0;
    double r_squared = 0.0;
};

/// Position of the level set on the side facing the zero state, or NaN when
/// the row does not cross the level.
double level_position(const SimField& f, Eigen::Index row, double level);

/// Least-squares slope of the level-set position over the final third of the
/// record. Throws ComputeError when the level set is missing or moves
/// non-monotonically inside the fit window.
SpeedEstimate measure_speed(const SimField& f, double level = 0.5);

struct AmplitudeRecord {
    std::vector<double> times;
    std::vector<double> amplitudes;  // |u - 1| at successive extrema
    bool inconclusive = false;
    bool decaying = false;
    bool sustained = false;
};

/// Extrema of u(., x_probe) - 1 after the front has passed the probe.
AmplitudeRecord wake_oscillation_amplitude(const SimField& f, double x_probe, double tol = 1e-3);

/// Min and max of u behind the level set (points the front has passed) over
/// rows with t >= t_from.
struct WakeRange {
    double lo = 0.0;
    double hi = 0.0;
    long samples = 0;
};
WakeRange wake_range(const SimField& f, double level = 0.5, double t_from = 0.0);

}  // namespace kpp
