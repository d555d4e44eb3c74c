#pragma once

#include "kppfront/domain.hpp"
#include "kppfront/mapbounds.hpp"
#include "kppfront/quadrature.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kpp {

/// Constants of the clamped operator A_m. At c = 2 there is no explicit
/// lower solution, so eps = 0 and M = +inf there.
struct OperatorConfig {
    Params params;
    double b = 0.0;
    double beta = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    double eps = 0.0;
    double M = 0.0;
    double eps_prime = 0.0;
};

struct OperatorOverrides {
    std::optional<double> beta;
    std::optional<double> b;
    std::optional<double> eps;
    std::optional<double> M;
};

/// beta = max(2 U_e, e^{ch}) + 1, b = 2 beta + 3, eps = min(lambda, mu - lambda) / 2,
/// M = max(2, 2 / (-chi(lambda + eps))). Overrides are checked against the
/// invariants and rejected with DomainError when they break them.
OperatorConfig make_operator_config(const Params& p, const OperatorOverrides& ov = {});

double g_clamp(double u, double beta);
double r_nonlinearity(double u, double v, const OperatorConfig& cfg);

double lower_solution_value(const OperatorConfig& cfg, double t);
double upper_solution_value(const OperatorConfig& cfg, double t);
/// Coefficient K of e^{lambda t} - K e^{mu t} below the clamp level (c > 2).
double upper_solution_K(const OperatorConfig& cfg);

GridProfile lower_solution(const OperatorConfig& cfg, const FrontGrid& g);
GridProfile upper_solution(const OperatorConfig& cfg, const FrontGrid& g);

/// Integral operators on a sampled profile. The lag must be resolved by the
/// grid or lie inside its interpolation range; values before t0 come from the
/// left tail model and the region beyond t_end from the constant right limit.
GridProfile apply_B(const GridProfile& phi, const Params& p, QuadratureOrder order = QuadratureOrder::Cubic);
GridProfile apply_B2(const GridProfile& phi, const Params& p, QuadratureOrder order = QuadratureOrder::Cubic);
/// With cone_check set, the input must satisfy lower <= phi <= upper (up to
/// 1e-9 relative slack) or DomainError is thrown.
GridProfile apply_Am(const GridProfile& phi, const OperatorConfig& cfg, bool cone_check = false,
                     QuadratureOrder order = QuadratureOrder::Cubic);

/// phi(t - h) at every grid node.
Eigen::VectorXd delayed_values(const GridProfile& phi, double h);

/// phi'' - c phi' + phi (1 - phi(t - h)) on nodes 2..n-3 (zero elsewhere),
/// derivatives by 4th-order central differences.
Eigen::VectorXd ode_residual(const GridProfile& phi, const Params& p);
/// x'' - x'^2 - c x' - 1 + e^{-x(t-h)} for x = -ln phi, on interior nodes
/// with phi > floor (zero elsewhere).
Eigen::VectorXd log_residual(const GridProfile& phi, const Params& p, double floor);
/// sup |B phi - phi| (B2 at c = 2) over nodes 0..n-2.
double fixed_point_residual(const GridProfile& phi, const Params& p);

struct TailReport {
    enum class Side { Left, Right };
    Side side = Side::Left;
    bool available = false;
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();
    double fitted_coefficient = std::numeric_limits<double>::quiet_NaN();
    double predicted_rate = std::numeric_limits<double>::quiet_NaN();
    double predicted_coefficient = std::numeric_limits<double>::quiet_NaN();
    double relative_rate_error = std::numeric_limits<double>::quiet_NaN();
    double relative_coefficient_error = std::numeric_limits<double>::quiet_NaN();
    bool polynomial_factor_detected = false;
    int samples = 0;
    std::string note;
};

/// Left tail: log-linear fit over samples below 1e-6, compared with lambda
/// and with the coefficient integral (c > 2). Right tail: fit of 1 - phi over
/// [1e-12, 1e-6], compared with |lambda_0| when psi has a negative zero.
/// Throws DomainError when a side has fewer than 50 usable samples.
std::pair<TailReport, TailReport> tail_asymptotics(const GridProfile& phi, const Params& p);

struct FrontOptions {
    double tol = 1e-8;
    int max_iter = 5000;
    int max_newton = 60;
    GridOptions grid;
    OperatorOverrides ops;
    /// Initial-guess family for semi_wavefront (0, 1, 2, ...).
    int seed = 0;
    /// Compute tail reports (needs >= 50 tail samples on each side).
    bool tails = true;
};

struct FrontReport {
    std::string mode;
    bool converged = false;
    int iterations = 0;
    int newton_steps = 0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double ode_residual = std::numeric_limits<double>::quiet_NaN();
    double log_residual = std::numeric_limits<double>::quiet_NaN();
    double am_residual = std::numeric_limits<double>::quiet_NaN();
    double increment = std::numeric_limits<double>::quiet_NaN();
    /// Most negative pointwise change phi_{j+1} - phi_j seen (0 if none).
    double min_increment = 0.0;
    double boundary_mismatch = std::numeric_limits<double>::quiet_NaN();
    bool monotone_iterates = true;
    bool monotone_profile = false;
    bool positive = false;
    double normalized_shift = 0.0;
    double beta_used = 0.0;
    bool clamp_active = false;
    double max_value = 0.0;
    double limit_left = std::numeric_limits<double>::quiet_NaN();
    double limit_right = std::numeric_limits<double>::quiet_NaN();
    std::optional<bool> cone_ok;
    std::optional<MapBounds> bounds_box;
    std::optional<TailReport> left_tail;
    std::optional<TailReport> right_tail;
    std::vector<double> history;
    std::vector<std::string> warnings;
};

struct FrontResult {
    GridProfile profile;
    FrontReport report;
};

/// Thrown when an iteration exhausts its budget; carries the partial report.
class NonConvergence : public ComputeError {
public:
    NonConvergence(const std::string& what, FrontReport r) : ComputeError(what), report(std::move(r)) {}
    FrontReport report;
};

/// Monotone front: B (B2 at c = 2) iterated from max(0, 1 - e^{lambda_0 t}),
/// checked to increase pointwise in j, then polished by Newton on the same
/// discrete fixed-point equation. Throws AdmissibilityError for c < 2 and
/// ComputeError when the iterates stop increasing.
FrontResult monotone_front(const Params& p, const FrontOptions& opt = {});

/// Bounded positive solution of phi = B phi (phi = A_m phi while phi < beta),
/// found by Newton from a logistic seed with continuation in tau as fallback.
FrontResult semi_wavefront(const Params& p, const FrontOptions& opt = {});

struct UniquenessProbe {
    int seeds = 0;
    int converged = 0;
    double max_deviation = std::numeric_limits<double>::quiet_NaN();
};

/// Solve from several seeds and compare the shift-aligned profiles.
UniquenessProbe uniqueness_probe(const Params& p, const FrontOptions& opt = {}, int seeds = 3);

}  // namespace kpp
