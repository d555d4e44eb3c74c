#include "kppfront/pdesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kpp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Thomas factorization of a constant-coefficient tridiagonal matrix with
/// Neumann end rows: diag d, off-diagonals e, except row 0 super = 2e and
/// row n-1 sub = 2e.
class NeumannTridiag {
public:
    NeumannTridiag(Eigen::Index n, double d, double e) : n_(n), sub_(n), cp_(n), m_(n) {
        for (Eigen::Index i = 0; i < n; ++i) sub_[i] = (i == n - 1) ? 2.0 * e : e;
        double sup0 = 2.0 * e;
        m_[0] = d;
        cp_[0] = sup0 / d;
        for (Eigen::Index i = 1; i < n; ++i) {
            m_[i] = d - sub_[i] * cp_[i - 1];
            cp_[i] = (i < n - 1) ? e / m_[i] : 0.0;
        }
    }

    void solve(Eigen::VectorXd& rhs) const {
        rhs[0] /= m_[0];
        for (Eigen::Index i = 1; i < n_; ++i) rhs[i] = (rhs[i] - sub_[i] * rhs[i - 1]) / m_[i];
        for (Eigen::Index i = n_ - 2; i >= 0; --i) rhs[i] -= cp_[i] * rhs[i + 1];
    }

private:
    Eigen::Index n_;
    Eigen::VectorXd sub_, cp_, m_;
};

/// u_{j-1} - 2 u_j + u_{j+1} with mirrored ghosts.
void second_difference(const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    const Eigen::Index n = u.size();
    out[0] = 2.0 * (u[1] - u[0]);
    for (Eigen::Index j = 1; j + 1 < n; ++j) out[j] = u[j - 1] - 2.0 * u[j] + u[j + 1];
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]);
}

Eigen::VectorXd initial_profile(const SimConfig& cfg, Eigen::Index nx) {
    Eigen::VectorXd u(nx);
    if (cfg.initial == InitialKind::Custom) {
        if (static_cast<Eigen::Index>(cfg.custom.size()) != nx)
            throw DomainError("custom initial data must have one sample per grid point");
        for (Eigen::Index j = 0; j < nx; ++j) u[j] = cfg.custom[static_cast<std::size_t>(j)];
        return u;
    }
    double kappa = 0.0;
    if (cfg.initial == InitialKind::Ramp) {
        if (cfg.ramp_speed < 2.0) throw DomainError("ramp_speed must be >= 2");
        kappa = 0.5 * (cfg.ramp_speed - std::sqrt(cfg.ramp_speed * cfg.ramp_speed - 4.0));
    }
    for (Eigen::Index j = 0; j < nx; ++j) {
        double s = cfg.dx * static_cast<double>(j);
        switch (cfg.initial) {
            case InitialKind::Bump: {
                double c = s < cfg.bump_width ? std::cos(0.5 * M_PI * s / cfg.bump_width) : 0.0;
                u[j] = cfg.bump_height * c * c;
                break;
            }
            case InitialKind::Step: u[j] = s < cfg.step_edge ? 1.0 : 0.0; break;
            case InitialKind::Ramp: u[j] = std::min(1.0, std::exp(-kappa * (s - cfg.step_edge))); break;
            case InitialKind::Custom: break;
        }
    }
    return u;
}

long whole_steps(double span, double dt, const char* what) {
    double q = span / dt;
    long k = std::lround(q);
    if (std::abs(q - static_cast<double>(k)) > 1e-9 * std::max(1.0, q))
        throw DomainError(std::string(what) + " must be a whole number of time steps");
    return k;
}

int orientation(const SimField& f, Eigen::Index row, double level) {
    const Eigen::Index n = f.nx();
    bool first = f.u(row, 0) >= level, last = f.u(row, n - 1) >= level;
    if (first && !last) return 1;
    if (!first && last) return -1;
    if (!first && !last && f.u.row(row).maxCoeff() >= level) return 1;
    return 0;
}

}  // namespace

double level_position(const SimField& f, Eigen::Index row, double level) {
    const Eigen::Index n = f.nx();
    int dir = orientation(f, row, level);
    if (dir == 0) return kNaN;
    auto u = [&](Eigen::Index j) { return f.u(row, j); };
    if (dir > 0) {
        Eigen::Index j = n - 1;
        while (j > 0 && u(j) < level) --j;
        double w = (u(j) - level) / (u(j) - u(j + 1));
        return f.x(j) + w * f.dx;
    }
    Eigen::Index j = 0;
    while (j < n - 1 && u(j) < level) ++j;
    double w = (u(j) - level) / (u(j) - u(j - 1));
    return f.x(j) - w * f.dx;
}

SimResult simulate(const SimConfig& cfg) {
    if (!(cfg.dx > 0.0) || !(cfg.dt_step > 0.0) || !(cfg.T_end > 0.0) || !(cfg.x_max > cfg.x_min))
        throw DomainError("simulate: dx, dt_step, T_end must be positive and x_max > x_min");
    if (cfg.tau < 0.0) throw DomainError("simulate: tau must be >= 0");
    const long m = whole_steps(cfg.tau, cfg.dt_step, "tau");
    const long nsteps = std::lround(cfg.T_end / cfg.dt_step);
    const double r = cfg.dt_step / (cfg.dx * cfg.dx);
    if (cfg.scheme == TimeScheme::Explicit && r > 0.5)
        throw DomainError("explicit scheme needs dt_step <= dx^2 / 2");
    const auto nx = static_cast<Eigen::Index>(std::lround((cfg.x_max - cfg.x_min) / cfg.dx)) + 1;
    if (nx < 3) throw DomainError("simulate: the window needs at least 3 grid points");
    const long stride = std::max(1L, std::lround(cfg.snapshot_every / cfg.dt_step));

    Eigen::VectorXd u = initial_profile(cfg, nx);
    if (!u.allFinite() || u.minCoeff() < 0.0) throw DomainError("initial data must be finite and non-negative");

    // Ring buffer with the last m + 1 time levels; slot k mod (m + 1) holds step k.
    const long slots = m + 1;
    std::vector<Eigen::VectorXd> ring(static_cast<std::size_t>(slots), u);
    auto slot = [slots](long k) { return static_cast<std::size_t>(((k % slots) + slots) % slots); };
    if (cfg.history) {
        for (long k = -m; k < 0; ++k) {
            Eigen::VectorXd& v = ring[slot(k)];
            for (Eigen::Index j = 0; j < nx; ++j)
                v[j] = cfg.history(cfg.dt_step * static_cast<double>(k), cfg.x_min + cfg.dx * static_cast<double>(j));
        }
    }

    SimResult res;
    SimField& f = res.field;
    f.x0 = cfg.x_min;
    f.dx = cfg.dx;
    f.dt_step = cfg.dt_step;
    f.dt_row = cfg.dt_step * static_cast<double>(stride);
    f.tau = cfg.tau;
    const long rows = nsteps / stride + 1;
    f.u.resize(rows, nx);
    f.u.row(0) = u.transpose();
    f.times.push_back(0.0);

    NeumannTridiag implicit(nx, 1.0 + r, -0.5 * r);
    Eigen::VectorXd lap(nx), rhs(nx);
    double lo = u.minCoeff(), hi = u.maxCoeff();
    for (long n = 0; n < nsteps; ++n) {
        const Eigen::VectorXd& cur = ring[slot(n)];
        const Eigen::VectorXd& lag = ring[slot(n - m)];
        second_difference(cur, lap);
        rhs = cur.cwiseProduct((1.0 - lag.array()).matrix()) * cfg.dt_step;
        rhs += r * lap;
        // IMEX solves for the increment so that constant states stay exact.
        if (cfg.scheme == TimeScheme::Imex) implicit.solve(rhs);
        Eigen::VectorXd& next = ring[slot(n + 1)];
        next = cur + rhs;
        double mn = next.minCoeff();
        if (!next.allFinite()) throw ComputeError("simulate: non-finite values at step " + std::to_string(n + 1));
        if (mn < -1e-12) throw ComputeError("simulate: negativity beyond -1e-12 at step " + std::to_string(n + 1));
        lo = std::min(lo, mn);
        hi = std::max(hi, next.maxCoeff());
        if ((n + 1) % stride == 0) {
            const Eigen::Index row = (n + 1) / stride;
            f.u.row(row) = next.transpose();
            f.times.push_back(cfg.dt_step * static_cast<double>(n + 1));
            double pos = level_position(f, row, 0.5);
            if (std::isfinite(pos)) {
                int dir = orientation(f, row, 0.5);
                if ((dir > 0 && pos > cfg.x_max - cfg.boundary_margin) ||
                    (dir < 0 && pos < cfg.x_min + cfg.boundary_margin))
                    throw ComputeError("simulate: the front reached the boundary layer; widen the window");
            }
        }
    }
    f.u.conservativeResize(static_cast<Eigen::Index>(f.times.size()), nx);
    res.diag.steps = nsteps;
    res.diag.min_value = lo;
    res.diag.max_value = hi;
    return res;
}

SpeedEstimate measure_speed(const SimField& f, double level) {
    SpeedEstimate s;
    s.level = level;
    if (f.times.size() < 3) throw ComputeError("measure_speed: too few rows");
    const double t_first = f.times.front(), t_last = f.times.back();
    s.fit_from = t_last - (t_last - t_first) / 3.0;
    s.fit_to = t_last;
    std::vector<double> ft, fx;
    int dir = 0;
    for (Eigen::Index k = 0; k < f.nt(); ++k) {
        double pos = level_position(f, k, level);
        if (!std::isfinite(pos)) continue;
        s.times.push_back(f.times[static_cast<std::size_t>(k)]);
        s.positions.push_back(pos);
        if (f.times[static_cast<std::size_t>(k)] >= s.fit_from - 1e-12) {
            int o = orientation(f, k, level);
            if (dir == 0) dir = o;
            if (o != dir) throw ComputeError("measure_speed: the level set changes side inside the fit window");
            ft.push_back(f.times[static_cast<std::size_t>(k)]);
            fx.push_back(pos);
        }
    }
    if (ft.size() < 3) throw ComputeError("measure_speed: the level set is absent in the fit window");
    for (std::size_t k = 1; k < fx.size(); ++k) {
        double step = (fx[k] - fx[k - 1]) * dir;
        if (step < -1e-12) throw ComputeError("measure_speed: the level set moves non-monotonically");
    }
    const double nn = static_cast<double>(ft.size());
    double mt = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < ft.size(); ++k) {
        mt += ft[k];
        mx += fx[k];
    }
    mt /= nn;
    mx /= nn;
    double stt = 0.0, stx = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < ft.size(); ++k) {
        stt += (ft[k] - mt) * (ft[k] - mt);
        stx += (ft[k] - mt) * (fx[k] - mx);
        sxx += (fx[k] - mx) * (fx[k] - mx);
    }
    double slope = stx / stt;
    double sse = 0.0;
    for (std::size_t k = 0; k < ft.size(); ++k) {
        double e = fx[k] - (mx + slope * (ft[k] - mt));
        sse += e * e;
    }
    s.fitted_speed = std::abs(slope);
    s.direction = slope >= 0.0 ? 1 : -1;
    s.r_squared = sxx > 0.0 ? std::clamp(1.0 - sse / sxx, 0.0, 1.0) : 1.0;
    return s;
}

AmplitudeRecord wake_oscillation_amplitude(const SimField& f, double x_probe, double tol) {
    AmplitudeRecord rec;
    auto j = static_cast<Eigen::Index>(std::lround((x_probe - f.x0) / f.dx));
    if (j < 0 || j >= f.nx()) throw DomainError("wake_oscillation_amplitude: probe outside the window");
    const Eigen::Index nt = f.nt();
    Eigen::Index pass = 0;
    while (pass < nt && f.u(pass, j) < 0.5) ++pass;
    if (pass == nt) {
        rec.inconclusive = true;
        return rec;
    }
    for (Eigen::Index k = pass + 1; k + 1 < nt; ++k) {
        double a = f.u(k - 1, j), b = f.u(k, j), c = f.u(k + 1, j);
        if ((b - a) * (c - b) >= 0.0 || b == a) continue;
        // Parabola through the three samples.
        double den = a - 2.0 * b + c;
        double off = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
        double val = b - 0.25 * (a - c) * off;
        rec.times.push_back(f.times[static_cast<std::size_t>(k)] + off * f.dt_row);
        rec.amplitudes.push_back(std::abs(val - 1.0));
    }
    const auto& A = rec.amplitudes;
    rec.decaying = A.empty() || A.back() < tol;
    rec.sustained = A.size() >= 4 && A.back() >= tol && A.back() >= 0.5 * A[A.size() - 3];
    return rec;
}

WakeRange wake_range(const SimField& f, double level, double t_from) {
    WakeRange w;
    w.lo = std::numeric_limits<double>::infinity();
    w.hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < f.nt(); ++k) {
        if (f.times[static_cast<std::size_t>(k)] < t_from) continue;
        double pos = level_position(f, k, level);
        if (!std::isfinite(pos)) continue;
        int dir = orientation(f, k, level);
        for (Eigen::Index j = 0; j < f.nx(); ++j) {
            double x = f.x(j);
            if ((dir > 0 && x > pos) || (dir < 0 && x < pos)) continue;
            w.lo = std::min(w.lo, f.u(k, j));
            w.hi = std::max(w.hi, f.u(k, j));
            ++w.samples;
        }
    }
    return w;
}

}  // namespace kpp
