#include "kppfront/frontsolver.hpp"

#include "kppfront/charspec.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace kpp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::Index;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double left_factor(const GridProfile& p, double t) {
    double v = std::exp(p.left.rate * (t - p.t0));
    if (p.left.poly_degree > 0 && p.t0 < 0.0 && t < 0.0) v *= std::pow(t / p.t0, p.left.poly_degree);
    return v;
}

/// Sparse D with (D phi)_i = phi(t_i - h) under the profile's left tail model.
SpMat delay_matrix(const GridProfile& p, double h) {
    const Index n = p.size();
    SpMat D(n, n);
    if (h == 0.0) {
        D.setIdentity();
        return D;
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n) * 4);
    const double lag = h / p.dt;
    const double m = std::round(lag);
    const bool exact = std::abs(lag - m) <= 1e-9 * std::max(1.0, lag);
    for (Index i = 0; i < n; ++i) {
        const double t = p.t(i) - h;
        if (exact) {
            Index j = i - static_cast<Index>(m);
            if (j >= 0)
                trip.emplace_back(i, j, 1.0);
            else
                trip.emplace_back(i, 0, left_factor(p, t));
            continue;
        }
        double x = (t - p.t0) / p.dt;
        if (x <= 0.0) {
            trip.emplace_back(i, 0, left_factor(p, t));
            continue;
        }
        Index j = static_cast<Index>(std::floor(x));
        Index s = std::clamp<Index>(j - 1, 0, n - 4);
        double u = x - static_cast<double>(s);
        for (int k = 0; k < 4; ++k) {
            double l = 1.0;
            for (int q = 0; q < 4; ++q)
                if (q != k) l *= (u - q) / static_cast<double>(k - q);
            trip.emplace_back(i, s + k, l);
        }
    }
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

/// Number of leading nodes whose delayed argument falls before t0.
Index history_rows(const GridProfile& p, double h) {
    if (h == 0.0) return 0;
    Index k = 0;
    const double lag = h / p.dt;
    const double m = std::round(lag);
    const bool exact = std::abs(lag - m) <= 1e-9 * std::max(1.0, lag);
    while (k < p.size() && (exact ? k < static_cast<Index>(m) : p.t(k) - h <= p.t0)) ++k;
    return k;
}

SpMat shift_matrix(Index n, double diag, double super) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(2 * n));
    for (Index i = 0; i < n; ++i) {
        if (diag != 0.0) trip.emplace_back(i, i, diag);
        if (i + 1 < n && super != 0.0) trip.emplace_back(i, i + 1, super);
    }
    SpMat S(n, n);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

/// The right-side kernel of the travelling-wave equation on a uniform grid:
/// (B F)(t) = int_t^inf k(s - t) F(s) ds with
/// k(u) = (e^{-lambda u} - e^{-mu u}) / (mu - lambda), or u e^{-u} at c = 2.
class FrontKernel {
public:
    FrontKernel(const Params& p, double dt, Index n, QuadratureOrder order) : dt_(dt), n_(n) {
        if (p.c == 2.0) {
            confluent_ = true;
            a_ = b_ = 1.0;
            cwa_ = cell_weights(1.0, 0, dt, order);
            cwb_ = cell_weights(1.0, 1, dt, order);
        } else {
            auto r = chi_roots(p.c);
            a_ = r.lambda;
            b_ = r.mu;
            cwa_ = cell_weights(a_, 0, dt, order);
            cwb_ = cell_weights(b_, 0, dt, order);
        }
        Wa_ = cell_matrix(cwa_, n);
        Wb_ = cell_matrix(cwb_, n);
        Ea_ = std::exp(-a_ * dt);
        Eb_ = std::exp(-b_ * dt);
    }

    VectorXd apply(const VectorXd& F, double tail) const {
        VectorXd ca = Wa_ * F, cb = Wb_ * F;
        VectorXd out(n_);
        if (confluent_) {
            double I = tail, J = tail;
            out[n_ - 1] = J;
            for (Index i = n_ - 2; i >= 0; --i) {
                J = Ea_ * (J + dt_ * I) + cb[i];
                I = Ea_ * I + ca[i];
                out[i] = J;
            }
            return out;
        }
        double Ia = tail / a_, Ib = tail / b_;
        const double d = b_ - a_;
        out[n_ - 1] = (Ia - Ib) / d;
        for (Index i = n_ - 2; i >= 0; --i) {
            Ia = Ea_ * Ia + ca[i];
            Ib = Eb_ * Ib + cb[i];
            out[i] = (Ia - Ib) / d;
        }
        return out;
    }

    /// Multiplier of the discrete kernel on the mode e^{z t} (z below both
    /// rates), from the interior cell stencil.
    double symbol(double z) const {
        const double q = std::exp(z * dt_);
        auto cell = [&](const CellWeights& cw) {
            double s = 0.0;
            for (int k = 0; k < cw.width; ++k) s += cw.w[1][k] * std::pow(q, cw.offsets[1][k]);
            return s;
        };
        const double ka = cell(cwa_) / (1.0 - Ea_ * q);
        if (confluent_) return (cell(cwb_) + Ea_ * q * dt_ * ka) / (1.0 - Ea_ * q);
        const double kb = cell(cwb_) / (1.0 - Eb_ * q);
        return (ka - kb) / (b_ - a_);
    }

    /// Q and M with Q (B F) = M F + (terms independent of F).
    void matrices(SpMat& Q, SpMat& M) const {
        if (confluent_) {
            SpMat P = shift_matrix(n_, 1.0, -Ea_);
            SpMat S = shift_matrix(n_, 0.0, 1.0);
            Q = P * P;
            M = P * Wb_ + (Ea_ * dt_) * (S * Wa_);
            return;
        }
        SpMat Pa = shift_matrix(n_, 1.0, -Ea_);
        SpMat Pb = shift_matrix(n_, 1.0, -Eb_);
        Q = Pa * Pb;
        M = (Pb * Wa_ - Pa * Wb_) / (b_ - a_);
    }

private:
    bool confluent_ = false;
    double a_ = 0.0, b_ = 0.0, Ea_ = 0.0, Eb_ = 0.0, dt_ = 0.0;
    Index n_ = 0;
    CellWeights cwa_, cwb_;
    SpMat Wa_, Wb_;
};

/// The discrete counterpart of lambda_0: the zero of
/// symbol(z) (1 + e^{-z h}) = 1 next to the continuum value. The continuum
/// value is returned when the bracket fails (double zero at c = c*).
double discrete_decay_root(const FrontKernel& K, double h, double lam0) {
    auto f = [&](double z) { return K.symbol(z) * (1.0 + std::exp(-z * h)) - 1.0; };
    const double d = 0.05 * std::abs(lam0);
    double lo = lam0 - d, hi = lam0 + d;
    double flo = f(lo), fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0)) return lam0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(lam0); ++it) {
        double m = 0.5 * (lo + hi);
        (f(m) < 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

GridProfile template_profile(const FrontGrid& g, const Params& p, const LeftTail& left) {
    GridProfile prof;
    prof.t0 = g.t0();
    prof.dt = g.dt;
    prof.values = VectorXd::Zero(g.n);
    prof.left = left;
    prof.right = RightTail{RightTail::Kind::ConstantLimit, 1.0, 0.0};
    prof.params = p;
    return prof;
}

LeftTail front_left_tail(const Params& p) {
    LeftTail l;
    if (p.c == 2.0) {
        l.rate = 1.0;
        l.poly_degree = 1;
    } else {
        l.rate = chi_roots(p.c).lambda;
    }
    return l;
}

double sup_abs(const VectorXd& v, Index count) {
    return count > 0 ? v.head(count).cwiseAbs().maxCoeff() : 0.0;
}

struct NewtonOutcome {
    bool ok = false;
    int steps = 0;
    double g_norm = kNaN;
    std::vector<double> history;
};

/// Newton on phi - B phi = 0 (premultiplied by the banded Q) with the phase
/// condition phi(0) = 1/2 in place of the last row. The last row of the
/// premultiplied system only restates phi(t_end) = 1, which the phase row
/// replaces; its mismatch is reported separately.
NewtonOutcome newton_solve(GridProfile& prof, const Params& p, Index i0, QuadratureOrder order, int max_steps) {
    NewtonOutcome out;
    const Index n = prof.size();
    FrontKernel K(p, prof.dt, n, order);
    SpMat Q, M;
    K.matrices(Q, M);
    const SpMat D = delay_matrix(prof, p.h());

    auto eval = [&](const VectorXd& phi, VectorXd& G) {
        VectorXd F = phi.cwiseProduct(D * phi);
        VectorXd R = phi - K.apply(F, 1.0);
        G = Q * R;
        G[n - 1] = phi[i0] - 0.5;
        double g = G.cwiseAbs().maxCoeff();
        return std::isfinite(g) ? g : std::numeric_limits<double>::infinity();
    };

    VectorXd phi = prof.values, G, Gt;
    double g = eval(phi, G);
    out.history.push_back(g);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < max_steps; ++k) {
        if (g <= 1e-13) break;
        VectorXd Dphi = D * phi;
        SpMat A = SpMat(phi.asDiagonal()) * D;
        A += SpMat(Dphi.asDiagonal());
        SpMat J = Q - M * A;
        trip.clear();
        trip.reserve(static_cast<size_t>(J.nonZeros()) + 1);
        for (Index col = 0; col < J.outerSize(); ++col)
            for (SpMat::InnerIterator it(J, col); it; ++it)
                if (it.row() != n - 1) trip.emplace_back(it.row(), it.col(), it.value());
        trip.emplace_back(n - 1, i0, 1.0);
        SpMat Jp(n, n);
        Jp.setFromTriplets(trip.begin(), trip.end());
        lu.compute(Jp);
        if (lu.info() != Eigen::Success) break;
        VectorXd step = lu.solve(G);
        if (!step.allFinite()) break;
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= 1.0 / 1024.0) {
            VectorXd trial = phi - alpha * step;
            double gt = eval(trial, Gt);
            if (gt < (1.0 - 1e-4 * alpha) * g) {
                phi = std::move(trial);
                G = Gt;
                g = gt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++out.steps;
        out.history.push_back(g);
        if (!accepted) break;
        if (alpha * step.cwiseAbs().maxCoeff() <= 1e-15) break;
    }
    prof.values = phi;
    out.g_norm = g;
    out.ok = std::isfinite(g);
    return out;
}

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
};

/// Least-squares exponent p in y = a + r t + p ln|t|; p is near 1 when the
/// tail carries a linear polynomial factor and near 0 otherwise.
double log_factor_exponent(const std::vector<double>& t, const std::vector<double>& y) {
    const Index m = static_cast<Index>(t.size());
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd b(m);
    for (Index k = 0; k < m; ++k) {
        A(k, 0) = 1.0;
        A(k, 1) = t[k];
        A(k, 2) = std::log(std::abs(t[k]));
        b[k] = y[k];
    }
    return A.colPivHouseholderQr().solve(b)[2];
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t m = x.size();
    double sx = 0, sy = 0;
    for (size_t k = 0; k < m; ++k) {
        sx += x[k];
        sy += y[k];
    }
    double mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
    for (size_t k = 0; k < m; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    LinFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (size_t k = 0; k < m; ++k) {
        double r = y[k] - f.intercept - f.slope * x[k];
        f.sse += r * r;
    }
    return f;
}

/// Leading decay rate of phi - 1 on the right: |lambda_0| when real, else
/// minus the real part of the strip-0 zero (0 if it does not decay).
double right_decay_rate(const Params& p, bool* real_root = nullptr) {
    auto roots = real_roots_psi(p);
    if (roots.size() >= 2) {
        if (real_root) *real_root = true;
        return std::abs(roots[1].re);
    }
    if (real_root) *real_root = false;
    try {
        auto cr = complex_roots_in_strips(p, 0);
        if (!cr.empty() && cr[0].re < 0.0) return -cr[0].re;
    } catch (const std::exception&) {
    }
    return 0.0;
}

void finalize(GridProfile& prof, const Params& p, const FrontOptions& opt, FrontReport& rep) {
    const Index n = prof.size();
    rep.residual = fixed_point_residual(prof, p);
    rep.ode_residual = ode_residual(prof, p).cwiseAbs().maxCoeff();
    double floor = 0.0;
    if (p.h() > 0.0) {
        rep.bounds_box = apriori_bounds(p);
        floor = 0.5 * rep.bounds_box->L_e;
    }
    rep.log_residual = log_residual(prof, p, floor).cwiseAbs().maxCoeff();
    rep.max_value = prof.values.maxCoeff();
    rep.limit_left = prof.values[0];
    rep.limit_right = prof.values[n - 1];
    rep.boundary_mismatch = std::abs(prof.values[n - 1] - 1.0);
    rep.positive = (prof.values.array() > 0.0).all();
    rep.monotone_profile = true;
    for (Index i = 0; i + 1 < n; ++i)
        if (prof.values[i + 1] - prof.values[i] < -1e-12) {
            rep.monotone_profile = false;
            break;
        }
    try {
        OperatorConfig cfg = make_operator_config(p, opt.ops);
        rep.beta_used = cfg.beta;
        rep.clamp_active = rep.max_value >= cfg.beta;
        if (rep.positive) {
            GridProfile am = apply_Am(prof, cfg);
            rep.am_residual = sup_abs(am.values - prof.values, n - 1);
        }
    } catch (const std::exception& e) {
        rep.warnings.push_back(std::string("clamped operator unavailable: ") + e.what());
    }
    if (opt.tails && rep.positive) {
        try {
            auto [l, r] = tail_asymptotics(prof, p);
            rep.left_tail = l;
            rep.right_tail = r;
        } catch (const std::exception& e) {
            rep.warnings.push_back(std::string("tail fit skipped: ") + e.what());
        }
    }
}

}  // namespace

OperatorConfig make_operator_config(const Params& p, const OperatorOverrides& ov) {
    if (!p.admissible()) throw AdmissibilityError("the clamped operator needs c >= 2");
    if (p.tau < 0.0) throw DomainError("delay must be non-negative");
    OperatorConfig cfg;
    cfg.params = p;
    const double h = p.h();
    // Without delay the profile stays below 1, so 1 plays the role of U_e.
    const double Ue = h > 0.0 ? apriori_bounds(p).U_e : 1.0;
    cfg.beta = ov.beta.value_or(std::max(2.0 * Ue, std::exp(p.c * h)) + 1.0);
    if (!std::isfinite(cfg.beta)) throw DomainError("clamp level overflows for this lag");
    if (!(cfg.beta > Ue)) throw DomainError("clamp level must exceed U_e");
    cfg.b = ov.b.value_or(2.0 * cfg.beta + 3.0);
    if (!(cfg.b > 2.0 * cfg.beta + 2.0)) throw DomainError("shift b must exceed 2 beta + 2");
    const double s = std::sqrt(p.c * p.c + 4.0 * cfg.b);
    cfg.z2 = 0.5 * (p.c + s);
    cfg.z1 = -cfg.b / cfg.z2;
    cfg.eps_prime = cfg.z2 - cfg.z1;
    auto r = chi_roots(p.c);
    cfg.lambda = r.lambda;
    cfg.mu = r.mu;
    if (p.c == 2.0) {
        cfg.eps = 0.0;
        cfg.M = std::numeric_limits<double>::infinity();
        return cfg;
    }
    cfg.eps = ov.eps.value_or(0.5 * std::min(cfg.lambda, cfg.mu - cfg.lambda));
    if (!(cfg.eps > 0.0 && cfg.eps < cfg.lambda && cfg.lambda + cfg.eps < cfg.mu))
        throw DomainError("eps must lie in (0, lambda) with lambda + eps < mu");
    const double x = -chi(cfg.lambda + cfg.eps, p.c);
    cfg.M = ov.M.value_or(std::max(2.0, 2.0 / x));
    if (!(x > 1.0 / cfg.M)) throw DomainError("M too small: need -chi(lambda + eps) > 1/M");
    return cfg;
}

double g_clamp(double u, double beta) {
    if (u < 0.0) throw DomainError("clamp argument must be non-negative");
    if (!(beta > 0.0)) throw DomainError("clamp level must be positive");
    if (u <= beta) return u;
    return std::max(0.0, 2.0 * beta - u);
}

double r_nonlinearity(double u, double v, const OperatorConfig& cfg) {
    if (u < 0.0 || v < 0.0) throw DomainError("nonlinearity arguments must be non-negative");
    return cfg.b * u + g_clamp(u, cfg.beta) * (1.0 - v);
}

double lower_solution_value(const OperatorConfig& cfg, double t) {
    if (!(cfg.params.c > 2.0)) throw DomainError("the explicit lower solution needs c > 2");
    return std::max(0.0, std::exp(cfg.lambda * t) * (1.0 - cfg.M * std::exp(cfg.eps * t)));
}

double upper_solution_K(const OperatorConfig& cfg) {
    if (!(cfg.params.c > 2.0)) throw DomainError("the two-exponential form needs c > 2");
    const double zm = 0.5 * (std::sqrt(cfg.params.c * cfg.params.c + 4.0) - cfg.params.c);
    const double d = cfg.mu - cfg.lambda;
    const double a = cfg.beta * (cfg.mu - zm) / d;
    const double k = cfg.beta * (cfg.lambda - zm) / d;
    const double tstar = std::log(a) / cfg.lambda;
    return k * std::exp(-cfg.mu * tstar);
}

double upper_solution_value(const OperatorConfig& cfg, double t) {
    const double c = cfg.params.c;
    // Above the clamp level g(u) = 2 beta - u and the decaying branch is
    // 2 beta - beta e^{-zm (t - t*)}; the join at level beta is C^1.
    const double zm = 0.5 * (std::sqrt(c * c + 4.0) - c);
    if (c == 2.0) {
        const double q = 2.0 - std::sqrt(2.0);
        const double tstar = std::log(cfg.beta * q);
        if (t <= tstar) return (tstar + 1.0 / q - t) * std::exp(t);
        return 2.0 * cfg.beta - cfg.beta * std::exp(-zm * (t - tstar));
    }
    if (!(c > 2.0)) throw AdmissibilityError("upper solution needs c >= 2");
    const double d = cfg.mu - cfg.lambda;
    const double a = cfg.beta * (cfg.mu - zm) / d;
    const double tstar = std::log(a) / cfg.lambda;
    if (t <= tstar) {
        const double K = upper_solution_K(cfg);
        return std::exp(cfg.lambda * t) - K * std::exp(cfg.mu * t);
    }
    return 2.0 * cfg.beta - cfg.beta * std::exp(-zm * (t - tstar));
}

GridProfile lower_solution(const OperatorConfig& cfg, const FrontGrid& g) {
    if (!(cfg.params.c > 2.0)) throw DomainError("the explicit lower solution needs c > 2");
    const double Tc = -std::log(cfg.M) / cfg.eps;
    if (g.t_end() < Tc) throw DomainError("grid does not reach the zero of the lower solution");
    GridProfile prof;
    prof.t0 = g.t0();
    prof.dt = g.dt;
    prof.values.resize(g.n);
    for (Index i = 0; i < g.n; ++i) prof.values[i] = lower_solution_value(cfg, g.t(i));
    prof.left = LeftTail{1.0, cfg.lambda, 0};
    prof.right = RightTail{RightTail::Kind::ConstantLimit, 0.0, 0.0};
    prof.params = cfg.params;
    return prof;
}

GridProfile upper_solution(const OperatorConfig& cfg, const FrontGrid& g) {
    GridProfile prof;
    prof.t0 = g.t0();
    prof.dt = g.dt;
    prof.values.resize(g.n);
    for (Index i = 0; i < g.n; ++i) prof.values[i] = upper_solution_value(cfg, g.t(i));
    prof.left = cfg.params.c == 2.0 ? LeftTail{1.0, 1.0, 1} : LeftTail{1.0, cfg.lambda, 0};
    prof.right = RightTail{RightTail::Kind::ConstantLimit, 2.0 * cfg.beta, 0.0};
    prof.params = cfg.params;
    return prof;
}

VectorXd delayed_values(const GridProfile& phi, double h) { return delay_matrix(phi, h) * phi.values; }

namespace {

GridProfile apply_front_kernel(const GridProfile& phi, const Params& p, QuadratureOrder order) {
    if (phi.right.kind != RightTail::Kind::ConstantLimit)
        throw DomainError("the integral operators need a constant right limit");
    const double l = phi.right.limit;
    VectorXd F = phi.values.cwiseProduct(delayed_values(phi, p.h()));
    FrontKernel K(p, phi.dt, phi.size(), order);
    GridProfile out = phi;
    out.values = K.apply(F, l * l);
    out.right.limit = l * l;
    return out;
}

}  // namespace

GridProfile apply_B(const GridProfile& phi, const Params& p, QuadratureOrder order) {
    if (!(p.c > 2.0)) throw DomainError("apply_B needs c > 2; use apply_B2 at c = 2");
    return apply_front_kernel(phi, p, order);
}

GridProfile apply_B2(const GridProfile& phi, const Params& p, QuadratureOrder order) {
    if (p.c != 2.0) throw DomainError("apply_B2 is the c = 2 operator");
    return apply_front_kernel(phi, p, order);
}

GridProfile apply_Am(const GridProfile& phi, const OperatorConfig& cfg, bool cone_check, QuadratureOrder order) {
    if (phi.right.kind != RightTail::Kind::ConstantLimit)
        throw DomainError("the integral operators need a constant right limit");
    const Index n = phi.size();
    if (cone_check) {
        for (Index i = 0; i < n; ++i) {
            double t = phi.t(i);
            double lo = lower_solution_value(cfg, t), hi = upper_solution_value(cfg, t);
            double slack = 1e-9 * std::max(1.0, hi);
            if (phi.values[i] < lo - slack || phi.values[i] > hi + slack)
                throw DomainError("input lies outside the cone at t = " + std::to_string(t));
        }
    }
    VectorXd v = delayed_values(phi, cfg.params.h());
    VectorXd r(n);
    for (Index i = 0; i < n; ++i) r[i] = r_nonlinearity(phi.values[i], std::max(0.0, v[i]), cfg);
    const double l = phi.right.limit;
    const double r_inf = r_nonlinearity(l, l, cfg);

    // Right part: int_t^inf e^{z2 (t - s)} r ds.
    VectorXd right;
    backward_pass(r, cell_weights(cfg.z2, 0, phi.dt, order), std::exp(-cfg.z2 * phi.dt), r_inf / cfg.z2, right);
    // Left part: int_{-inf}^t e^{z1 (t - s)} r ds, the same recurrence on the
    // reversed samples; r decays to the left like the profile.
    const double a = -cfg.z1;
    VectorXd rr = r.reverse(), left;
    backward_pass(rr, cell_weights(a, 0, phi.dt, order), std::exp(-a * phi.dt), r[0] / (a + phi.left.rate), left);
    GridProfile out = phi;
    out.values = (left.reverse() + right) / cfg.eps_prime;
    out.right.limit = r_inf / cfg.b;
    return out;
}

VectorXd ode_residual(const GridProfile& phi, const Params& p) {
    const Index n = phi.size();
    VectorXd res = VectorXd::Zero(n);
    VectorXd v = delayed_values(phi, p.h());
    const double dt = phi.dt;
    const auto& y = phi.values;
    for (Index i = 2; i + 2 < n; ++i) {
        double d1 = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * dt);
        double d2 = (-y[i + 2] + 16.0 * y[i + 1] - 30.0 * y[i] + 16.0 * y[i - 1] - y[i - 2]) / (12.0 * dt * dt);
        res[i] = d2 - p.c * d1 + y[i] * (1.0 - v[i]);
    }
    return res;
}

VectorXd log_residual(const GridProfile& phi, const Params& p, double floor) {
    const Index n = phi.size();
    VectorXd res = VectorXd::Zero(n);
    VectorXd v = delayed_values(phi, p.h());
    const double dt = phi.dt;
    const auto& y = phi.values;
    for (Index i = 2; i + 2 < n; ++i) {
        bool ok = v[i] > 0.0;
        for (Index k = i - 2; k <= i + 2 && ok; ++k) ok = y[k] > floor && y[k] > 0.0;
        if (!ok) continue;
        auto x = [&](Index k) { return -std::log(y[k]); };
        double d1 = (-x(i + 2) + 8.0 * x(i + 1) - 8.0 * x(i - 1) + x(i - 2)) / (12.0 * dt);
        double d2 = (-x(i + 2) + 16.0 * x(i + 1) - 30.0 * x(i) + 16.0 * x(i - 1) - x(i - 2)) / (12.0 * dt * dt);
        res[i] = d2 - d1 * d1 - p.c * d1 - 1.0 + v[i];
    }
    return res;
}

double fixed_point_residual(const GridProfile& phi, const Params& p) {
    GridProfile b = apply_front_kernel(phi, p, QuadratureOrder::Cubic);
    return sup_abs(b.values - phi.values, phi.size() - 1);
}

std::pair<TailReport, TailReport> tail_asymptotics(const GridProfile& phi, const Params& p) {
    if (!p.admissible()) throw AdmissibilityError("tail analysis needs c >= 2");
    const Index n = phi.size();
    const auto& y = phi.values;
    TailReport left, right;
    left.side = TailReport::Side::Left;
    right.side = TailReport::Side::Right;

    // Left: contiguous samples from the window start while phi <= 1e-6.
    std::vector<double> t, ly, lyp;
    for (Index i = 0; i < n && y[i] <= 1e-6 && phi.t(i) < 0.0; ++i) {
        if (!(y[i] > 0.0)) continue;
        t.push_back(phi.t(i));
        ly.push_back(std::log(y[i]));
        lyp.push_back(std::log(y[i]) - std::log(-phi.t(i)));
    }
    if (t.size() < 50) throw DomainError("fewer than 50 left-tail samples below 1e-6");
    const double lam = p.c == 2.0 ? 1.0 : chi_roots(p.c).lambda;
    LinFit plain = linear_fit(t, ly), poly = linear_fit(t, lyp);
    left.available = true;
    left.samples = static_cast<int>(t.size());
    left.polynomial_factor_detected = log_factor_exponent(t, ly) > 0.5;
    const auto& chosen_y = left.polynomial_factor_detected ? lyp : ly;
    left.fitted_rate = left.polynomial_factor_detected ? poly.slope : plain.slope;
    left.predicted_rate = lam;
    left.relative_rate_error = std::abs(left.fitted_rate - lam) / lam;
    double acc = 0.0;
    for (size_t k = 0; k < t.size(); ++k) acc += chosen_y[k] - lam * t[k];
    left.fitted_coefficient = std::exp(acc / static_cast<double>(t.size()));
    if (p.c > 2.0) {
        // (1 / sqrt(c^2 - 4)) int e^{-lambda s} phi(s) phi(s - h) ds by the
        // trapezoid rule plus closed-form pieces beyond the window.
        VectorXd F = y.cwiseProduct(delayed_values(phi, p.h()));
        double integral = 0.0;
        for (Index i = 0; i < n; ++i) {
            double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            integral += w * std::exp(-lam * phi.t(i)) * F[i];
        }
        integral *= phi.dt;
        integral += F[0] * std::exp(-lam * phi.t0) / lam;
        integral += std::exp(-lam * phi.t_end()) / lam;
        left.predicted_coefficient = integral / std::sqrt(p.c * p.c - 4.0);
        left.relative_coefficient_error =
            std::abs(left.fitted_coefficient - left.predicted_coefficient) / left.predicted_coefficient;
    } else {
        left.note = "coefficient integral applies to c > 2 only";
    }

    // Right: samples past t = 0 with 1e-12 <= |1 - phi| <= 1e-6.
    std::vector<double> tr, lv, lvp;
    for (Index i = 0; i < n; ++i) {
        double tt = phi.t(i);
        double d = std::abs(1.0 - y[i]);
        if (tt <= 0.0 || d < 1e-12 || d > 1e-6) continue;
        tr.push_back(tt);
        lv.push_back(std::log(d));
        lvp.push_back(std::log(d) - std::log(tt));
    }
    if (tr.size() < 50) throw DomainError("fewer than 50 right-tail samples in [1e-12, 1e-6]");
    bool real_root = false;
    double rate = right_decay_rate(p, &real_root);
    LinFit rplain = linear_fit(tr, lv), rpoly = linear_fit(tr, lvp);
    right.available = true;
    right.samples = static_cast<int>(tr.size());
    right.polynomial_factor_detected = log_factor_exponent(tr, lv) > 0.5;
    const LinFit& rc = right.polynomial_factor_detected ? rpoly : rplain;
    right.fitted_rate = -rc.slope;
    right.fitted_coefficient = std::exp(rc.intercept);
    right.predicted_rate = rate;
    if (rate > 0.0) right.relative_rate_error = std::abs(right.fitted_rate - rate) / rate;
    if (!real_root) right.note = "leading zero is complex; the tail oscillates";
    return {left, right};
}

FrontResult monotone_front(const Params& p, const FrontOptions& opt) {
    if (!p.admissible()) throw AdmissibilityError("no fronts exist for c < 2");
    if (p.tau < 0.0) throw DomainError("delay must be non-negative");
    FrontReport rep;
    rep.mode = "monotone";
    CriticalSpeed cs = c_star(p.tau);
    if (!cs.infinite() && p.c > cs.as_double())
        rep.warnings.push_back("c exceeds c*(tau); the iteration may not converge to a monotone front");

    double lam0 = -1.0;
    try {
        lam0 = lambda0_real(p);
    } catch (const ComputeError&) {
        rep.warnings.push_back("psi has no negative real zero; starting from 1 - e^{-t}");
    }
    const LeftTail lt = front_left_tail(p);
    FrontGrid g = make_front_grid(p, lt.rate, std::abs(lam0), opt.grid);
    GridProfile prof = template_profile(g, p, lt);

    // Linear cell weights are positive, so the discrete B is order preserving
    // and the iterates from the sub-solution increase pointwise. Near phi = 1
    // the map has gain close to 2, so the complement v = 1 - phi is iterated
    // alongside (1 - B(phi phi_h) = B(v + v_h - v v_h)) and each sample is
    // kept in whichever form is smaller, which keeps rounding relative.
    FrontKernel lin(p, g.dt, g.n, QuadratureOrder::Linear);
    // max(0, 1 - e^{z t}) is a sub-solution only to second order in e^{z t},
    // so z must be the decay root of the discrete operator, not of psi.
    const double z0 = discrete_decay_root(lin, p.h(), lam0);
    for (Index i = 0; i < g.n; ++i) prof.values[i] = std::max(0.0, -std::expm1(z0 * g.t(i)));
    const SpMat D = delay_matrix(prof, p.h());
    const Index left_rows = history_rows(prof, p.h());
    VectorXd phi = prof.values, v(g.n), best = phi;
    for (Index i = 0; i < g.n; ++i) v[i] = std::min(1.0, std::exp(z0 * g.t(i)));
    double best_inc = std::numeric_limits<double>::infinity();
    double worst_drop = 0.0;
    int best_j = 0, j = 0;
    for (; j < opt.max_iter; ++j) {
        VectorXd Dphi = D * phi, Dv = D * v;
        for (Index i = 0; i < left_rows; ++i) Dv[i] = 1.0 - Dphi[i];
        VectorXd next = lin.apply(phi.cwiseProduct(Dphi), 1.0);
        VectorXd vnext = lin.apply(v + Dv - v.cwiseProduct(Dv), 0.0);
        double inc = 0.0, drop = 0.0;
        for (Index i = 0; i < g.n; ++i) {
            double d;
            if (next[i] <= 0.5) {
                vnext[i] = 1.0 - next[i];
                d = next[i] - phi[i];
            } else {
                next[i] = 1.0 - vnext[i];
                d = v[i] - vnext[i];
            }
            inc = std::max(inc, d);
            drop = std::min(drop, d);
        }
        phi = std::move(next);
        v = std::move(vnext);
        rep.history.push_back(inc);
        worst_drop = std::min(worst_drop, drop);
        if (inc < best_inc) {
            best_inc = inc;
            best = phi;
            best_j = j;
        }
        if (inc <= opt.tol) break;
        // Stagnation: rounding along the unstable directions has taken over.
        if (j - best_j >= 20) break;
    }
    rep.min_increment = worst_drop;
    if (worst_drop < -1e-12) {
        rep.monotone_iterates = false;
        rep.iterations = j + 1;
        char msg[96];
        std::snprintf(msg, sizeof msg, "B-iterates decreased by %.3e", -worst_drop);
        throw NonConvergence(msg, rep);
    }
    rep.iterations = std::min(j + 1, opt.max_iter);
    rep.increment = best_inc;

    prof.values = best;
    if (prof.values[g.n - 1] < 0.5 || prof.values[0] > 0.5)
        throw NonConvergence("B-iteration did not produce a front-shaped iterate", rep);
    rep.normalized_shift = normalize_shift(prof, 0.5);
    auto nw = newton_solve(prof, p, g.i0, QuadratureOrder::Cubic, opt.max_newton);
    rep.newton_steps = nw.steps;
    finalize(prof, p, opt, rep);
    rep.converged = nw.ok && rep.residual <= opt.tol && rep.monotone_profile && rep.positive;
    if (!rep.converged) throw NonConvergence("monotone front did not converge", rep);
    return {std::move(prof), std::move(rep)};
}

namespace {

bool newton_ok(const GridProfile& prof, const Params& p, const NewtonOutcome& nw, double tol) {
    return nw.ok && nw.g_norm <= std::max(1e-2 * tol, 1e-12) && (prof.values.array() > 0.0).all() &&
           fixed_point_residual(prof, p) <= tol;
}

double seed_slope(double lam, int seed) {
    static const double factors[] = {1.0, 0.5, 2.0, 0.75, 1.5};
    return lam * factors[seed % 5];
}

}  // namespace

FrontResult semi_wavefront(const Params& p, const FrontOptions& opt) {
    if (!p.admissible()) throw AdmissibilityError("semi-wavefronts need c >= 2");
    if (p.tau < 0.0) throw DomainError("delay must be non-negative");
    FrontReport rep;
    rep.mode = "semi";
    const LeftTail lt = front_left_tail(p);
    const double rate = right_decay_rate(p);
    // Oscillating tails can decay slowly; let the window follow them further.
    GridOptions go = opt.grid;
    if (go.t_max == 0.0 && rate > 0.0) go.t_max = std::min(40.0 / rate, 5.0 * go.clip);
    FrontGrid g = make_front_grid(p, lt.rate, rate, go);
    GridOptions pinned = go;
    pinned.t_min = g.t0();
    pinned.t_max = g.t_end();

    const double kappa = seed_slope(lt.rate, opt.seed);
    GridProfile prof = template_profile(g, p, lt);
    for (Index i = 0; i < g.n; ++i) prof.values[i] = 1.0 / (1.0 + std::exp(-kappa * g.t(i)));
    GridProfile seed_prof = prof;

    auto nw = newton_solve(prof, p, g.i0, QuadratureOrder::Cubic, opt.max_newton);
    rep.newton_steps = nw.steps;
    rep.history = nw.history;
    rep.iterations = 1;
    bool ok = newton_ok(prof, p, nw, opt.tol);

    if (!ok) {
        // Continuation in tau from a delay small enough for the seed to work.
        GridProfile cur;
        double tau_c = p.tau;
        bool started = false;
        for (int k = 1; k <= 8 && !started; ++k) {
            tau_c = p.tau / std::pow(2.0, k);
            Params q = make_params(p.c, tau_c);
            FrontGrid gq = make_front_grid(q, lt.rate, rate, pinned);
            cur = template_profile(gq, q, lt);
            for (Index i = 0; i < gq.n; ++i) cur.values[i] = seed_prof.at(gq.t(i));
            auto r = newton_solve(cur, q, gq.i0, QuadratureOrder::Cubic, opt.max_newton);
            rep.newton_steps += r.steps;
            ++rep.iterations;
            started = newton_ok(cur, q, r, opt.tol);
        }
        double step = started ? (p.tau - tau_c) / 4.0 : 0.0;
        while (started && tau_c < p.tau && step >= 1e-4 * p.tau && rep.iterations < opt.max_iter) {
            double tau_n = std::min(p.tau, tau_c + step);
            Params q = make_params(p.c, tau_n);
            FrontGrid gq = make_front_grid(q, lt.rate, rate, pinned);
            GridProfile trial = template_profile(gq, q, lt);
            for (Index i = 0; i < gq.n; ++i) trial.values[i] = cur.at(gq.t(i));
            auto r = newton_solve(trial, q, gq.i0, QuadratureOrder::Cubic, opt.max_newton);
            rep.newton_steps += r.steps;
            ++rep.iterations;
            if (newton_ok(trial, q, r, opt.tol)) {
                cur = std::move(trial);
                tau_c = tau_n;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        if (started && tau_c == p.tau) {
            prof = std::move(cur);
            prof.params = p;
            ok = true;
        } else {
            rep.warnings.push_back("continuation in tau stalled at tau = " + std::to_string(tau_c));
        }
    }

    finalize(prof, p, opt, rep);
    if (p.c > 2.0 && rep.positive && rep.left_tail) {
        try {
            OperatorConfig cfg = make_operator_config(p, opt.ops);
            // Rescale so the left tail reads e^{lambda t}, then test the cone.
            const double s = std::log(rep.left_tail->fitted_coefficient) / cfg.lambda;
            bool inside = true;
            for (Index i = 0; i < prof.size() && inside; ++i) {
                double t = prof.t(i);
                double v = prof.at(t - s);
                double lo = lower_solution_value(cfg, t), hi = upper_solution_value(cfg, t);
                inside = v >= lo - 1e-6 * std::max(1e-300, lo) && v <= hi * (1.0 + 1e-6);
            }
            rep.cone_ok = inside;
        } catch (const std::exception& e) {
            rep.warnings.push_back(std::string("cone check skipped: ") + e.what());
        }
    }
    rep.converged = ok && rep.residual <= opt.tol && rep.positive;
    if (!rep.converged) throw NonConvergence("semi-wavefront did not converge", rep);
    return {std::move(prof), std::move(rep)};
}

UniquenessProbe uniqueness_probe(const Params& p, const FrontOptions& opt, int seeds) {
    UniquenessProbe out;
    out.seeds = seeds;
    std::vector<GridProfile> sols;
    for (int s = 0; s < seeds; ++s) {
        FrontOptions o = opt;
        o.seed = s;
        o.tails = false;
        try {
            sols.push_back(semi_wavefront(p, o).profile);
        } catch (const ComputeError&) {
        }
    }
    out.converged = static_cast<int>(sols.size());
    if (sols.size() < 2) return out;
    double dev = 0.0;
    for (size_t a = 1; a < sols.size(); ++a) {
        const Index n = std::min(sols[0].size(), sols[a].size());
        dev = std::max(dev, (sols[0].values.head(n) - sols[a].values.head(n)).cwiseAbs().maxCoeff());
    }
    out.max_deviation = dev;
    return out;
}

}  // namespace kpp
