#include "kppfront/domain.hpp"

#include <algorithm>
#include <cmath>

namespace kpp {

Params make_params(double c, double tau) {
    if (!std::isfinite(c) || !std::isfinite(tau)) throw DomainError("c and tau must be finite");
    if (c < 0.0) throw DomainError("wave speed c must be >= 0");
    if (tau < 0.0) throw DomainError("delay tau must be >= 0");
    return Params{c, tau};
}

Eigen::VectorXd GridProfile::times() const {
    Eigen::VectorXd t(size());
    for (Eigen::Index i = 0; i < size(); ++i) t[i] = this->t(i);
    return t;
}

double GridProfile::left_model(double tt) const {
    if (size() == 0) return 0.0;
    // Anchor the model at the first sample so the lookup is continuous.
    double base = values[0];
    double dtt = tt - t0;
    double v = base * std::exp(left.rate * dtt);
    if (left.poly_degree > 0 && t0 < 0.0 && tt < 0.0)
        v *= std::pow(tt / t0, left.poly_degree);
    return v;
}

double GridProfile::at(double tt) const {
    const Eigen::Index n = size();
    if (n == 0) return 0.0;
    if (tt <= t0) return left_model(tt);
    if (tt >= t_end()) {
        if (right.kind == RightTail::Kind::ConstantLimit) return right.limit;
        return values[n - 1] * std::exp(right.rate * (tt - t_end()));
    }
    double x = (tt - t0) / dt;
    Eigen::Index i = static_cast<Eigen::Index>(std::floor(x));
    i = std::clamp<Eigen::Index>(i, 0, n - 2);
    if (n < 4) {
        double a = x - static_cast<double>(i);
        return (1.0 - a) * values[i] + a * values[i + 1];
    }
    Eigen::Index s = std::clamp<Eigen::Index>(i - 1, 0, n - 4);
    double u = x - static_cast<double>(s);
    double r = 0.0;
    for (int k = 0; k < 4; ++k) {
        double l = 1.0;
        for (int m = 0; m < 4; ++m)
            if (m != k) l *= (u - m) / static_cast<double>(k - m);
        r += l * values[s + k];
    }
    return r;
}

void validate(const GridProfile& p, double limit_tol) {
    if (!(p.dt > 0.0)) throw DomainError("profile grid spacing must be positive");
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p.values[i])) throw DomainError("profile has a non-finite sample");
        if (p.values[i] < 0.0) throw DomainError("profile has a negative sample");
    }
    if (p.right.kind == RightTail::Kind::ConstantLimit && p.size() > 0) {
        Eigen::Index start = p.size() - std::max<Eigen::Index>(1, p.size() / 10);
        for (Eigen::Index i = start; i < p.size(); ++i)
            if (std::abs(p.values[i] - p.right.limit) > limit_tol)
                throw DomainError("declared constant right limit is not reached by the last 10% of samples");
    }
}

bool is_wavefront_candidate(const GridProfile& p, double tol) {
    if (p.right.kind != RightTail::Kind::ConstantLimit || p.right.limit != 1.0) return false;
    try {
        validate(p, tol);
    } catch (const DomainError&) {
        return false;
    }
    return true;
}

LogProfile to_log_profile(const GridProfile& p) {
    LogProfile x{p.t0, p.dt, Eigen::VectorXd(p.size())};
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p.values[i] > 0.0))
            throw DomainError("log profile needs strictly positive samples (index " + std::to_string(i) + ")");
        x.values[i] = -std::log(p.values[i]);
    }
    return x;
}

Eigen::VectorXd from_log_values(const LogProfile& x) { return (-x.values.array()).exp().matrix(); }

double leading_crossing(const GridProfile& p, double level) {
    const Eigen::Index n = p.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (p.values[i] < level && p.values[i + 1] >= level) {
            // Bisection on the cubic interpolant inside the cell.
            double a = p.t(i), b = p.t(i + 1);
            for (int it = 0; it < 60; ++it) {
                double m = 0.5 * (a + b);
                if (p.at(m) < level) a = m; else b = m;
            }
            return 0.5 * (a + b);
        }
    }
    throw ComputeError("profile never crosses the requested level");
}

double normalize_shift(GridProfile& p, double level) {
    double s = leading_crossing(p, level);
    if (s == 0.0) return 0.0;
    GridProfile src = p;
    for (Eigen::Index i = 0; i < p.size(); ++i) p.values[i] = std::max(0.0, src.at(p.t(i) + s));
    if (p.left.rate != 0.0) p.left.coefficient *= std::exp(p.left.rate * s);
    return s;
}

FrontGrid make_front_grid(const Params& p, double left_rate, double right_rate, const GridOptions& opt) {
    const double h = p.h();
    FrontGrid g;
    if (h > 0.0) {
        int nh = std::max(1, opt.nh);
        if (h / nh < opt.dt_floor) nh = static_cast<int>(std::floor(h / opt.dt_floor));
        if (nh >= 8) {
            g.nh = nh;
            g.dt = h / nh;
        } else {
            g.nh = 0;
            g.dt = std::min(opt.dt_floor, opt.dt_no_delay);
        }
    } else {
        g.nh = 0;
        g.dt = opt.dt_no_delay;
    }
    double lo = opt.t_min != 0.0 ? opt.t_min : -40.0 / left_rate;
    double hi = opt.t_max != 0.0 ? opt.t_max : 40.0 / std::abs(right_rate);
    if (!std::isfinite(lo)) lo = -opt.clip;
    if (!std::isfinite(hi)) hi = opt.clip;
    if (opt.t_min == 0.0) lo = std::max(lo, -opt.clip);
    if (opt.t_max == 0.0) hi = std::min(hi, opt.clip);
    g.i0 = static_cast<Eigen::Index>(std::ceil(-lo / g.dt));
    g.n = g.i0 + static_cast<Eigen::Index>(std::ceil(hi / g.dt)) + 1;
    return g;
}

}  // namespace kpp
