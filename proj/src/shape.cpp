#include "kppfront/shape.hpp"

#include "kppfront/mapbounds.hpp"

#include <algorithm>
#include <cmath>

namespace kpp {

namespace {

int sign_of(double v, double tol) {
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

struct Features {
    std::vector<double> crossings;
    std::vector<Extremum> extrema;
    double t_cut = 0.0;  // analysis horizon
    Eigen::VectorXd d;
};

double bisect_level(const GridProfile& phi, double a, double b, double level) {
    double fa = phi.at(a) - level;
    for (int k = 0; k < 60 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++k) {
        double m = 0.5 * (a + b);
        double fm = phi.at(m) - level;
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

Features detect(const GridProfile& phi, const ShapeOptions& opt) {
    Features f;
    const Eigen::Index n = phi.size();
    f.d = profile_derivative(phi);
    f.t_cut = phi.t_end();

    int last = 0;
    Eigen::Index last_i = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int s = sign_of(phi.values[i] - 1.0, opt.dead_band);
        if (s == 0) continue;
        if (last != 0 && s != last) f.crossings.push_back(bisect_level(phi, phi.t(last_i), phi.t(i), 1.0));
        last = s;
        last_i = i;
    }

    std::vector<Extremum> raw;
    last = 0;
    last_i = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int s = sign_of(f.d[i], 0.0);
        if (s == 0) continue;
        if (last != 0 && s != last) {
            double ta = phi.t(last_i), tb = phi.t(i);
            double da = f.d[last_i], db = f.d[i];
            Extremum e;
            e.t = ta + (tb - ta) * da / (da - db);
            e.phi = phi.at(e.t);
            e.V = -std::log(e.phi);
            e.is_max = last > 0;
            raw.push_back(e);
        }
        last = s;
        last_i = i;
    }
    // A max/min pair closer than 2 dt is a flat inflection, not two extrema.
    for (std::size_t k = 0; k < raw.size(); ++k) {
        if (k + 1 < raw.size() && raw[k + 1].t - raw[k].t < 2.0 * phi.dt) {
            ++k;
            continue;
        }
        f.extrema.push_back(raw[k]);
    }
    for (std::size_t k = 0; k < f.extrema.size(); ++k) {
        if (std::abs(f.extrema[k].phi - 1.0) <= opt.amplitude_floor) {
            f.t_cut = f.extrema[k].t;
            f.extrema.resize(k);
            break;
        }
    }
    std::erase_if(f.crossings, [&](double q) { return q > f.t_cut; });
    return f;
}

double derivative_at(const GridProfile& phi, const Eigen::VectorXd& d, double t) {
    double x = (t - phi.t0) / phi.dt;
    Eigen::Index i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), 0, phi.size() - 2);
    double w = x - static_cast<double>(i);
    return (1.0 - w) * d[i] + w * d[i + 1];
}

std::vector<std::string> edge_checks(const GridProfile& phi, const Params& p, const Features& f,
                                     const ShapeOptions& opt) {
    std::vector<std::string> bad;
    const Eigen::Index n = phi.size();
    const double c = p.c, h = p.h();
    if (f.crossings.empty()) {
        for (Eigen::Index i = 2; i + 2 < n; ++i) {
            if (1.0 - phi.values[i] > opt.amplitude_floor && f.d[i] <= 0.0) {
                bad.emplace_back("increasing_before_first_crossing");
                break;
            }
        }
        return bad;
    }
    const double Q0 = f.crossings.front();
    bool inc = derivative_at(phi, f.d, Q0) > 0.0;
    bool above = true, below = true;
    double hump_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = phi.t(i);
        double e = std::exp(c * (t - Q0));
        if (t <= Q0) {
            if (i >= 2 && f.d[i] <= 0.0) inc = false;
            if (t < Q0 && !(phi.values[i] > e - 1e-12)) above = false;
        } else if (t <= Q0 + h) {
            if (!(phi.values[i] < e + 1e-12)) below = false;
        }
        if (t >= Q0 && t <= Q0 + h) hump_max = std::max(hump_max, phi.values[i]);
    }
    if (!inc) bad.emplace_back("increasing_before_first_crossing");
    if (!above) bad.emplace_back("above_exponential_before_crossing");
    if (!below) bad.emplace_back("below_exponential_after_crossing");
    if (!(derivative_at(phi, f.d, Q0) < c)) bad.emplace_back("slope_at_crossing");
    if (!(hump_max <= std::exp(c * h) * (1.0 + 1e-12))) bad.emplace_back("max_after_crossing");
    if (h > 0.0) {
        for (const Extremum& e : f.extrema) {
            if (e.t > Q0 && !e.is_max) {
                if (!(e.phi >= apriori_bounds(p).L_e)) bad.emplace_back("first_minimum_above_Le");
                break;
            }
        }
    }
    return bad;
}

}  // namespace

int sign_changes(const std::vector<double>& on_interval, double at_one, double zero_tol) {
    int count = 0, last = 0;
    bool any = false;
    auto visit = [&](double v) {
        int s = sign_of(v, zero_tol);
        if (s == 0) return;
        any = true;
        if (last != 0 && s != last) ++count;
        last = s;
    };
    for (double v : on_interval) visit(v);
    visit(at_one);
    if (!any) throw DomainError("sign changes are undefined for the zero function");
    return count;
}

Eigen::VectorXd profile_derivative(const GridProfile& phi) {
    const Eigen::Index n = phi.size();
    const Eigen::VectorXd& v = phi.values;
    const double dt = phi.dt;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (n < 5) throw DomainError("profile_derivative needs at least 5 samples");
    for (Eigen::Index i = 2; i + 2 < n; ++i)
        d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dt);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    d[1] = (v[2] - v[0]) / (2.0 * dt);
    d[n - 2] = (v[n - 1] - v[n - 3]) / (2.0 * dt);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    return d;
}

int sc_profile(const GridProfile& phi, double t, double h, double zero_tol) {
    const double dt = phi.dt;
    if (t - h < phi.t0 - 1e-12 * dt || t + 2.0 * dt > phi.t_end() + 1e-12 * dt || t - 2.0 * dt < phi.t0)
        throw DomainError("sc_profile: the window [t - h, t] is not covered by the grid");
    int m = std::max(1, static_cast<int>(std::ceil(h / dt - 1e-9)));
    std::vector<double> seg(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) seg[static_cast<std::size_t>(k)] = phi.at(t - h + h * k / m) - 1.0;
    double d = (phi.at(t - 2 * dt) - 8.0 * phi.at(t - dt) + 8.0 * phi.at(t + dt) - phi.at(t + 2 * dt)) / (12.0 * dt);
    return sign_changes(seg, d, zero_tol);
}

std::string to_string(ClassificationReport::Kind k) {
    switch (k) {
        case ClassificationReport::Kind::Monotone: return "Monotone";
        case ClassificationReport::Kind::SlowOscillating: return "SlowOscillating";
        case ClassificationReport::Kind::UnboundedTail: return "UnboundedTail";
    }
    return "?";
}

std::vector<std::string> leading_edge_checks(const GridProfile& phi, const Params& p, const ShapeOptions& opt) {
    return edge_checks(phi, p, detect(phi, opt), opt);
}

ClassificationReport classify(const GridProfile& phi, const Params& p, const ShapeOptions& opt) {
    using Kind = ClassificationReport::Kind;
    ClassificationReport r;
    Features f = detect(phi, opt);
    r.crossings = f.crossings;
    r.extrema = f.extrema;
    const Eigen::Index n = phi.size();
    const double h = p.h();
    auto flag = [&r](const char* name) {
        if (std::find(r.violations.begin(), r.violations.end(), name) == r.violations.end())
            r.violations.emplace_back(name);
    };

    double big = h > 0.0 ? std::max(apriori_bounds(p).U_e, std::exp(p.c * h)) : 2.0;
    bool growing = phi.right.kind == RightTail::Kind::ExponentialGrowth ||
                   (phi.values[n - 1] > big && f.d[n - 3] > 0.0);
    if (growing) {
        r.kind = Kind::UnboundedTail;
        // Eventually phi' > 0 and phi(t) > A e^{ct}: ln phi - c t must not decrease.
        double t_last = f.extrema.empty() ? phi.t0 : f.extrema.back().t;
        double tail_from = std::max(t_last, phi.t(n - 1) - 0.2 * (phi.t_end() - phi.t0));
        double ref = -INFINITY;
        for (Eigen::Index i = 2; i + 2 < n; ++i) {
            if (phi.t(i) < tail_from) continue;
            if (f.d[i] <= 0.0) flag("eventually_increasing");
            double g = std::log(phi.values[i]) - p.c * phi.t(i);
            if (g < ref - 1e-6 * std::max(1.0, std::abs(ref))) flag("exponential_lower_bound");
            ref = std::max(ref, g);
        }
        return r;
    }

    if (r.extrema.empty()) {
        r.kind = Kind::Monotone;
        if (r.crossings.size() > 1) {
            r.kind = Kind::SlowOscillating;
            flag("one_extremum_between_crossings");
        } else if (r.crossings.size() == 1) {
            r.inconclusive = true;
            r.note = "profile ends before the first extremum after the crossing";
        }
        for (auto& v : edge_checks(phi, p, f, opt)) r.violations.push_back(v);
        return r;
    }

    r.kind = Kind::SlowOscillating;
    if (r.crossings.empty()) {
        flag("oscillation_without_crossing");
        r.inconclusive = true;
        r.note = "critical points found but the level 1 is never crossed";
        return r;
    }
    const double Q0 = r.crossings.front();
    std::vector<Extremum> after;
    for (const Extremum& e : r.extrema) {
        if (e.t > Q0) after.push_back(e);
        else flag("extremum_before_first_crossing");
    }
    for (std::size_t k = 0; k < after.size(); ++k) {
        bool want_max = k % 2 == 0;
        if (after[k].is_max != want_max) flag("extrema_alternate");
    }
    for (std::size_t j = 0; j + 1 < r.crossings.size(); ++j) {
        auto inside = std::count_if(after.begin(), after.end(), [&](const Extremum& e) {
            return e.t > r.crossings[j] && e.t < r.crossings[j + 1];
        });
        if (inside != 1) flag("one_extremum_between_crossings");
    }
    for (std::size_t j = 0; j + 2 < r.crossings.size(); ++j)
        if (!(r.crossings[j + 2] - r.crossings[j] > h)) flag("crossing_spacing");
    for (std::size_t j = 1; j < after.size(); ++j) {
        double bound = h * f_bound(w_map(after[j - 1].V), p.c);
        double slack = opt.raz_tol * (1.0 + std::abs(bound));
        if (j % 2 == 1 && !(after[j].V <= bound + slack)) flag("extremum_inequalities");
        if (j % 2 == 0 && !(after[j].V >= bound - slack)) flag("extremum_inequalities");
    }

    // sc of the composite segment on grid nodes from T0 to the analysis horizon.
    if (!after.empty()) {
        const double T0 = after.front().t;
        const double lag_steps = h / phi.dt;
        const auto m = static_cast<Eigen::Index>(std::floor(lag_steps + 1e-9));
        const bool exact = std::abs(lag_steps - static_cast<double>(m)) < 1e-9;
        std::vector<double> seg;
        for (Eigen::Index i = 2; i + 2 < n; ++i) {
            double t = phi.t(i);
            if (t < T0 || t > f.t_cut) continue;
            if (i - m - 1 < 0) continue;
            seg.clear();
            if (!exact) seg.push_back(phi.at(t - h) - 1.0);
            for (Eigen::Index k = i - m; k <= i; ++k) seg.push_back(phi.values[k] - 1.0);
            int sc;
            try {
                sc = sign_changes(seg, f.d[i], opt.dead_band);
            } catch (const DomainError&) {
                break;
            }
            r.sc_trace.push_back(sc);
            if (sc != 1 && sc != 2) flag("sc_trace");
        }
    } else {
        r.inconclusive = true;
        r.note = "profile ends before the first extremum after the crossing";
    }
    for (auto& v : edge_checks(phi, p, f, opt)) flag(v.c_str());
    return r;
}

}  // namespace kpp
