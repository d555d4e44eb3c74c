#include "doctest.h"
#include "kppfront/frontsolver.hpp"
#include "kppfront/mapbounds.hpp"
#include "kppfront/shape.hpp"
#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

using namespace kpp;

namespace {

int brute(const std::vector<double>& seg, double at_one) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(seg.size() + 1));
    for (std::size_t k = 0; k < seg.size(); ++k) v[static_cast<Eigen::Index>(k)] = seg[k];
    v[v.size() - 1] = at_one;
    return oracle::brute_sign_changes(v);
}

std::vector<double> sample(const std::function<double(double)>& f, double h, int m) {
    std::vector<double> s;
    for (int k = 0; k <= m; ++k) s.push_back(f(-h + h * k / m));
    return s;
}

GridProfile synthetic(double t0, double t1, double dt, const std::function<double(double)>& f) {
    GridProfile p;
    p.t0 = t0;
    p.dt = dt;
    const auto n = static_cast<Eigen::Index>(std::lround((t1 - t0) / dt)) + 1;
    p.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) p.values[i] = f(p.t(i));
    return p;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("sign changes of one-signed and sine segments") {
    const double h = 1.3;
    CHECK(sign_changes(sample([](double s) { return 1.0 + s * s; }, h, 50), 2.0) == 0);
    CHECK(sign_changes(sample([](double) { return 0.0; }, h, 10), 1.0) == 0);
    auto one = sample([h](double s) { return std::sin(M_PI * s / h); }, h, 200);
    CHECK(sign_changes(one, 1.0) == 1);
    CHECK(sign_changes(one, 1.0) == brute(one, 1.0));
    auto three = sample([h](double s) { return std::sin(3 * M_PI * s / h); }, h, 300);
    // The samples run -, +, - on [-h, 0]; a negative end value adds no change.
    CHECK(sign_changes(three, -1.0) == 2);
    CHECK(sign_changes(three, 1.0) == 3);
    CHECK(sign_changes(three, -1.0) == brute(three, -1.0));
    CHECK(sign_changes(three, 1.0) == brute(three, 1.0));
    CHECK_THROWS_AS(sign_changes(std::vector<double>(8, 0.0), 0.0), DomainError);
}

TEST_CASE("sign changes agree with brute force on random sequences") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> len(1, 14), pick(-1, 1);
    for (int k = 0; k < 2000; ++k) {
        std::vector<double> seg(static_cast<std::size_t>(len(rng)));
        for (double& v : seg) v = pick(rng) * 0.5;
        double end = pick(rng);
        int b = brute(seg, end);
        if (b < 0) {
            CHECK_THROWS_AS(sign_changes(seg, end), DomainError);
        } else {
            CHECK(sign_changes(seg, end) == b);
        }
    }
}

TEST_CASE("sc of a monotone leading edge is at most one") {
    GridProfile p = synthetic(-20.0, 5.0, 1.0 / 64, [](double t) { return 0.9 / (1.0 + std::exp(-t)); });
    for (double t : {-5.0, 0.0, 2.0}) CHECK(sc_profile(p, t, 1.0) <= 1);
    CHECK_THROWS_AS(sc_profile(p, -19.9, 1.0), DomainError);
}

TEST_CASE("fast oscillation is not slow") {
    const double h = 1.0;
    auto f = [h](double t) { return 1.0 + std::exp(-0.1 * t) * std::sin(5.0 * M_PI * t / h) * 0.3; };
    GridProfile p = synthetic(0.0, 20.0, 1.0 / 64, f);
    int sc = sc_profile(p, 5.0, h);
    CHECK(sc >= 3);
    std::vector<double> seg;
    for (int k = 0; k <= 64; ++k) seg.push_back(p.at(5.0 - h + h * k / 64) - 1.0);
    double d = (p.at(5.0 + 1e-4) - p.at(5.0 - 1e-4)) / 2e-4;
    CHECK(sc == brute(seg, d));

    auto g = [&](double t) { return t <= 0.0 ? 2.0 / (1.0 + std::exp(-t)) : f(t); };
    GridProfile q = synthetic(-30.0, 30.0, 1.0 / 64, g);
    ClassificationReport r = classify(q, make_params(2.0, 0.5));
    CHECK(r.kind == ClassificationReport::Kind::SlowOscillating);
    CHECK(has(r.violations, "sc_trace"));
    CHECK(has(r.violations, "crossing_spacing"));
}

TEST_CASE("monotone fronts classify as monotone with clean leading edges") {
    for (auto [c, tau] : {std::pair{3.0, 0.1}, std::pair{2.0, 0.25}}) {
        Params p = make_params(c, tau);
        FrontResult r = monotone_front(p);
        ClassificationReport cr = classify(r.profile, p);
        CHECK(cr.kind == ClassificationReport::Kind::Monotone);
        CHECK(cr.violations.empty());
        CHECK(cr.extrema.empty());
        CHECK(leading_edge_checks(r.profile, p).empty());
    }
}

TEST_CASE("oscillating semi-wavefront at (2, 1.2)") {
    Params p = make_params(2.0, 1.2);
    FrontResult r = semi_wavefront(p);
    ClassificationReport cr = classify(r.profile, p);
    CHECK(cr.kind == ClassificationReport::Kind::SlowOscillating);
    CHECK(cr.violations.empty());
    CHECK_FALSE(cr.inconclusive);
    REQUIRE(cr.crossings.size() >= 2);
    REQUIRE_FALSE(cr.sc_trace.empty());
    for (int s : cr.sc_trace) CHECK((s == 1 || s == 2));
    for (std::size_t j = 0; j + 2 < cr.crossings.size(); ++j) CHECK(cr.crossings[j + 2] - cr.crossings[j] > p.h());
    // Extrema alternate, starting with a maximum after the first crossing.
    bool want_max = true;
    for (const Extremum& e : cr.extrema) {
        CHECK(e.is_max == want_max);
        CHECK(e.V == doctest::Approx(-std::log(e.phi)).epsilon(1e-12));
        want_max = !want_max;
    }
    for (std::size_t j = 1; j < cr.extrema.size(); ++j) {
        double bound = p.h() * f_bound(w_map(cr.extrema[j - 1].V), p.c);
        if (j % 2 == 1) CHECK(cr.extrema[j].V <= bound + 1e-6 * (1 + std::abs(bound)));
        else CHECK(cr.extrema[j].V >= bound - 1e-6 * (1 + std::abs(bound)));
    }
    CHECK(leading_edge_checks(r.profile, p).empty());
}

TEST_CASE("steep crossing is reported by the leading-edge checks") {
    Params p = make_params(2.0, 0.5);
    GridProfile q = synthetic(-50.0, 50.0, 1.0 / 64, [](double t) { return 1.0 + 2.0 / M_PI * std::atan(10.0 * t); });
    q.right = RightTail{RightTail::Kind::ConstantLimit, 2.0, 0.0};
    auto bad = leading_edge_checks(q, p);
    CHECK(has(bad, "slope_at_crossing"));
}

TEST_CASE("growing tails classify as unbounded") {
    Params p = make_params(2.0, 0.5);
    GridProfile q = synthetic(-10.0, 10.0, 1.0 / 64, [](double t) { return std::exp(2.5 * t); });
    q.right = RightTail{RightTail::Kind::ExponentialGrowth, 0.0, 2.5};
    ClassificationReport r = classify(q, p);
    CHECK(r.kind == ClassificationReport::Kind::UnboundedTail);
    CHECK(r.violations.empty());
}

TEST_CASE("derivative is fourth order in the interior") {
    GridProfile q = synthetic(0.0, 3.0, 0.01, [](double t) { return std::sin(t); });
    Eigen::VectorXd d = profile_derivative(q);
    for (Eigen::Index i = 2; i + 2 < q.size(); ++i) CHECK(std::abs(d[i] - std::cos(q.t(i))) <= 1e-9);
}
