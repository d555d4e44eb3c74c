#include "doctest.h"
#include "kppfront/domain.hpp"
#include "kppfront/frontsolver.hpp"

#include <cmath>
#include <random>

using namespace kpp;

namespace {

GridProfile exp_profile(double t0, double dt, int n) {
    GridProfile p;
    p.t0 = t0;
    p.dt = dt;
    p.values.resize(n);
    for (int i = 0; i < n; ++i) p.values[i] = std::exp(p.t(i));
    p.right = RightTail{RightTail::Kind::ExponentialGrowth, 1.0, 1.0};
    return p;
}

}  // namespace

TEST_CASE("params reject negative delay and carry h = c tau") {
    CHECK_THROWS_AS(make_params(2.0, -0.1), DomainError);
    Params p = make_params(2.5, 0.4);
    CHECK(p.h() == doctest::Approx(1.0));
    CHECK(p.admissible());
    CHECK_FALSE(make_params(1.5, 0.1).admissible());
}

TEST_CASE("validate rejects bad grids and values") {
    GridProfile p = exp_profile(-5.0, 0.1, 20);
    CHECK_NOTHROW(validate(p));
    p.dt = 0.0;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = exp_profile(-5.0, 0.1, 20);
    p.values[3] = -1e-3;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = exp_profile(-5.0, 0.1, 20);
    p.values[3] = NAN;
    CHECK_THROWS_AS(validate(p), DomainError);
}

TEST_CASE("constant limit must be reached by the last tenth") {
    GridProfile p;
    p.t0 = 0.0;
    p.dt = 0.1;
    p.values = Eigen::VectorXd::Constant(100, 0.5);
    p.right = RightTail{RightTail::Kind::ConstantLimit, 1.0, 0.0};
    CHECK_THROWS_AS(validate(p), DomainError);
    CHECK_FALSE(is_wavefront_candidate(p));
    p.values.setConstant(1.0);
    CHECK_NOTHROW(validate(p));
    CHECK(is_wavefront_candidate(p));
}

TEST_CASE("log transform of simple profiles") {
    GridProfile one;
    one.t0 = -1.0;
    one.dt = 0.5;
    one.values = Eigen::VectorXd::Ones(5);
    LogProfile x = to_log_profile(one);
    CHECK(x.values.cwiseAbs().maxCoeff() == 0.0);

    GridProfile e = exp_profile(-3.0, 0.25, 25);
    LogProfile lx = to_log_profile(e);
    for (Eigen::Index i = 0; i < lx.values.size(); ++i) CHECK(lx.values[i] == doctest::Approx(-e.t(i)).epsilon(1e-15));
}

TEST_CASE("log transform rejects non-positive samples") {
    GridProfile p = exp_profile(0.0, 1.0, 4);
    p.values[1] = 0.0;
    CHECK_THROWS_AS(to_log_profile(p), DomainError);
}

TEST_CASE("log round trip on random positive profiles") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> logv(-700.0, 5.0);
    for (int k = 0; k < 20; ++k) {
        GridProfile p;
        p.t0 = 0.0;
        p.dt = 0.1;
        p.values.resize(200);
        for (auto& v : p.values) v = std::exp(logv(rng));
        Eigen::VectorXd back = from_log_values(to_log_profile(p));
        double rel = ((back - p.values).array() / p.values.array()).abs().maxCoeff();
        CHECK(rel <= 4e-16);
    }
}

TEST_CASE("log round trip of a computed front") {
    FrontResult r = monotone_front(make_params(2.5, 0.2));
    Eigen::VectorXd back = from_log_values(to_log_profile(r.profile));
    double rel = ((back - r.profile.values).array() / r.profile.values.array()).abs().maxCoeff();
    CHECK(rel <= 1e-14);
}

TEST_CASE("front grid puts 0 on a node and resolves the lag") {
    Params p = make_params(2.5, 0.4);
    FrontGrid g = make_front_grid(p, 0.5, 0.3);
    CHECK(g.t(g.i0) == 0.0);
    CHECK(g.nh >= 64);
    CHECK(std::abs(g.dt * g.nh - p.h()) <= 1e-14);
    CHECK(g.t0() >= -200.0 - 1e-9);
    CHECK(g.t_end() <= 200.0 + 1e-9);
    CHECK(g.t0() <= -40.0 / 0.5 + g.dt);
}

TEST_CASE("window options pin the truncation") {
    GridOptions opt;
    opt.t_min = -10.0;
    opt.t_max = 5.0;
    FrontGrid g = make_front_grid(make_params(3.0, 0.1), 0.38, 1.0, opt);
    CHECK(g.t0() == doctest::Approx(-10.0).epsilon(1e-2));
    CHECK(g.t_end() == doctest::Approx(5.0).epsilon(1e-2));
}

TEST_CASE("interpolation reproduces cubics and tails extend the grid") {
    GridProfile p;
    p.t0 = -2.0;
    p.dt = 0.25;
    p.values.resize(17);
    auto cubic = [](double t) { return 5.0 + t + 0.3 * t * t - 0.1 * t * t * t; };
    for (int i = 0; i < 17; ++i) p.values[i] = cubic(p.t(i));
    for (double t : {-1.9, -0.3, 0.77, 1.95}) CHECK(p.at(t) == doctest::Approx(cubic(t)).epsilon(1e-13));

    GridProfile e = exp_profile(-3.0, 0.1, 31);
    e.left = LeftTail{1.0, 1.0, 0};
    CHECK(e.at(-10.0) == doctest::Approx(std::exp(-10.0)).epsilon(1e-14));
    CHECK(e.left_model(-4.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
}

TEST_CASE("shift normalization pins the half level at 0") {
    GridProfile p;
    p.t0 = -30.0;
    p.dt = 0.05;
    p.values.resize(1201);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.values[i] = 1.0 / (1.0 + std::exp(-(p.t(i) - 3.0)));
    p.left = LeftTail{std::exp(-3.0), 1.0, 0};
    CHECK(leading_crossing(p) == doctest::Approx(3.0).epsilon(1e-6));
    double s = normalize_shift(p);
    CHECK(s == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(p.at(0.0) == doctest::Approx(0.5).epsilon(1e-8));
}
