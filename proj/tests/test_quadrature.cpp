#include "doctest.h"
#include "kppfront/quadrature.hpp"

#include <cmath>
#include <functional>

using namespace kpp;

namespace {

/// Composite Simpson with many panels, used as the reference integral.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
    double h = (b - a) / n, s = f(a) + f(b);
    for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double cell_value(const CellWeights& cw, int kind, const std::function<double(double)>& F, double ti, double dt) {
    double s = 0.0;
    for (int k = 0; k < cw.width; ++k) s += cw.w[kind][k] * F(ti + dt * cw.offsets[kind][k]);
    return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
    for (int m : {2, 5, 16}) {
        Eigen::VectorXd x, w;
        gauss_legendre(m, x, w);
        CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * m - 1; ++d) {
            double q = 0.0;
            for (int k = 0; k < m; ++k) q += w[k] * std::pow(x[k], d);
            double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
            CHECK(std::abs(q - exact) <= 1e-13);
        }
    }
}

TEST_CASE("cubic cells integrate cubics exactly against the kernel") {
    auto F = [](double s) { return 1.0 - 2.0 * s + 0.5 * s * s + 0.25 * s * s * s; };
    const double dt = 0.1, ti = 0.7;
    for (double z : {0.3, 2.0, 40.0, -1.5}) {
        for (int power : {0, 1}) {
            CellWeights cw = cell_weights(z, power, dt, QuadratureOrder::Cubic);
            double ref = simpson([&](double u) { return F(ti + u) * std::pow(u, power) * std::exp(-z * u); }, 0.0, dt);
            for (int kind = 0; kind < 3; ++kind)
                CHECK(cell_value(cw, kind, F, ti, dt) == doctest::Approx(ref).epsilon(1e-11));
        }
    }
}

TEST_CASE("linear cells integrate lines exactly") {
    auto F = [](double s) { return 3.0 - 0.5 * s; };
    const double dt = 0.25, ti = -1.0;
    for (double z : {0.5, 12.0}) {
        CellWeights cw = cell_weights(z, 0, dt, QuadratureOrder::Linear);
        double ref = simpson([&](double u) { return F(ti + u) * std::exp(-z * u); }, 0.0, dt);
        CHECK(cell_value(cw, 1, F, ti, dt) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("backward pass reproduces the truncated exponential integral") {
    const double a = 0.7, z = 1.3, T = 10.0;
    auto error = [&](double dt, QuadratureOrder order) {
        const auto n = static_cast<Eigen::Index>(std::lround(T / dt)) + 1;
        Eigen::VectorXd F(n);
        for (Eigen::Index i = 0; i < n; ++i) F[i] = std::exp(-a * dt * i);
        CellWeights cw = cell_weights(z, 0, dt, order);
        Eigen::VectorXd I;
        backward_pass(F, cw, std::exp(-z * dt), 0.0, I);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double t = dt * i;
            double exact = std::exp(-a * t) * (1.0 - std::exp(-(a + z) * (T - t))) / (a + z);
            worst = std::max(worst, std::abs(I[i] - exact));
        }
        return worst;
    };
    double c1 = error(0.05, QuadratureOrder::Cubic), c2 = error(0.025, QuadratureOrder::Cubic);
    double l1 = error(0.05, QuadratureOrder::Linear), l2 = error(0.025, QuadratureOrder::Linear);
    CHECK(c1 <= 1e-7);
    CHECK(std::log2(c1 / c2) >= 3.5);
    CHECK(std::log2(l1 / l2) >= 1.8);
}

TEST_CASE("cell matrix agrees with the cell sums") {
    const double dt = 0.1;
    const int n = 30;
    Eigen::VectorXd F(n);
    for (int i = 0; i < n; ++i) F[i] = std::sin(0.3 * i) + 2.0;
    CellWeights cw = cell_weights(0.8, 0, dt, QuadratureOrder::Cubic);
    Eigen::VectorXd cells = cell_matrix(cw, n) * F;
    Eigen::VectorXd I;
    backward_pass(F, cw, std::exp(-0.8 * dt), 0.0, I);
    CHECK(cells[n - 1] == 0.0);
    for (int i = 0; i + 1 < n; ++i) CHECK(cells[i] == doctest::Approx(I[i] - std::exp(-0.8 * dt) * I[i + 1]).epsilon(1e-12));
    CHECK_THROWS(cell_matrix(cw, 3));
}
