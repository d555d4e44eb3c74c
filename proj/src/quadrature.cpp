#include "kppfront/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kpp {

void gauss_legendre(int m, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x = es.eigenvalues();
    w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

namespace {

/// Coefficients of the Lagrange basis polynomial for node k of `nodes`,
/// in powers of the scaled variable s = u / dt.
std::array<double, 4> lagrange_coeffs(const std::array<int, 4>& nodes, int count, int k) {
    std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
    double denom = 1.0;
    int deg = 0;
    for (int m = 0; m < count; ++m) {
        if (m == k) continue;
        // multiply by (s - nodes[m])
        std::array<double, 4> next{0.0, 0.0, 0.0, 0.0};
        for (int d = 0; d <= deg; ++d) {
            next[d + 1] += poly[d];
            next[d] -= nodes[m] * poly[d];
        }
        poly = next;
        ++deg;
        denom *= nodes[k] - nodes[m];
    }
    for (double& v : poly) v /= denom;
    return poly;
}

/// Scaled moments mom[k] = int_0^dt (u/dt)^k u^power e^{-z u} du, k = 0..3.
std::array<double, 4> moments(double z, int power, double dt) {
    std::array<double, 4> mom{};
    if (z * dt <= 1.0) {
        static const struct GL {
            Eigen::VectorXd x, w;
            GL() { gauss_legendre(16, x, w); }
        } gl;
        for (int q = 0; q < gl.x.size(); ++q) {
            double s = 0.5 * (gl.x[q] + 1.0);
            double u = s * dt;
            double ker = std::pow(u, power) * std::exp(-z * u) * 0.5 * gl.w[q] * dt;
            double sp = 1.0;
            for (int k = 0; k < 4; ++k) {
                mom[k] += sp * ker;
                sp *= s;
            }
        }
        return mom;
    }
    // Raw moments r_j = int_0^dt u^j e^{-z u} du by upward recurrence, which
    // is stable once z dt > 1.
    double e = std::exp(-z * dt);
    std::array<double, 5> r{};
    r[0] = -std::expm1(-z * dt) / z;
    double dtj = 1.0;
    for (int j = 1; j < 5; ++j) {
        dtj *= dt;
        r[j] = (j * r[j - 1] - dtj * e) / z;
    }
    double scale = 1.0;
    for (int k = 0; k < 4; ++k) {
        mom[k] = r[k + power] / scale;
        scale *= dt;
    }
    return mom;
}

}  // namespace

CellWeights cell_weights(double z, int power, double dt, QuadratureOrder order) {
    CellWeights cw;
    cw.order = order;
    auto mom = moments(z, power, dt);
    if (order == QuadratureOrder::Linear) {
        cw.width = 2;
        for (int kind = 0; kind < 3; ++kind) {
            cw.offsets[kind] = {0, 1, 0, 0};
            cw.w[kind] = {mom[0] - mom[1], mom[1], 0.0, 0.0};
        }
        return cw;
    }
    cw.width = 4;
    cw.offsets[0] = {0, 1, 2, 3};
    cw.offsets[1] = {-1, 0, 1, 2};
    cw.offsets[2] = {-2, -1, 0, 1};
    for (int kind = 0; kind < 3; ++kind) {
        for (int k = 0; k < 4; ++k) {
            auto poly = lagrange_coeffs(cw.offsets[kind], 4, k);
            double s = 0.0;
            for (int d = 0; d < 4; ++d) s += poly[d] * mom[d];
            cw.w[kind][k] = s;
        }
    }
    return cw;
}

void backward_pass(const Eigen::VectorXd& F, const CellWeights& cw, double decay, double tail, Eigen::VectorXd& out) {
    const Eigen::Index n = F.size();
    if (n < cw.width) throw std::invalid_argument("grid too short for the quadrature stencil");
    out.resize(n);
    out[n - 1] = tail;
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        const int kind = cw.width == 4 ? cell_kind(i, n) : 1;
        const auto& o = cw.offsets[kind];
        const auto& w = cw.w[kind];
        double cell = 0.0;
        for (int k = 0; k < cw.width; ++k) cell += w[k] * F[i + o[k]];
        out[i] = decay * out[i + 1] + cell;
    }
}

Eigen::SparseMatrix<double> cell_matrix(const CellWeights& cw, Eigen::Index n) {
    if (n < cw.width) throw std::invalid_argument("grid too short for the quadrature stencil");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n) * cw.width);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const int kind = cw.width == 4 ? cell_kind(i, n) : 1;
        for (int k = 0; k < cw.width; ++k) trip.emplace_back(i, i + cw.offsets[kind][k], cw.w[kind][k]);
    }
    Eigen::SparseMatrix<double> W(n, n);
    W.setFromTriplets(trip.begin(), trip.end());
    return W;
}

}  // namespace kpp
