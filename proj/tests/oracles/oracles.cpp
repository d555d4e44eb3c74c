#include "oracles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

Vec2 rhs(const Vec2& y, double c) { return Vec2(y[1], c * y[1] - y[0] * (1.0 - y[0])); }

Mat2 jac(const Vec2& y, double c) {
    Mat2 J;
    J << 0.0, 1.0, -(1.0 - 2.0 * y[0]), c;
    return J;
}

}  // namespace

double CollocationFront::at(double t) const {
    double x = (t - a) / dt;
    auto n = phi.size();
    auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), 0, n - 2);
    double s = x - static_cast<double>(i);
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * phi[i] + h10 * dt * dphi[i] + h01 * phi[i + 1] + h11 * dt * dphi[i + 1];
}

CollocationFront collocation_front(double c, double L, double R, double dt) {
    const auto N = static_cast<Eigen::Index>(std::lround((L + R) / dt));
    const auto i0 = static_cast<Eigen::Index>(std::lround(L / dt));
    const double lam0 = 0.5 * (c - std::sqrt(c * c + 4.0));  // stable rate at 1
    const double lam = 0.5 * (c - std::sqrt(c * c - 4.0));

    CollocationFront out;
    out.a = -static_cast<double>(i0) * dt;
    out.dt = dt;
    const Eigen::Index n = N + 1, m = 2 * n;
    Eigen::VectorXd y(m);
    for (Eigen::Index k = 0; k < n; ++k) {
        double t = out.a + dt * static_cast<double>(k);
        double p = 1.0 / (1.0 + std::exp(-lam * t));
        y[2 * k] = p;
        y[2 * k + 1] = lam * p * (1.0 - p);
    }
    Eigen::VectorXd F(m);
    for (int it = 0; it < 50; ++it) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(8 * N + 4));
        for (Eigen::Index k = 0; k < N; ++k) {
            Vec2 ya = y.segment<2>(2 * k), yb = y.segment<2>(2 * k + 2);
            Vec2 fa = rhs(ya, c), fb = rhs(yb, c);
            Vec2 ym = 0.5 * (ya + yb) + dt / 8.0 * (fa - fb);
            Vec2 fm = rhs(ym, c);
            F.segment<2>(2 * k) = yb - ya - dt / 6.0 * (fa + 4.0 * fm + fb);
            Mat2 Ja = jac(ya, c), Jb = jac(yb, c), Jm = jac(ym, c);
            Mat2 I = Mat2::Identity();
            Mat2 Da = -I - dt / 6.0 * (Ja + 4.0 * Jm * (0.5 * I + dt / 8.0 * Ja));
            Mat2 Db = I - dt / 6.0 * (Jb + 4.0 * Jm * (0.5 * I - dt / 8.0 * Jb));
            for (int r = 0; r < 2; ++r)
                for (int q = 0; q < 2; ++q) {
                    trip.emplace_back(2 * k + r, 2 * k + q, Da(r, q));
                    trip.emplace_back(2 * k + r, 2 * k + 2 + q, Db(r, q));
                }
        }
        // (1 - phi)' = lam0 (1 - phi) at R, phi(0) = 1/2.
        F[2 * N] = y[2 * N + 1] + lam0 * (1.0 - y[2 * N]);
        trip.emplace_back(2 * N, 2 * N + 1, 1.0);
        trip.emplace_back(2 * N, 2 * N, -lam0);
        F[2 * N + 1] = y[2 * i0] - 0.5;
        trip.emplace_back(2 * N + 1, 2 * i0, 1.0);
        double fn = F.cwiseAbs().maxCoeff();
        out.defect = fn;
        if (fn < 1e-13) break;
        Eigen::SparseMatrix<double> A(m, m);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw std::runtime_error("collocation: singular Jacobian");
        y -= lu.solve(F);
        out.newton_steps = it + 1;
    }
    out.phi.resize(n);
    out.dphi.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.phi[k] = y[2 * k];
        out.dphi[k] = y[2 * k + 1];
    }
    return out;
}

std::complex<double> track_root(double c, double tau, std::complex<double> z) {
    const double h = c * tau;
    for (int it = 0; it < 100; ++it) {
        std::complex<double> e = std::exp(-z * h);
        std::complex<double> f = z * z - c * z - e;
        std::complex<double> d = 2.0 * z - c + h * e;
        std::complex<double> step = f / d;
        z -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

double root_speed_derivative(double c, double tau, std::complex<double> guess, double dc) {
    std::complex<double> zp = track_root(c + dc, tau, guess);
    std::complex<double> zm = track_root(c - dc, tau, guess);
    std::complex<double> zpp = track_root(c + 2 * dc, tau, guess);
    std::complex<double> zmm = track_root(c - 2 * dc, tau, guess);
    return (-(zpp.real()) + 8.0 * zp.real() - 8.0 * zm.real() + zmm.real()) / (12.0 * dc);
}

int brute_sign_changes(const Eigen::VectorXd& v) {
    // best[s] = longest alternating subsequence ending with sign s.
    int best_pos = 0, best_neg = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0) best_pos = std::max(best_pos, best_neg + 1);
        else if (v[i] < 0) best_neg = std::max(best_neg, best_pos + 1);
    }
    int len = std::max(best_pos, best_neg);
    return len == 0 ? -1 : len - 1;
}

}  // namespace oracle
