#pragma once

#include <Eigen/Dense>

#include <complex>

namespace oracle {

/// Non-delayed front phi'' - c phi' + phi (1 - phi) = 0 on [-L, R] by
/// Hermite-Simpson collocation on the system (phi, phi'). Conditions: the
/// stable-manifold Robin condition at R and phi(0) = 1/2.
struct CollocationFront {
    double a = 0.0;
    double dt = 0.0;
    Eigen::VectorXd phi;
    Eigen::VectorXd dphi;
    int newton_steps = 0;
    double defect = 0.0;

    /// Cubic Hermite interpolation between nodes.
    double at(double t) const;
};

CollocationFront collocation_front(double c, double L, double R, double dt);

/// Leading complex zero of psi near the guess, by plain complex Newton.
std::complex<double> track_root(double c, double tau, std::complex<double> guess);

/// d Re(lambda) / dc by central differences of tracked roots.
double root_speed_derivative(double c, double tau, std::complex<double> guess, double dc);

/// sc of a sampled sequence by brute force over all index subsequences
/// (dynamic programming on alternating signs).
int brute_sign_changes(const Eigen::VectorXd& v);

}  // namespace oracle
