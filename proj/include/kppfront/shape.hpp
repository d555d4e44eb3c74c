#pragma once

#include "kppfront/domain.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace kpp {

/// Number of sign changes of samples taken on [-h, 0] (in order) followed by
/// the value at the isolated point 1. Samples with |v| <= zero_tol are
/// skipped. Throws DomainError when every sample is zero.
int sign_changes(const std::vector<double>& on_interval, double at_one, double zero_tol = 0.0);

/// phi'(t_i) by 4th-order central differences (2nd-order one-sided at the
/// two outermost nodes on each side).
Eigen::VectorXd profile_derivative(const GridProfile& phi);

/// sc of the segment s -> phi(t + s) - 1 on [-h, 0] with phi'(t) at s = 1.
/// Throws DomainError when t - h or t + 2 dt leaves the grid.
int sc_profile(const GridProfile& phi, double t, double h, double zero_tol = 0.0);

struct Extremum {
    double t = 0.0;
    double phi = 0.0;
    double V = 0.0;  // -ln phi(t)
    bool is_max = false;
};

struct ClassificationReport {
    enum class Kind { Monotone, SlowOscillating, UnboundedTail };
    Kind kind = Kind::Monotone;
    std::vector<double> crossings;
    std::vector<Extremum> extrema;
    std::vector<int> sc_trace;
    std::vector<std::string> violations;
    bool inconclusive = false;
    std::string note;
};

std::string to_string(ClassificationReport::Kind k);

struct ShapeOptions {
    /// |phi - 1| below this counts as touching the level 1.
    double dead_band = 1e-9;
    /// Extrema whose |phi - 1| is below this are treated as asymptotic noise;
    /// analysis stops at the first such extremum.
    double amplitude_floor = 1e-7;
    /// Relative slack for the extremum inequalities between log-extrema.
    double raz_tol = 1e-6;
};

ClassificationReport classify(const GridProfile& phi, const Params& p, const ShapeOptions& opt = {});

/// Predicates on the first hump after the first crossing Q0 of the level 1.
/// Returns the names of the predicates that fail. Without a crossing only the
/// monotone leading edge is checked.
std::vector<std::string> leading_edge_checks(const GridProfile& phi, const Params& p,
                                             const ShapeOptions& opt = {});

}  // namespace kpp
