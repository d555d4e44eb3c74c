#pragma once

#include "kppfront/domain.hpp"

#include <string>
#include <vector>

namespace kpp {

enum class Region { SubMinimal, MonotoneDm, NonMonotoneCandidate, SemiOnly, NoFront };

std::string to_string(Region r);

/// Analytic label from the critical-speed curves alone.
Region analytic_region(double tau, double c);

struct CellEvidence {
    bool attempted = false;
    std::string solver_outcome = "none";  // none | converged | failed | not_admissible
    std::string classification_kind;     // empty when not classified
    double residual = 0.0;                // NaN when no solve ran
    bool wavefront = false;               // converged with phi(+inf) = 1
    bool contradiction = false;
    std::string note;
};

struct RegionCell {
    double tau = 0.0;
    double c = 0.0;
    Region region = Region::SubMinimal;
    double c_star = 0.0;      // +inf sentinel allowed
    double c_starstar = 0.0;  // +inf sentinel allowed
    CellEvidence evidence;
};

enum class EvidenceMode { None, Sampled, Full };

struct SweepOptions {
    EvidenceMode evidence = EvidenceMode::Sampled;
    /// Every stride-th cell in both directions gets a solve in sampled mode,
    /// plus every cell whose c-neighbour carries a different label.
    int sample_stride = 4;
    /// Per-cell iteration budget passed to the solvers.
    int budget = 5000;
    double tol = 1e-8;
    /// Worker threads; 0 means hardware concurrency.
    int threads = 0;
};

/// Cells in row-major order: index = i_tau * c_grid.size() + i_c.
/// Grids must be sorted ascending (DomainError otherwise).
std::vector<RegionCell> sweep_plane(const std::vector<double>& tau_grid, const std::vector<double>& c_grid,
                                    const SweepOptions& opt = {});

/// Parses "start:stop:step" into an inclusive ascending grid.
std::vector<double> parse_range(const std::string& spec);

}  // namespace kpp
