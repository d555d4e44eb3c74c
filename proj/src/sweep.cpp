#include "kppfront/sweep.hpp"

#include "kppfront/charspec.hpp"
#include "kppfront/frontsolver.hpp"
#include "kppfront/shape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace kpp {

namespace {

void solve_cell(RegionCell& cell, const SweepOptions& opt) {
    CellEvidence& ev = cell.evidence;
    if (cell.region == Region::SubMinimal) {
        ev.solver_outcome = "not_admissible";
        return;
    }
    ev.attempted = true;
    Params p = make_params(cell.c, cell.tau);
    FrontOptions fo;
    fo.tol = opt.tol;
    fo.max_iter = opt.budget;
    fo.tails = false;
    const bool monotone_mode = cell.region == Region::MonotoneDm;
    try {
        FrontResult r = monotone_mode ? monotone_front(p, fo) : semi_wavefront(p, fo);
        ev.solver_outcome = "converged";
        ev.residual = r.report.residual;
        ev.wavefront = std::abs(r.report.limit_right - 1.0) <= 1e-6;
        ClassificationReport cr = classify(r.profile, p);
        ev.classification_kind = to_string(cr.kind);
        if (!cr.violations.empty()) ev.note = "classifier violations: " + cr.violations.front();
    } catch (const NonConvergence& e) {
        ev.solver_outcome = "failed";
        ev.residual = e.report.residual;
        ev.note = e.what();
    } catch (const std::exception& e) {
        ev.solver_outcome = "failed";
        ev.note = e.what();
    }
    if (ev.solver_outcome != "converged") return;
    const std::string& kind = ev.classification_kind;
    if (monotone_mode && kind != "Monotone") {
        ev.contradiction = true;
        ev.note = "non-monotone profile inside the monotone region";
    }
    if (cell.region == Region::NonMonotoneCandidate && kind == "Monotone" && ev.wavefront) {
        ev.contradiction = true;
        ev.note = "monotone wavefront outside the monotone region";
    }
    if (cell.region == Region::NoFront && ev.wavefront) {
        ev.contradiction = true;
        ev.note = "wavefront found beyond the non-existence threshold";
    }
}

}  // namespace

std::string to_string(Region r) {
    switch (r) {
        case Region::SubMinimal: return "SubMinimal";
        case Region::MonotoneDm: return "MonotoneDm";
        case Region::NonMonotoneCandidate: return "NonMonotoneCandidate";
        case Region::SemiOnly: return "SemiOnly";
        case Region::NoFront: return "NoFront";
    }
    return "?";
}

Region analytic_region(double tau, double c) {
    if (c < 2.0) return Region::SubMinimal;
    if (c <= c_star(tau).as_double()) return Region::MonotoneDm;
    if (c <= c_starstar(tau).as_double()) return Region::NonMonotoneCandidate;
    return Region::NoFront;
}

std::vector<RegionCell> sweep_plane(const std::vector<double>& tau_grid, const std::vector<double>& c_grid,
                                    const SweepOptions& opt) {
    if (!std::is_sorted(tau_grid.begin(), tau_grid.end()) || !std::is_sorted(c_grid.begin(), c_grid.end()))
        throw DomainError("sweep grids must be sorted ascending");
    for (double t : tau_grid)
        if (!(t >= 0.0)) throw DomainError("sweep delays must be >= 0");
    const std::size_t nt = tau_grid.size(), nc = c_grid.size();
    std::vector<RegionCell> cells(nt * nc);
    for (std::size_t i = 0; i < nt; ++i) {
        const double cs = c_star(tau_grid[i]).as_double();
        const double css = c_starstar(tau_grid[i]).as_double();
        for (std::size_t j = 0; j < nc; ++j) {
            RegionCell& cell = cells[i * nc + j];
            cell.tau = tau_grid[i];
            cell.c = c_grid[j];
            cell.c_star = cs;
            cell.c_starstar = css;
            cell.region = analytic_region(cell.tau, cell.c);
            cell.evidence.residual = std::numeric_limits<double>::quiet_NaN();
        }
    }
    if (opt.evidence == EvidenceMode::None) return cells;

    std::vector<std::size_t> work;
    const std::size_t stride = static_cast<std::size_t>(std::max(1, opt.sample_stride));
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            bool take = opt.evidence == EvidenceMode::Full || (i % stride == 0 && j % stride == 0);
            const Region r = cells[i * nc + j].region;
            if (j > 0 && cells[i * nc + j - 1].region != r) take = true;
            if (j + 1 < nc && cells[i * nc + j + 1].region != r) take = true;
            if (i > 0 && cells[(i - 1) * nc + j].region != r) take = true;
            if (i + 1 < nt && cells[(i + 1) * nc + j].region != r) take = true;
            if (take) work.push_back(i * nc + j);
        }
    }

    unsigned nthreads = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::thread::hardware_concurrency();
    nthreads = std::clamp<unsigned>(nthreads, 1u, static_cast<unsigned>(std::max<std::size_t>(1, work.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) solve_cell(cells[work[k]], opt);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return cells;
}

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw DomainError("bad range '" + spec + "': expected start:stop:step");
        }
        if (used != item.size()) throw DomainError("bad range '" + spec + "': expected start:stop:step");
        parts.push_back(v);
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw DomainError("bad range '" + spec + "': expected start:stop:step with step > 0");
    const double a = parts[0], b = parts[1], s = parts[2];
    const auto n = static_cast<long>(std::floor((b - a) / s + 1e-9));
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) g.push_back(a + s * static_cast<double>(k));
    return g;
}

}  // namespace kpp
