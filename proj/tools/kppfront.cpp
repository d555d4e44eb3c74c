#include "CLI11.hpp"
#include "../tests/acceptance/acceptance.hpp"
#include "kppfront/charspec.hpp"
#include "kppfront/frontsolver.hpp"
#include "kppfront/io.hpp"
#include "kppfront/mapbounds.hpp"
#include "kppfront/pdesim.hpp"
#include "kppfront/shape.hpp"
#include "kppfront/sweep.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

struct Globals {
    std::string out_dir = ".";
    std::string log_level = "warn";
    int threads = 0;
    std::string format = "csv";
};

/// Collects what the run did so the manifest can be written on every exit path.
class Run {
public:
    Run(int argc, char** argv) : start_(std::chrono::steady_clock::now()) {
        for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
    }

    Globals g;
    std::string subcommand;
    json inputs = json::object();
    json tolerances = json::object();

    Level level() const {
        if (g.log_level == "error") return Level::Error;
        if (g.log_level == "info") return Level::Info;
        if (g.log_level == "debug") return Level::Debug;
        return Level::Warn;
    }

    void log(Level l, const std::string& msg) const {
        static const char* names[] = {"error", "warn", "info", "debug"};
        if (static_cast<int>(l) <= static_cast<int>(level())) std::cerr << names[static_cast<int>(l)] << ": " << msg << '\n';
    }

    std::string resolve(const std::string& name) const {
        fs::path p(name);
        if (p.is_absolute()) return p.string();
        return (fs::path(g.out_dir) / p).string();
    }

    /// Writes atomically and records the file for the manifest.
    void emit(const std::string& name, const std::string& content) {
        std::string path = resolve(name);
        kpp::write_atomic(path, content);
        outputs_.push_back(path);
        log(Level::Info, "wrote " + path);
    }

    void write_manifest(int exit_code, const std::string& error) const {
        json m;
        m["tool"] = "kppfront";
        m["version"] = kpp::kVersion;
        m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION);
        m["subcommand"] = subcommand;
        m["argv"] = argv_;
        m["inputs"] = inputs;
        m["globals"] = {{"out_dir", g.out_dir}, {"log_level", g.log_level}, {"threads", g.threads}, {"format", g.format}};
        m["tolerances"] = tolerances;
        m["outputs"] = outputs_;
        m["exit_code"] = exit_code;
        m["error"] = error;
        m["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        fs::path dir = outputs_.empty() ? fs::path(g.out_dir) : fs::path(outputs_.front()).parent_path();
        if (dir.empty()) dir = ".";
        try {
            kpp::write_atomic((dir / "run-manifest.json").string(), kpp::dump_json(m));
        } catch (const std::exception& e) {
            std::cerr << "error: cannot write run-manifest.json: " << e.what() << '\n';
        }
    }

private:
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> argv_;
    std::vector<std::string> outputs_;
};

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw kpp::DomainError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool want_json(const Run& run) { return run.g.format == "json"; }

std::string swap_extension(const std::string& name, const char* ext) {
    fs::path p(name);
    p.replace_extension(ext);
    return p.string();
}

// --- subcommand bodies -----------------------------------------------------

struct CurvesArgs {
    double tau_min = 0.0, tau_max = 2.0;
    int n = 200;
    std::string out = "curves.csv";
};

int do_curves(Run& run, const CurvesArgs& a) {
    if (a.n < 1 || a.tau_max < a.tau_min || a.tau_min < 0.0)
        throw kpp::DomainError("curves needs 0 <= tau-min <= tau-max and n >= 1");
    run.inputs = {{"tau_min", a.tau_min}, {"tau_max", a.tau_max}, {"n", a.n}};
    std::vector<double> taus;
    for (int k = 0; k < a.n; ++k)
        taus.push_back(a.n == 1 ? a.tau_min : a.tau_min + (a.tau_max - a.tau_min) * k / (a.n - 1));
    if (want_json(run)) {
        json arr = json::array();
        for (double t : taus)
            arr.push_back({{"tau", t}, {"c_star", kpp::c_star(t).as_double()}, {"c_starstar", kpp::c_starstar(t).as_double()}});
        run.emit(swap_extension(a.out, ".json"), kpp::dump_json(arr));
    } else {
        run.emit(a.out, kpp::curves_to_csv(taus));
    }
    return 0;
}

struct RootsArgs {
    double c = 2.0, tau = 0.0;
    int jmax = 3;
    std::string out = "roots.json";
};

int do_roots(Run& run, const RootsArgs& a) {
    run.inputs = {{"c", a.c}, {"tau", a.tau}, {"jmax", a.jmax}};
    kpp::Params p = kpp::make_params(a.c, a.tau);
    json arr = json::array();
    auto real = kpp::real_roots_psi(p);
    for (const auto& r : real) arr.push_back(kpp::to_json(r));
    if (p.h() > 0.0 && real.size() <= 1)
        for (const auto& r : kpp::complex_roots_in_strips(p, a.jmax)) arr.push_back(kpp::to_json(r));
    else if (p.h() > 0.0)
        run.log(Level::Warn, "psi has negative real zeros here; strip search skipped");
    run.emit(a.out, kpp::dump_json(arr));
    return 0;
}

struct BoundsArgs {
    double c = 2.0, tau = 1.0;
    std::string out = "bounds.json";
};

int do_bounds(Run& run, const BoundsArgs& a) {
    run.inputs = {{"c", a.c}, {"tau", a.tau}};
    std::string text = kpp::dump_json(kpp::to_json(kpp::apriori_bounds(kpp::make_params(a.c, a.tau))));
    std::cout << text;
    run.emit(a.out, text);
    return 0;
}

struct MapArgs {
    double c = 2.0, tau = 1.0, x0 = 1.0;
    int steps = 100;
    std::string out = "orbit.csv";
};

int do_map(Run& run, const MapArgs& a) {
    if (a.steps < 0) throw kpp::DomainError("steps must be >= 0");
    run.inputs = {{"c", a.c}, {"tau", a.tau}, {"x0", a.x0}, {"steps", a.steps}};
    kpp::Params p = kpp::make_params(a.c, a.tau);
    std::vector<double> orbit{a.x0};
    for (int k = 0; k < a.steps; ++k) orbit.push_back(kpp::map_step(orbit.back(), p));
    if (want_json(run)) {
        json arr = json::array();
        for (std::size_t k = 0; k < orbit.size(); ++k) arr.push_back({{"k", k}, {"x", orbit[k]}});
        run.emit(swap_extension(a.out, ".json"), kpp::dump_json(arr));
    } else {
        run.emit(a.out, kpp::orbit_to_csv(orbit));
    }
    return 0;
}

struct FrontArgs {
    double c = 2.0, tau = 0.0;
    std::string mode = "monotone";
    double tol = 1e-8;
    int max_iter = 5000;
    int seed = 0;
    std::string out = "profile.csv";
    std::string report = "report.json";
};

int do_front(Run& run, const FrontArgs& a) {
    run.inputs = {{"c", a.c}, {"tau", a.tau}, {"mode", a.mode}, {"seed", a.seed}};
    run.tolerances = {{"tol", a.tol}, {"max_iter", a.max_iter}};
    kpp::Params p = kpp::make_params(a.c, a.tau);
    kpp::FrontOptions opt;
    opt.tol = a.tol;
    opt.max_iter = a.max_iter;
    opt.seed = a.seed;
    try {
        kpp::FrontResult r = a.mode == "semi" ? kpp::semi_wavefront(p, opt) : kpp::monotone_front(p, opt);
        if (want_json(run)) run.emit(swap_extension(a.out, ".json"), kpp::dump_json(kpp::profile_to_json(r.profile)));
        else run.emit(a.out, kpp::profile_to_csv(r.profile));
        run.emit(a.report, kpp::dump_json(kpp::to_json(r.report)));
        for (const auto& w : r.report.warnings) run.log(Level::Warn, w);
        return 0;
    } catch (const kpp::NonConvergence& e) {
        run.emit(a.report, kpp::dump_json(kpp::to_json(e.report)));
        throw;
    }
}

struct ClassifyArgs {
    std::string in;
    double c = 2.0, tau = 0.0;
    std::string out = "classification.json";
};

int do_classify(Run& run, const ClassifyArgs& a) {
    run.inputs = {{"in", a.in}, {"c", a.c}, {"tau", a.tau}};
    std::string text = read_file(a.in);
    kpp::GridProfile phi = fs::path(a.in).extension() == ".json" ? kpp::profile_from_json(json::parse(text))
                                                                  : kpp::profile_from_csv(text);
    kpp::Params p = kpp::make_params(a.c, a.tau);
    kpp::ClassificationReport r = kpp::classify(phi, p);
    run.emit(a.out, kpp::dump_json(kpp::to_json(r)));
    return 0;
}

struct SimulateArgs {
    double tau = 0.3, xmax = 450.0, dx = 0.2, dt = 0.02, tend = 200.0;
    std::string ic = "bump";
    double ramp_speed = 3.0;
    double probe = -1.0;
    double snapshot = 0.5;
    std::string scheme = "imex";
    std::string out = "field.bin";
    std::string diag = "diag.json";
};

int do_simulate(Run& run, const SimulateArgs& a) {
    run.inputs = {{"tau", a.tau}, {"xmax", a.xmax}, {"dx", a.dx},   {"dt", a.dt}, {"tend", a.tend},
                  {"ic", a.ic},   {"ramp_speed", a.ramp_speed}, {"probe", a.probe}, {"snapshot", a.snapshot},
                  {"scheme", a.scheme}};
    kpp::SimConfig cfg;
    cfg.tau = a.tau;
    cfg.x_max = a.xmax;
    cfg.dx = a.dx;
    cfg.dt_step = a.dt;
    cfg.T_end = a.tend;
    cfg.initial = a.ic == "step" ? kpp::InitialKind::Step : a.ic == "ramp" ? kpp::InitialKind::Ramp : kpp::InitialKind::Bump;
    cfg.ramp_speed = a.ramp_speed;
    cfg.snapshot_every = a.snapshot;
    cfg.scheme = a.scheme == "explicit" ? kpp::TimeScheme::Explicit : kpp::TimeScheme::Imex;
    kpp::SimResult res = kpp::simulate(cfg);
    const kpp::SimField& f = res.field;

    json diag;
    diag["steps"] = res.diag.steps;
    diag["min_value"] = res.diag.min_value;
    diag["max_value"] = res.diag.max_value;
    try {
        diag["speed"] = kpp::to_json(kpp::measure_speed(f));
    } catch (const kpp::ComputeError& e) {
        diag["speed"] = {{"error", e.what()}};
    }
    double probe = a.probe >= 0.0 ? a.probe : 0.25 * a.xmax;
    diag["probe"] = probe;
    diag["amplitudes"] = kpp::to_json(kpp::wake_oscillation_amplitude(f, probe));
    json contain = json::object();
    if (a.tau > 0.0) {
        // Box for the profile equation at the minimal speed c = 2, h = 2 tau.
        kpp::MapBounds b = kpp::apriori_bounds(kpp::make_params(2.0, a.tau));
        // The box speaks about the profile behind its first crossing of 1; a
        // wake that never reaches 1 has nothing to contain.
        kpp::WakeRange w = kpp::wake_range(f, 1.0);
        contain = {{"L_e", b.L_e}, {"U_e", b.U_e}, {"wake_samples", w.samples}};
        if (w.samples > 0) {
            contain["wake_min"] = w.lo;
            contain["wake_max"] = w.hi;
        }
        contain["inside"] = w.samples == 0 || (w.lo > b.L_e && w.hi < b.U_e);
    }
    diag["containment"] = contain;
    run.emit(a.out, kpp::field_to_bin(f));
    run.emit(a.diag, kpp::dump_json(diag));
    return 0;
}

struct SweepArgs {
    std::string tau = "0:2:0.01";
    std::string c = "1.5:6:0.025";
    std::string evidence = "sampled";
    int budget = 5000;
    double tol = 1e-8;
    std::string out = "plane.csv";
};

int do_sweep(Run& run, const SweepArgs& a) {
    run.inputs = {{"tau", a.tau}, {"c", a.c}, {"evidence", a.evidence}, {"budget", a.budget}};
    run.tolerances = {{"tol", a.tol}};
    kpp::SweepOptions opt;
    opt.evidence = a.evidence == "full" ? kpp::EvidenceMode::Full
                   : a.evidence == "none" ? kpp::EvidenceMode::None
                                          : kpp::EvidenceMode::Sampled;
    opt.budget = a.budget;
    opt.tol = a.tol;
    opt.threads = run.g.threads;
    auto cells = kpp::sweep_plane(kpp::parse_range(a.tau), kpp::parse_range(a.c), opt);
    if (want_json(run)) {
        json arr = json::array();
        for (const auto& c : cells) arr.push_back(kpp::to_json(c));
        run.emit(swap_extension(a.out, ".json"), kpp::dump_json(arr));
    } else {
        run.emit(a.out, kpp::plane_to_csv(cells));
    }
    int flagged = 0;
    for (const auto& c : cells) flagged += c.evidence.contradiction;
    if (flagged > 0) run.log(Level::Warn, std::to_string(flagged) + " cells carry contradicting evidence");
    return 0;
}

struct AcceptArgs {
    int only = 0;
    std::string out = "acceptance.json";
};

int do_accept(Run& run, const AcceptArgs& a) {
    run.inputs = {{"only", a.only}};
    auto results = kpp::accept::run_all(a.only);
    kpp::accept::print_table(results, std::cout);
    json arr = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds},
                       {"budget_seconds", r.budget}, {"detail", r.detail}});
    }
    run.emit(a.out, kpp::dump_json(arr));
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    Run run(argc, argv);
    CLI::App app{"Delayed KPP-Fisher traveling fronts: curves, bounds, fronts, shapes, simulations"};
    app.require_subcommand(1);
    app.add_option("--out-dir", run.g.out_dir, "Directory for relative output paths");
    app.add_option("--log-level", run.g.log_level, "error|warn|info|debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    app.add_option("--threads", run.g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--format", run.g.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}));

    CurvesArgs curves;
    auto* sc = app.add_subcommand("curves", "Critical-speed curves c*(tau), c**(tau)");
    sc->add_option("--tau-min", curves.tau_min);
    sc->add_option("--tau-max", curves.tau_max);
    sc->add_option("--n", curves.n);
    sc->add_option("--out", curves.out);

    RootsArgs roots;
    auto* sr = app.add_subcommand("roots", "Real and complex zeros of psi");
    sr->add_option("--c", roots.c)->required();
    sr->add_option("--tau", roots.tau)->required();
    sr->add_option("--jmax", roots.jmax);
    sr->add_option("--out", roots.out);

    BoundsArgs bounds;
    auto* sb = app.add_subcommand("bounds", "A priori box (L, U, L_e, U_e, B_star)");
    sb->add_option("--c", bounds.c)->required();
    sb->add_option("--tau", bounds.tau)->required();
    sb->add_option("--out", bounds.out);

    MapArgs map;
    auto* sm = app.add_subcommand("map", "Orbit of x -> h f(w(x))");
    sm->add_option("--c", map.c)->required();
    sm->add_option("--tau", map.tau)->required();
    sm->add_option("--x0", map.x0)->required();
    sm->add_option("--steps", map.steps);
    sm->add_option("--out", map.out);

    FrontArgs front;
    auto* sf = app.add_subcommand("front", "Monotone front or semi-wavefront profile");
    sf->add_option("--c", front.c)->required();
    sf->add_option("--tau", front.tau)->required();
    sf->add_option("--mode", front.mode)->check(CLI::IsMember({"monotone", "semi"}));
    sf->add_option("--tol", front.tol)->check(CLI::PositiveNumber);
    sf->add_option("--max-iter", front.max_iter)->check(CLI::PositiveNumber);
    sf->add_option("--seed", front.seed)->check(CLI::NonNegativeNumber);
    sf->add_option("--out", front.out);
    sf->add_option("--report", front.report);

    ClassifyArgs classify;
    auto* sk = app.add_subcommand("classify", "Classify a stored profile");
    sk->add_option("--in", classify.in)->required();
    sk->add_option("--c", classify.c)->required();
    sk->add_option("--tau", classify.tau)->required();
    sk->add_option("--out", classify.out);

    SimulateArgs sim;
    auto* ss = app.add_subcommand("simulate", "Method-of-lines run of the delayed equation");
    ss->add_option("--tau", sim.tau)->required();
    ss->add_option("--xmax", sim.xmax)->check(CLI::PositiveNumber);
    ss->add_option("--dx", sim.dx)->check(CLI::PositiveNumber);
    ss->add_option("--dt", sim.dt)->check(CLI::PositiveNumber);
    ss->add_option("--tend", sim.tend)->check(CLI::PositiveNumber);
    ss->add_option("--ic", sim.ic)->check(CLI::IsMember({"bump", "step", "ramp"}));
    ss->add_option("--ramp-speed", sim.ramp_speed);
    ss->add_option("--probe", sim.probe);
    ss->add_option("--snapshot", sim.snapshot)->check(CLI::PositiveNumber);
    ss->add_option("--scheme", sim.scheme)->check(CLI::IsMember({"imex", "explicit"}));
    ss->add_option("--out", sim.out);
    ss->add_option("--diag", sim.diag);

    SweepArgs sweep;
    auto* sw = app.add_subcommand("sweep", "Region labels over a (tau, c) grid");
    sw->add_option("--tau", sweep.tau);
    sw->add_option("--c", sweep.c);
    sw->add_option("--evidence", sweep.evidence)->check(CLI::IsMember({"sampled", "full", "none"}));
    sw->add_option("--budget", sweep.budget)->check(CLI::PositiveNumber);
    sw->add_option("--tol", sweep.tol)->check(CLI::PositiveNumber);
    sw->add_option("--out", sweep.out);

    AcceptArgs acc;
    auto* sa = app.add_subcommand("accept", "Run the acceptance suite");
    sa->add_option("--only", acc.only, "Run a single criterion (1-12)");
    sa->add_option("--out", acc.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        if (code == 0) return 0;
        run.write_manifest(2, e.what());
        return 2;
    }

    int code = 0;
    std::string error;
    try {
        run.subcommand = app.get_subcommands().front()->get_name();
        const std::string& s = run.subcommand;
        if (s == "curves") code = do_curves(run, curves);
        else if (s == "roots") code = do_roots(run, roots);
        else if (s == "bounds") code = do_bounds(run, bounds);
        else if (s == "map") code = do_map(run, map);
        else if (s == "front") code = do_front(run, front);
        else if (s == "classify") code = do_classify(run, classify);
        else if (s == "simulate") code = do_simulate(run, sim);
        else if (s == "sweep") code = do_sweep(run, sweep);
        else if (s == "accept") code = do_accept(run, acc);
    } catch (const kpp::AdmissibilityError& e) {
        code = 1;
        error = e.what();
    } catch (const kpp::ComputeError& e) {
        code = 1;
        error = e.what();
    } catch (const kpp::DomainError& e) {
        code = 2;
        error = e.what();
    } catch (const json::exception& e) {
        code = 2;
        error = e.what();
    } catch (const std::exception& e) {
        code = 1;
        error = e.what();
    }
    if (!error.empty()) run.log(Level::Error, error);
    run.write_manifest(code, error);
    return code;
}
