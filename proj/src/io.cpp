#include "kppfront/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace kpp {

namespace {

void dump_rec(const nlohmann::json& j, int indent, int depth, std::string& out) {
    using T = nlohmann::json::value_t;
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case T::null: out += "null"; break;
        case T::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case T::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case T::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case T::number_float: {
            double v = j.get<double>();
            if (std::isnan(v)) out += "null";
            else if (std::isinf(v)) out += v > 0 ? "\"inf\"" : "\"-inf\"";
            else out += format_number(v);
            break;
        }
        case T::string: out += j.dump(); break;
        case T::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                dump_rec(e, indent, depth + 1, out);
            }
            newline(depth);
            out += ']';
            break;
        }
        case T::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                dump_rec(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            break;
        }
        default: out += j.dump(); break;
    }
}

nlohmann::json num(double v) { return nlohmann::json(v); }

template <typename T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw DomainError("field.bin is truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + s + "'");
    }
    while (used < s.size() && (s[used] == ' ' || s[used] == '\r')) ++used;
    if (used != s.size()) throw DomainError("not a number: '" + s + "'");
    return v;
}

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_rec(j, indent, 0, out);
    out += '\n';
    return out;
}

double json_number(const nlohmann::json& j) {
    if (j.is_string()) return parse_number(j.get<std::string>());
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw DomainError("expected a number in JSON");
    return j.get<double>();
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + target.string() + ": " + ec.message());
    }
}

std::string profile_to_csv(const GridProfile& p) {
    std::string out = "t,phi\n";
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        out += format_number(p.t(i));
        out += ',';
        out += format_number(p.values[i]);
        out += '\n';
    }
    return out;
}

GridProfile profile_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw DomainError("profile CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,phi") throw DomainError("profile CSV must start with the header t,phi");
    std::vector<double> ts, vs;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw DomainError("profile CSV row without a comma: " + line);
        ts.push_back(parse_number(line.substr(0, comma)));
        vs.push_back(parse_number(line.substr(comma + 1)));
    }
    if (ts.size() < 2) throw DomainError("profile CSV needs at least two rows");
    GridProfile p;
    p.t0 = ts.front();
    p.dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double expect = p.t0 + p.dt * static_cast<double>(i);
        if (std::abs(ts[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            throw DomainError("profile CSV is not on a uniform grid");
    }
    p.values = Eigen::Map<Eigen::VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    validate(p, std::numeric_limits<double>::infinity());
    return p;
}

nlohmann::json profile_to_json(const GridProfile& p) {
    nlohmann::json j;
    j["t0"] = num(p.t0);
    j["dt"] = num(p.dt);
    nlohmann::json vals = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) vals.push_back(num(p.values[i]));
    j["values"] = std::move(vals);
    j["left_tail"] = {{"coefficient", num(p.left.coefficient)},
                      {"rate", num(p.left.rate)},
                      {"poly_degree", p.left.poly_degree}};
    if (p.right.kind == RightTail::Kind::ConstantLimit)
        j["right_tail"] = {{"kind", "constant"}, {"limit", num(p.right.limit)}};
    else
        j["right_tail"] = {{"kind", "exponential_growth"}, {"rate", num(p.right.rate)}};
    if (p.params) j["params"] = {{"c", num(p.params->c)}, {"tau", num(p.params->tau)}};
    return j;
}

GridProfile profile_from_json(const nlohmann::json& j) {
    GridProfile p;
    try {
        p.t0 = json_number(j.at("t0"));
        p.dt = json_number(j.at("dt"));
        const auto& vals = j.at("values");
        p.values.resize(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) p.values[static_cast<Eigen::Index>(i)] = json_number(vals[i]);
        if (j.contains("left_tail")) {
            const auto& l = j["left_tail"];
            p.left.coefficient = json_number(l.at("coefficient"));
            p.left.rate = json_number(l.at("rate"));
            p.left.poly_degree = l.value("poly_degree", 0);
        }
        if (j.contains("right_tail")) {
            const auto& r = j["right_tail"];
            if (r.at("kind").get<std::string>() == "constant") {
                p.right.kind = RightTail::Kind::ConstantLimit;
                p.right.limit = json_number(r.at("limit"));
            } else {
                p.right.kind = RightTail::Kind::ExponentialGrowth;
                p.right.rate = json_number(r.at("rate"));
            }
        }
        if (j.contains("params")) p.params = make_params(json_number(j["params"].at("c")), json_number(j["params"].at("tau")));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed profile JSON: ") + e.what());
    }
    return p;
}

std::string field_to_bin(const SimField& f) {
    std::string out;
    out.reserve(64 + static_cast<std::size_t>(f.u.size()) * 8);
    out.append("KPPF", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(f.nx()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(f.nt()));
    put<double>(out, f.dx);
    put<double>(out, f.dt_row);
    put<double>(out, f.tau);
    put<double>(out, f.x0);
    put<double>(out, f.dt_step);
    out.append(reinterpret_cast<const char*>(f.u.data()), static_cast<std::size_t>(f.u.size()) * sizeof(double));
    return out;
}

SimField field_from_bin(const std::string& bytes) {
    if (bytes.size() < 64 || bytes.compare(0, 4, "KPPF") != 0) throw DomainError("not a KPPF field file");
    std::size_t pos = 4;
    auto version = get<std::uint32_t>(bytes, pos);
    if (version != 1) throw DomainError("unsupported KPPF version " + std::to_string(version));
    auto nx = get<std::uint64_t>(bytes, pos);
    auto nt = get<std::uint64_t>(bytes, pos);
    SimField f;
    f.dx = get<double>(bytes, pos);
    f.dt_row = get<double>(bytes, pos);
    f.tau = get<double>(bytes, pos);
    f.x0 = get<double>(bytes, pos);
    f.dt_step = get<double>(bytes, pos);
    if (bytes.size() != 64 + nx * nt * sizeof(double)) throw DomainError("field.bin size does not match its header");
    f.u.resize(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nx));
    std::memcpy(f.u.data(), bytes.data() + 64, nx * nt * sizeof(double));
    for (std::uint64_t k = 0; k < nt; ++k) f.times.push_back(f.dt_row * static_cast<double>(k));
    return f;
}

nlohmann::json to_json(const CharRoot& r) {
    return {{"re", num(r.re)},
            {"im", num(r.im)},
            {"strip_index", r.strip_index},
            {"multiplicity", r.multiplicity},
            {"residual", num(r.residual)}};
}

nlohmann::json to_json(const MapBounds& b) {
    return {{"L", num(b.L)}, {"U", num(b.U)}, {"L_e", num(b.L_e)}, {"U_e", num(b.U_e)}, {"B_star", num(b.B_star)}};
}

nlohmann::json to_json(const TailReport& t) {
    return {{"side", t.side == TailReport::Side::Left ? "left" : "right"},
            {"available", t.available},
            {"fitted_rate", num(t.fitted_rate)},
            {"fitted_coefficient", num(t.fitted_coefficient)},
            {"predicted_rate", num(t.predicted_rate)},
            {"predicted_coefficient", num(t.predicted_coefficient)},
            {"relative_rate_error", num(t.relative_rate_error)},
            {"relative_coefficient_error", num(t.relative_coefficient_error)},
            {"polynomial_factor_detected", t.polynomial_factor_detected},
            {"samples", t.samples},
            {"note", t.note}};
}

nlohmann::json to_json(const FrontReport& r) {
    nlohmann::json j;
    j["mode"] = r.mode;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["newton_steps"] = r.newton_steps;
    j["residual"] = num(r.residual);
    j["ode_residual"] = num(r.ode_residual);
    j["log_residual"] = num(r.log_residual);
    j["am_residual"] = num(r.am_residual);
    j["increment"] = num(r.increment);
    j["min_increment"] = num(r.min_increment);
    j["boundary_mismatch"] = num(r.boundary_mismatch);
    j["monotone_iterates"] = r.monotone_iterates;
    j["monotone_profile"] = r.monotone_profile;
    j["positive"] = r.positive;
    j["normalized_shift"] = num(r.normalized_shift);
    j["beta_used"] = num(r.beta_used);
    j["clamp_active"] = r.clamp_active;
    j["max_value"] = num(r.max_value);
    j["limit_left"] = num(r.limit_left);
    j["limit_right"] = num(r.limit_right);
    j["cone_ok"] = r.cone_ok ? nlohmann::json(*r.cone_ok) : nlohmann::json();
    j["bounds_box"] = r.bounds_box ? to_json(*r.bounds_box) : nlohmann::json();
    nlohmann::json tails = nlohmann::json::object();
    if (r.left_tail) tails["left"] = to_json(*r.left_tail);
    if (r.right_tail) tails["right"] = to_json(*r.right_tail);
    j["tail_reports"] = std::move(tails);
    nlohmann::json hist = nlohmann::json::array();
    for (double v : r.history) hist.push_back(num(v));
    j["history"] = std::move(hist);
    j["warnings"] = r.warnings;
    return j;
}

nlohmann::json to_json(const ClassificationReport& r) {
    nlohmann::json j;
    j["kind"] = to_string(r.kind);
    nlohmann::json cr = nlohmann::json::array();
    for (double q : r.crossings) cr.push_back(num(q));
    j["crossings"] = std::move(cr);
    nlohmann::json ex = nlohmann::json::array();
    for (const Extremum& e : r.extrema)
        ex.push_back({{"t", num(e.t)}, {"phi", num(e.phi)}, {"V", num(e.V)}, {"type", e.is_max ? "max" : "min"}});
    j["extrema"] = std::move(ex);
    j["sc_trace"] = r.sc_trace;
    j["violations"] = r.violations;
    j["inconclusive"] = r.inconclusive;
    j["note"] = r.note;
    return j;
}

nlohmann::json to_json(const SpeedEstimate& s) {
    nlohmann::json ts = nlohmann::json::array(), xs = nlohmann::json::array();
    for (double t : s.times) ts.push_back(num(t));
    for (double x : s.positions) xs.push_back(num(x));
    return {{"level", num(s.level)},
            {"fitted_speed", num(s.fitted_speed)},
            {"direction", s.direction},
            {"fit_window", {num(s.fit_from), num(s.fit_to)}},
            {"r_squared", num(s.r_squared)},
            {"times", std::move(ts)},
            {"positions", std::move(xs)}};
}

nlohmann::json to_json(const AmplitudeRecord& a) {
    nlohmann::json ts = nlohmann::json::array(), as = nlohmann::json::array();
    for (double t : a.times) ts.push_back(num(t));
    for (double v : a.amplitudes) as.push_back(num(v));
    return {{"times", std::move(ts)},
            {"amplitudes", std::move(as)},
            {"inconclusive", a.inconclusive},
            {"decaying", a.decaying},
            {"sustained", a.sustained}};
}

nlohmann::json to_json(const RegionCell& c) {
    const CellEvidence& e = c.evidence;
    return {{"tau", num(c.tau)},
            {"c", num(c.c)},
            {"region", to_string(c.region)},
            {"c_star", num(c.c_star)},
            {"c_starstar", num(c.c_starstar)},
            {"evidence",
             {{"attempted", e.attempted},
              {"solver_outcome", e.solver_outcome},
              {"classification_kind", e.classification_kind},
              {"residual", num(e.residual)},
              {"wavefront", e.wavefront},
              {"contradiction", e.contradiction},
              {"note", e.note}}}};
}

std::string curves_to_csv(const std::vector<double>& taus) {
    std::string out = "tau,c_star,c_starstar\n";
    for (double t : taus) {
        out += format_number(t) + ',' + format_number(c_star(t).as_double()) + ',' +
               format_number(c_starstar(t).as_double()) + '\n';
    }
    return out;
}

std::string orbit_to_csv(const std::vector<double>& orbit) {
    std::string out = "k,x\n";
    for (std::size_t k = 0; k < orbit.size(); ++k) out += std::to_string(k) + ',' + format_number(orbit[k]) + '\n';
    return out;
}

std::string plane_to_csv(const std::vector<RegionCell>& cells) {
    std::string out = "tau,c,region,c_star,c_starstar,residual,kind\n";
    for (const RegionCell& c : cells) {
        out += format_number(c.tau) + ',' + format_number(c.c) + ',' + to_string(c.region) + ',' +
               format_number(c.c_star) + ',' + format_number(c.c_starstar) + ',' + format_number(c.evidence.residual) +
               ',' + c.evidence.classification_kind + '\n';
    }
    return out;
}

}  // namespace kpp
