#include "doctest.h"
#include "kppfront/frontsolver.hpp"
#include "kppfront/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace kpp;
namespace fs = std::filesystem;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

GridProfile random_profile(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(0.0, 3.0);
    GridProfile p;
    p.t0 = -12.34567890123;
    p.dt = 1.0 / 64;
    p.values.resize(300);
    for (auto& x : p.values) x = v(rng) * std::exp(-v(rng) * 100.0);
    p.values[299] = 1.0;
    p.left = LeftTail{0.123456789, 0.5, 1};
    p.right = RightTail{RightTail::Kind::ConstantLimit, 1.0, 0.0};
    p.params = make_params(2.5, 0.3);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(std::isinf(parse_number("inf")));
    CHECK_THROWS_AS(parse_number("1.5x"), DomainError);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> e(-300.0, 300.0);
    for (int k = 0; k < 1000; ++k) {
        double x = std::pow(10.0, e(rng)) * (k % 2 ? -1 : 1);
        CHECK(same_bits(parse_number(format_number(x)), x));
    }
}

TEST_CASE("JSON writes infinity as a string and keeps 17 digits") {
    nlohmann::json j = {{"a", std::numeric_limits<double>::infinity()}, {"b", 0.1}, {"n", 3}};
    std::string s = dump_json(j);
    CHECK(s.find("\"inf\"") != std::string::npos);
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    auto back = nlohmann::json::parse(s);
    CHECK(std::isinf(json_number(back["a"])));
    CHECK(json_number(back["b"]) == 0.1);
}

TEST_CASE("profile CSV round trip is bit-identical") {
    GridProfile p = random_profile(1);
    p.t0 = -5.0;
    p.dt = 0.125;
    GridProfile q = profile_from_csv(profile_to_csv(p));
    REQUIRE(q.size() == p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(same_bits(q.values[i], p.values[i]));
    CHECK(q.t0 == p.t0);
    CHECK(q.dt == p.dt);
    CHECK(profile_to_csv(q) == profile_to_csv(p));
    CHECK(profile_to_csv(p).rfind("t,phi\n", 0) == 0);
}

TEST_CASE("profile CSV parsing errors") {
    CHECK_THROWS_AS(profile_from_csv(""), DomainError);
    CHECK_THROWS_AS(profile_from_csv("x,y\n0,1\n1,1\n"), DomainError);
    CHECK_THROWS_AS(profile_from_csv("t,phi\n0,1\n1,1\n3,1\n"), DomainError);
    CHECK_THROWS_AS(profile_from_csv("t,phi\n0,1\n1,-1\n"), DomainError);
    CHECK_THROWS_AS(profile_from_csv("t,phi\n0;1\n"), DomainError);
}

TEST_CASE("profile JSON round trip is bit-identical") {
    GridProfile p = random_profile(2);
    GridProfile q = profile_from_json(nlohmann::json::parse(dump_json(profile_to_json(p))));
    REQUIRE(q.size() == p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(same_bits(q.values[i], p.values[i]));
    CHECK(same_bits(q.t0, p.t0));
    CHECK(same_bits(q.dt, p.dt));
    CHECK(q.left.poly_degree == 1);
    CHECK(same_bits(q.left.coefficient, p.left.coefficient));
    REQUIRE(q.params);
    CHECK(q.params->c == 2.5);
    CHECK(q.params->tau == 0.3);
}

TEST_CASE("field binary round trip") {
    SimField f;
    f.x0 = 0.0;
    f.dx = 0.2;
    f.dt_row = 0.5;
    f.dt_step = 0.02;
    f.tau = 0.3;
    f.u.resize(4, 7);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> v(0.0, 1.5);
    for (Eigen::Index k = 0; k < f.u.size(); ++k) f.u.data()[k] = v(rng);
    for (int k = 0; k < 4; ++k) f.times.push_back(0.5 * k);
    std::string bytes = field_to_bin(f);
    CHECK(bytes.size() == 64 + 4 * 7 * 8);
    CHECK(bytes.compare(0, 4, "KPPF") == 0);
    SimField g = field_from_bin(bytes);
    CHECK(g.nx() == 7);
    CHECK(g.nt() == 4);
    CHECK(g.dx == f.dx);
    CHECK(g.tau == f.tau);
    CHECK(g.dt_row == f.dt_row);
    CHECK((g.u.array() == f.u.array()).all());
    CHECK(field_to_bin(g) == bytes);
    // Row-major layout: the second stored double is u(0, 1).
    double second;
    std::memcpy(&second, bytes.data() + 64 + 8, 8);
    CHECK(second == f.u(0, 1));
    CHECK_THROWS_AS(field_from_bin(bytes.substr(0, 100)), DomainError);
    CHECK_THROWS_AS(field_from_bin(std::string(64, 'x')), DomainError);
}

TEST_CASE("atomic writes leave no temporary files") {
    fs::path dir = fs::temp_directory_path() / "kppfront_io_test";
    fs::remove_all(dir);
    write_atomic((dir / "sub" / "a.txt").string(), "first");
    write_atomic((dir / "sub" / "a.txt").string(), "second");
    CHECK(slurp(dir / "sub" / "a.txt") == "second");
    int files = 0;
    for (auto& e : fs::directory_iterator(dir / "sub")) files += e.is_regular_file();
    CHECK(files == 1);
    fs::remove_all(dir);
}

TEST_CASE("tabular writers") {
    std::string curves = curves_to_csv({0.1, kTau1, 1.0});
    std::istringstream is(curves);
    std::string line;
    std::getline(is, line);
    CHECK(line == "tau,c_star,c_starstar");
    std::getline(is, line);
    CHECK(line == "0.10000000000000001,inf,inf");
    CHECK(orbit_to_csv({1.0, 0.5}) == "k,x\n0,1\n1,0.5\n");
    RegionCell c;
    c.tau = 0.2;
    c.c = 3.0;
    c.region = Region::MonotoneDm;
    c.c_star = std::numeric_limits<double>::infinity();
    c.c_starstar = std::numeric_limits<double>::infinity();
    c.evidence.residual = 1e-9;
    c.evidence.classification_kind = "Monotone";
    CHECK(plane_to_csv({c}) ==
          "tau,c,region,c_star,c_starstar,residual,kind\n0.20000000000000001,3,MonotoneDm,inf,inf,1.0000000000000001e-09,Monotone\n");
}

TEST_CASE("report JSON carries the documented fields") {
    FrontResult r = monotone_front(make_params(3.0, 0.1));
    nlohmann::json j = to_json(r.report);
    for (const char* k : {"residual", "iterations", "mode", "bounds_box", "tail_reports", "normalized_shift", "beta_used",
                          "clamp_active"})
        CHECK(j.contains(k));
    CHECK(j["clamp_active"].is_boolean());
    CHECK(j["tail_reports"].contains("left"));
}
