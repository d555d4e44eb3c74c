#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;
    explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("kppfront_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    int run(const std::string& args) const {
        std::string cmd = std::string(KPPFRONT_BIN) + " --out-dir " + dir.string() + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const {
        std::ifstream is(dir / name, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    json manifest() const { return json::parse(read("run-manifest.json")); }
};

int count_lines(const std::string& s) {
    int n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

}  // namespace

TEST_CASE("curves writes one row per delay and a manifest") {
    Sandbox sb("curves");
    CHECK(sb.run("curves --tau-min 0 --tau-max 2 --n 200") == 0);
    std::string csv = sb.read("curves.csv");
    CHECK(csv.rfind("tau,c_star,c_starstar\n", 0) == 0);
    CHECK(count_lines(csv) == 201);
    json m = sb.manifest();
    CHECK(m["exit_code"] == 0);
    CHECK(m["subcommand"] == "curves");
    CHECK(m.contains("wall_time_seconds"));
    CHECK(m["version"] == "1.0.0");

    CHECK(sb.run("--format json curves --n 5") == 0);
    json arr = json::parse(sb.read("curves.json"));
    CHECK(arr.size() == 5);
    CHECK(arr[0]["c_star"] == "inf");
}

TEST_CASE("front below the minimal speed is a computational failure") {
    Sandbox sb("front_sub");
    CHECK(sb.run("front --c 1.5 --tau 0.1") == 1);
    json m = sb.manifest();
    CHECK(m["exit_code"] == 1);
    CHECK(m["error"].get<std::string>().find("c < 2") != std::string::npos);
    CHECK_FALSE(fs::exists(sb.dir / "profile.csv"));
}

TEST_CASE("usage errors exit with 2") {
    Sandbox sb("usage");
    CHECK(sb.run("curves --bogus 1") == 2);
    CHECK(sb.manifest()["exit_code"] == 2);
    CHECK(sb.run("nosuchcommand") == 2);
    CHECK(sb.run("front --c 3") == 2);
    CHECK(sb.run("bounds --c 2 --tau -1") == 2);
    CHECK(sb.run("front --c 3 --tau 0.1 --mode sideways") == 2);
    CHECK(sb.run("--help") == 0);
}

TEST_CASE("roots, bounds and map outputs") {
    Sandbox sb("small");
    CHECK(sb.run("roots --c 3 --tau 1 --jmax 2") == 0);
    json roots = json::parse(sb.read("roots.json"));
    REQUIRE(roots.size() == 4);
    for (const auto& r : roots)
        for (const char* k : {"re", "im", "strip_index", "multiplicity", "residual"}) CHECK(r.contains(k));

    CHECK(sb.run("bounds --c 2 --tau 0.5") == 0);
    json b = json::parse(sb.read("bounds.json"));
    CHECK(b["L"].get<double>() == doctest::Approx(-2.0));
    CHECK(b["U_e"].get<double>() == doctest::Approx(std::exp(2.0)));
    CHECK(json::parse(sb.read("stdout.txt")) == b);

    CHECK(sb.run("map --c 2 --tau 0.5 --x0 1 --steps 10") == 0);
    std::string orbit = sb.read("orbit.csv");
    CHECK(orbit.rfind("k,x\n0,1\n", 0) == 0);
    CHECK(count_lines(orbit) == 12);
}

TEST_CASE("front and classify round trip with identical reruns") {
    Sandbox sb("front");
    REQUIRE(sb.run("front --c 3 --tau 0.1") == 0);
    std::string profile = sb.read("profile.csv"), report = sb.read("report.json");
    json rep = json::parse(report);
    CHECK(rep["converged"] == true);
    CHECK(rep["clamp_active"] == false);
    CHECK(rep["mode"] == "monotone");
    REQUIRE(sb.run("front --c 3 --tau 0.1") == 0);
    CHECK(sb.read("profile.csv") == profile);
    CHECK(sb.read("report.json") == report);

    REQUIRE(sb.run("classify --in " + (sb.dir / "profile.csv").string() + " --c 3 --tau 0.1") == 0);
    json cls = json::parse(sb.read("classification.json"));
    CHECK(cls["kind"] == "Monotone");
    CHECK(cls["violations"].empty());
    CHECK(sb.run("classify --in " + (sb.dir / "missing.csv").string() + " --c 3 --tau 0.1") == 2);
}

TEST_CASE("semi mode at a non-monotone wavefront") {
    Sandbox sb("semi");
    REQUIRE(sb.run("front --c 2.5 --tau 0.8 --mode semi --out semi.csv --report semi.json") == 0);
    json rep = json::parse(sb.read("semi.json"));
    CHECK(rep["mode"] == "semi");
    CHECK(rep["bounds_box"].contains("U_e"));
}

TEST_CASE("simulate writes the field and diagnostics") {
    Sandbox sb("sim");
    REQUIRE(sb.run("simulate --tau 0.3 --xmax 120 --tend 20 --ic step") == 0);
    std::string bin = sb.read("field.bin");
    REQUIRE(bin.size() > 64);
    CHECK(bin.compare(0, 4, "KPPF") == 0);
    json d = json::parse(sb.read("diag.json"));
    CHECK(d["speed"].contains("fitted_speed"));
    CHECK(d["containment"]["inside"] == true);
    CHECK(sb.run("simulate --tau 0.3 --xmax 60 --tend 200 --ic step") == 1);
}

TEST_CASE("sweep without evidence") {
    Sandbox sb("sweep");
    REQUIRE(sb.run("sweep --tau 0:1:0.5 --c 1.5:3:0.5 --evidence none") == 0);
    std::string csv = sb.read("plane.csv");
    CHECK(csv.rfind("tau,c,region,c_star,c_starstar,residual,kind\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 3 * 4);
    CHECK(sb.run("sweep --tau 1:0:0.5 --evidence none") == 2);
}

TEST_CASE("accept runs a selected criterion") {
    Sandbox sb("accept");
    CHECK(sb.run("accept --only 3") == 0);
    std::string out = sb.read("stdout.txt");
    CHECK(out.find("criterion  3 PASS") != std::string::npos);
    json a = json::parse(sb.read("acceptance.json"));
    REQUIRE(a.size() == 1);
    CHECK(a[0]["pass"] == true);
}
