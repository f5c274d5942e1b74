#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "capax/choquet.hpp"
#include "capax/grid.hpp"
#include "capax/io.hpp"
#include "capax/maximal.hpp"
#include "capax/potentials.hpp"
#include "capax/capacity.hpp"

using namespace capax;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false) {
    const char* bin = std::getenv("CAPAX_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "capax_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("version and check listing") {
    const CliResult v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("capax") != std::string::npos);

    const CliResult l = run_cli("verify --list");
    CHECK(l.code == 0);
    std::istringstream ss(l.out);
    std::string line;
    int count = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++count;
    CHECK(count == 11);
    CHECK(l.out.find("weight_algebra") != std::string::npos);
}

TEST_CASE("bad invocations use the documented exit codes") {
    CHECK(run_cli("maximal --no-such-flag x").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("maximal --in /does/not/exist --out /tmp/x.txt").code == 4);
    CHECK(run_cli("capacity --set box:0,0.5 --p 1.0").code == 2);
    CHECK(run_cli("grid --box 2,-2").code == 2);
    CHECK(run_cli("verify --check no_such_check").code == 2);
    CHECK(run_cli("capacity --set cells:/does/not/exist").code == 4);
}

TEST_CASE("grid subcommand writes a loadable constant field") {
    const fs::path out = work_dir() / "grid_field.txt";
    const CliResult r = run_cli("grid --dim 1 --h 0.0625 --box -1,1 --value 2.5 --out " +
                                out.string());
    CHECK(r.code == 0);
    const Field f = read_field(out.string());
    CHECK(f.grid.dim == 1);
    CHECK(f.grid.h == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(f.values.size() == 32);
    for (double v : f.values) CHECK(v == 2.5);
}

TEST_CASE("weight subcommand reports constants as json") {
    const fs::path out = work_dir() / "weight.json";
    const CliResult r = run_cli(
        "weight --spec exp:c=1 --p 2 --ainf --rho 0.5 --dim 1 --h 0.03125 "
        "--box -1,1 --out " + out.string());
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["weight"] == "exp:c=1");
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["p"] == 2.0);
    CHECK(j["rows"][1]["p"] == "inf");
    for (const auto& row : j["rows"]) {
        CHECK(row["constant"].get<double>() >= 1.0);
        CHECK(row.contains("cube"));
    }

    // csv carries one line per requested exponent
    const CliResult c = run_cli(
        "weight --spec power:a=0.5 --p 1.5,2 --rho 0.5 --dim 1 --h 0.03125 "
        "--box -1,1 --format csv");
    CHECK(c.code == 0);
    CHECK(c.out.find("p,rho,constant") != std::string::npos);
    std::istringstream ss(c.out);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 3);
}

TEST_CASE("maximal subcommand matches the library operator") {
    const fs::path dir = work_dir();
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    Field f(g);
    for (std::size_t i = 0; i < g.cell_count(); ++i)
        f.values[i] = 0.2 + std::abs(g.center(i)[0]);
    const fs::path in = dir / "max_in.txt";
    const fs::path out = dir / "max_out.txt";
    write_field(in.string(), f);
    const CliResult r =
        run_cli("maximal --in " + in.string() + " --out " + out.string() +
                " --variant uncentered --rho 0.5 --policy aligned");
    CHECK(r.code == 0);
    const Field got = read_field(out.string());
    const Field want = uncentered_local_maximal(
        f, 0.5, enumerate_cubes(g, 0.5, CubePolicy::aligned));
    REQUIRE(got.values.size() == want.values.size());
    for (std::size_t i = 0; i < want.values.size(); ++i)
        CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-14));

    DiscreteMeasure mu(g);
    mu.masses[8] = 1.0;
    const fs::path muf = dir / "max_mu.txt";
    const fs::path fout = dir / "max_frac.txt";
    write_measure(muf.string(), mu);
    const CliResult rf =
        run_cli("maximal --in " + muf.string() + " --out " + fout.string() +
                " --variant fractional --alpha 0.5 --rho 0.5");
    CHECK(rf.code == 0);
    const Field gotf = read_field(fout.string());
    const Field wantf = fractional_local_maximal(mu, 0.5, 0.5);
    for (std::size_t i = 0; i < wantf.values.size(); ++i)
        CHECK(gotf.values[i] == doctest::Approx(wantf.values[i]).epsilon(1e-14));
}

TEST_CASE("potential subcommand matches the library operator") {
    const fs::path dir = work_dir();
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    DiscreteMeasure mu(g);
    mu.masses[10] = 0.7;
    mu.masses[21] = 1.3;
    const fs::path muf = dir / "pot_mu.txt";
    const fs::path out = dir / "pot_out.txt";
    write_measure(muf.string(), mu);
    const CliResult r = run_cli("potential --mu " + muf.string() + " --out " +
                                out.string() +
                                " --kind wolff --alpha 0.5 --p 2 --rho 0.25 "
                                "--weight exp:c=-1");
    CHECK(r.code == 0);
    const Field got = read_field(out.string());
    const Field want =
        wolff_cal(mu, weight_exp(g, -1.0), 0.5, 2.0, 0.25,
                  LogTimeGrid::standard(g.h, 0.25));
    for (std::size_t i = 0; i < want.values.size(); ++i)
        CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-14));
}

TEST_CASE("capacity subcommand emits certified bounds") {
    const CliResult r = run_cli(
        "capacity --set box:-0.25,0.25 --weight const --alpha 0.5 --p 2 "
        "--rho 0.5 --dim 1 --h 0.0625 --box -1,1");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const double up = j["value_upper"].get<double>();
    const double lo = j["value_lower"].get<double>();
    CHECK(lo > 0.0);
    CHECK(up >= lo);
    CHECK(j["gap"].get<double>() <= 1e-3);
    CHECK(j["converged"].get<bool>());
    CHECK(j["config"]["kernel"] == "riesz");

    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    const TargetSet E = TargetSet::from_box(g, {-0.25, 0.0}, {0.25, 0.0});
    const CapacitySolution sol =
        capacity_primal(E, Field(g, 1.0), LocalRieszKernel{0.5, 0.5}, 2.0);
    CHECK(up == doctest::Approx(sol.value).epsilon(1e-9));
}

TEST_CASE("capacity accepts the shipped cell-list and weight fixtures") {
    const fs::path out = work_dir() / "fixture_cap.json";
    const CliResult r = run_cli(
        "capacity --set cells:data/cells_small.txt --weight file:data/weight_1d.txt "
        "--alpha 0.5 --p 2 --rho 0.5 --dim 1 --h 0.0625 --box -1,1 --out " +
        out.string());
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["value_lower"].get<double>() > 0.0);
    CHECK(j["gap"].get<double>() <= 1e-3);
}

TEST_CASE("choquet subcommand agrees with the library integral") {
    const fs::path dir = work_dir();
    const Grid g = make_grid(1, 1.0 / 16, {-1.0, 0.0}, {1.0, 0.0});
    Field f(g, 0.0);
    for (std::size_t i = 10; i < 20; ++i)
        f.values[i] = i < 15 ? 2.0 : 1.0;
    const fs::path in = dir / "cho_in.txt";
    const fs::path out = dir / "cho_out.json";
    write_field(in.string(), f);
    const CliResult r = run_cli("choquet --in " + in.string() +
                                " --q 1 --weak --rho 0.5 --format json --out " +
                                out.string());
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    const double value = j["value"].get<double>();
    const double weak = j["weak_quasinorm"].get<double>();
    CHECK(j["levels"].size() == 2);
    CHECK(j["solves"].get<std::uint64_t>() >= 2);
    CHECK(weak <= value * (1.0 + 1e-12));

    CapacityOracle C = riesz_capacity_oracle(g, Field(g, 1.0), 0.5, 2.0, 0.5);
    CHECK(value == doctest::Approx(choquet_integral(f, 1.0, C)).epsilon(1e-10));
}

TEST_CASE("verify subcommand writes identical reports for one seed") {
    const fs::path dir = work_dir();
    const fs::path r1 = dir / "rep1.json";
    const fs::path r2 = dir / "rep2.json";
    const std::string common =
        "verify --check weight_algebra --seed 7 --h 0.03125 --box 1 "
        "--rho 0.25 --instances 2 --out ";
    const CliResult a = run_cli(common + r1.string());
    const CliResult b = run_cli(common + r2.string());
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(slurp(r1) == slurp(r2));

    const auto j = nlohmann::json::parse(slurp(r1));
    CHECK(j["config"]["seed"] == 7);
    REQUIRE(j["checks"].size() == 1);
    CHECK(j["checks"][0]["check_id"] == "weight_algebra");
    CHECK(j["checks"][0]["pass"].get<bool>());
}
