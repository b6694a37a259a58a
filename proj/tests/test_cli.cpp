#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "cspread/config.hpp"

using namespace cspread;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& stem, const std::string& body) {
    fs::path path = fs::temp_directory_path() / stem;
    std::ofstream out(path);
    out << body;
    return path;
}

std::string merton_ini(int level, int time_steps) {
    std::ostringstream os;
    os << "[model]\n"
          "type = merton\n"
          "r = 0.02\n"
          "sigma1 = 0.7025\n"
          "sigma2 = 0.5356\n"
          "rho_B = 0.5364\n"
          "lambda0 = 3.0\n"
          "lambda1 = 2.0\n"
          "lambda2 = 2.0\n"
          "sigJ1 = 0.2808\n"
          "sigJ2 = 0.3528\n"
          "mu01 = -0.0775\n"
          "mu02 = -0.0620\n"
          "sig01 = 0.02\n"
          "sig02 = 0.01\n"
          "rho_J = 0.30\n"
          "s01 = 100.0\n"
          "s02 = 2.0\n"
          "[contract]\n"
          "K = 1.0\n"
          "c = 0.0238095238095238\n"
          "T = 0.5\n"
          "[scheme]\n";
    os << "level = " << level << "\n";
    os << "time_steps = " << time_steps << "\n";
    return os.str();
}

std::string gamma_ini(double mu1, double mu2, int level, int time_steps) {
    std::ostringstream os;
    os << std::setprecision(16);
    os << "[model]\n"
          "type = gamma-tc\n"
          "r = 0.02\n"
          "alpha0 = 0.5\n"
          "beta0 = 0.5\n"
          "alpha1 = 0.7\n"
          "beta1 = 0.7\n"
          "alpha2 = 0.8\n"
          "beta2 = 0.8\n";
    os << "mu1 = " << mu1 << "\n";
    os << "mu2 = " << mu2 << "\n";
    os << "sigr1 = 0.4633\n"
          "sigr2 = 0.2236\n"
          "s01 = 100.0\n"
          "s02 = 2.0\n"
          "[contract]\n"
          "T = 0.5\n"
          "[scheme]\n";
    os << "level = " << level << "\n";
    os << "time_steps = " << time_steps << "\n";
    return os.str();
}

// -1: harness unavailable, otherwise the child's exit status
int run_cli(const std::string& args) {
    const char* exe = std::getenv("CSPREAD_CLI");
    if (!exe) return -1;
    std::string cmd = std::string("\"") + exe + "\" " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    Config cfg = Config::parse(
        "; leading comment\n"
        "[model]\n"
        "type = merton  # trailing comment\n"
        "r = 0.01\n"
        "r = 0.02\n"
        "\n"
        "[scheme]\n"
        "level = 5\n");
    CHECK(cfg.has("model", "type"));
    CHECK(cfg.get_string("model", "type") == "merton");
    CHECK(cfg.get_double("model", "r") == 0.02); // later assignment wins
    CHECK(cfg.get_int("scheme", "level", 3) == 5);
    CHECK(cfg.get_int("scheme", "missing", 3) == 3);
    CHECK(cfg.get_double("scheme", "missing", 1.5) == 1.5);
    CHECK(cfg.get_string("scheme", "missing", "dflt") == "dflt");
    CHECK_FALSE(cfg.has("scheme", "missing"));
    CHECK_THROWS(cfg.get_double("scheme", "missing"));
    CHECK_THROWS(cfg.get_double("model", "type")); // not a number

    auto lines = cfg.echo_lines();
    REQUIRE(!lines.empty());
    bool found = false;
    for (const auto& l : lines) {
        CHECK(l.rfind("# ", 0) == 0);
        if (l == "# scheme.level = 5") found = true;
    }
    CHECK(found);

    CHECK_THROWS(Config::parse("key = 1\n"));             // entry before any section
    CHECK_THROWS(Config::parse("[model\nr = 1\n"));       // unterminated header
    CHECK_THROWS(Config::parse("[model]\njust words\n")); // missing =
    CHECK_THROWS(Config::parse("[]\n"));
    CHECK_THROWS(Config::parse("[model]\n= 3\n"));
}

TEST_CASE("typed views over a config") {
    auto path = write_temp("cspread_cli_full.ini", merton_ini(4, 16));
    Config cfg = Config::load(path.string());

    JumpDiffusionParams p = jd_params_from_config(cfg);
    CHECK(p.sigma1 == 0.7025);
    CHECK(p.muJ1 == 0.0); // optional, defaulted
    CHECK(p.rho_J == 0.30);
    CHECK(p.s0[0] == 100.0);

    Contract c = contract_from_config(cfg, p.s0);
    CHECK(c.K == 1.0);
    CHECK(c.T == 0.5);

    SchemeConfig sc = scheme_from_config(cfg);
    CHECK(sc.level == 4);
    CHECK(sc.time_steps == 16);
    CHECK(sc.theta == 0.5); // untouched default
    fs::remove(path);

    auto gpath = write_temp("cspread_cli_gamma.ini", gamma_ini(-0.0673, -0.050701, 3, 8));
    Config gcfg = Config::load(gpath.string());
    TimeChangeParams t = tc_params_from_config(gcfg);
    CHECK(t.alpha0 == 0.5);
    CHECK(t.d1 == 1.0); // optional, defaulted
    CHECK(t.mu2 == -0.050701);
    fs::remove(gpath);

    CHECK_THROWS(Config::load("/nonexistent/cspread.ini"));
}

TEST_CASE("selftest subcommand") {
    auto merton = write_temp("cspread_cli_st_m.ini", merton_ini(3, 8));
    auto rn = write_temp("cspread_cli_st_rn.ini",
                         gamma_ini(-0.0974086986767, -0.0150793383635, 3, 8));
    auto literal = write_temp("cspread_cli_st_lit.ini", gamma_ini(-0.0673, -0.050701, 3, 8));

    int rc = run_cli("selftest --config " + merton.string());
    if (rc < 0) {
        MESSAGE("CSPREAD_CLI not set; skipping subprocess checks");
        return;
    }
    CHECK(rc == 0);
    CHECK(run_cli("selftest --config " + rn.string()) == 0);
    // the as-printed example parameters violate the discounted-drift identity
    CHECK(run_cli("selftest --config " + literal.string()) == 1);

    CHECK(run_cli("selftest --config /nonexistent.ini") == 2);
    CHECK(run_cli("selftest --config " + merton.string() + " --model heston") != 0);
    fs::remove(merton);
    fs::remove(rn);
    fs::remove(literal);
}

TEST_CASE("price subcommand writes the strike/maturity table") {
    auto ini = write_temp("cspread_cli_price.ini", merton_ini(3, 8));
    fs::path out = fs::temp_directory_path() / "cspread_cli_price_out.csv";
    fs::remove(out);

    int rc = run_cli("price --config " + ini.string() + " --out " + out.string());
    if (rc < 0) {
        MESSAGE("CSPREAD_CLI not set; skipping subprocess checks");
        return;
    }
    CHECK(rc == 0);
    auto lines = read_lines(out);
    REQUIRE(!lines.empty());
    CHECK(lines[0].rfind("# cspread price", 0) == 0);
    int comments = 0, data = 0;
    bool header = false;
    for (const auto& l : lines) {
        if (l.rfind("#", 0) == 0)
            ++comments;
        else if (l.rfind("strike,", 0) == 0)
            header = true;
        else if (!l.empty())
            ++data;
    }
    CHECK(header);
    CHECK(data == 25); // 5 strikes x 5 maturities
    CHECK(comments >= 5);

    // identical config and seedless command: byte-stable output
    fs::path out2 = fs::temp_directory_path() / "cspread_cli_price_out2.csv";
    CHECK(run_cli("price --config " + ini.string() + " --out " + out2.string()) == 0);
    CHECK(read_lines(out2) == lines);
    fs::remove(ini);
    fs::remove(out);
    fs::remove(out2);
}

TEST_CASE("converge subcommand") {
    auto ini = write_temp("cspread_cli_conv.ini", merton_ini(3, 8));
    fs::path out = fs::temp_directory_path() / "cspread_cli_conv_out.csv";
    fs::remove(out);

    int rc = run_cli("converge --config " + ini.string() + " --levels 2,3 --ref 4 --out " +
                     out.string());
    if (rc < 0) {
        MESSAGE("CSPREAD_CLI not set; skipping subprocess checks");
        return;
    }
    CHECK(rc == 0);
    auto lines = read_lines(out);
    int data = 0;
    bool rate = false;
    for (const auto& l : lines) {
        if (l.rfind("# fitted_rate", 0) == 0) rate = true;
        if (!l.empty() && l[0] != '#' && l.rfind("level,", 0) != 0) ++data;
    }
    CHECK(data == 2);
    CHECK(rate);
    fs::remove(ini);
    fs::remove(out);
}

TEST_CASE("simulate subcommand") {
    auto ini = write_temp("cspread_cli_sim.ini", merton_ini(3, 8));
    fs::path out = fs::temp_directory_path() / "cspread_cli_sim_out.csv";
    fs::remove(out);

    int rc = run_cli("simulate --config " + ini.string() + " --paths 2000 --steps 4 --seed 9 --out " +
                     out.string());
    if (rc < 0) {
        MESSAGE("CSPREAD_CLI not set; skipping subprocess checks");
        return;
    }
    CHECK(rc == 0);
    auto lines = read_lines(out);
    bool header = false;
    int data = 0;
    for (const auto& l : lines) {
        if (l.rfind("path,step,", 0) == 0) header = true;
        if (!l.empty() && l[0] != '#' && l.rfind("path,", 0) != 0) ++data;
    }
    CHECK(header);
    CHECK(data == 8 * 5); // eight trajectories, steps 0..4
    fs::remove(ini);
    fs::remove(out);
}

TEST_CASE("calibrate subcommand") {
    const char* data = std::getenv("CSPREAD_DATA");
    if (!data || run_cli("--help") < 0) {
        MESSAGE("CSPREAD_CLI or CSPREAD_DATA not set; skipping subprocess checks");
        return;
    }
    fs::path out = fs::temp_directory_path() / "cspread_cli_cal_out.csv";
    fs::remove(out);
    int rc = run_cli(std::string("calibrate --model merton --data ") + data + " --out " +
                     out.string());
    CHECK(rc == 0);
    auto lines = read_lines(out);
    bool header = false;
    for (const auto& l : lines)
        if (l.rfind("parameter,", 0) == 0) header = true;
    CHECK(header);
    fs::remove(out);
}

} // TEST_SUITE
