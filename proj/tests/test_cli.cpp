#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using Catch::Approx;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs the installed binary with shell-safe arguments, capturing both
/// streams. Relative temp files land in the ctest working directory.
CliRun run_cli(const std::string& args) {
    const std::string out_path = "cli_stdout.tmp";
    const std::string err_path = "cli_stderr.tmp";
    const std::string cmd = std::string(OCS_CLI_PATH) + " " + args + " >" +
                            out_path + " 2>" + err_path;
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

const double pi = std::acos(-1.0);

}  // namespace

TEST_CASE("gap subcommand emits a deterministic JSON summary", "[cli]") {
    const CliRun r = run_cli("gap --n 1000 --k 500");
    REQUIRE(r.exit_code == 0);

    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j.at("n").get<std::int64_t>() == 1000);
    CHECK(j.at("k").get<std::int64_t>() == 500);
    CHECK(j.at("method").get<std::string>() == "analytic");
    CHECK(j.at("m_star").get<std::int64_t>() == 4);
    CHECK(j.at("gamma").get<double>() ==
          Approx(4.0 * pi * pi / 1e6).epsilon(1e-15));
    CHECK(j.at("relaxation").get<double>() ==
          Approx(1e6 / (4.0 * pi * pi)).epsilon(1e-15));
    CHECK_FALSE(j.contains("newton"));
    CHECK_FALSE(j.contains("oracle"));

    const CliRun again = run_cli("gap --n 1000 --k 500");
    CHECK(again.exit_code == 0);
    CHECK(again.out == r.out);
}

TEST_CASE("gap --method all reconciles numeric and analytic at k = n-1",
          "[cli]") {
    const CliRun r = run_cli("gap --n 100 --k 99 --method all");
    REQUIRE(r.exit_code == 0);

    const nlohmann::json j = nlohmann::json::parse(r.out);
    const double exact = 1.0 - std::cos(pi / 100.0);
    CHECK(j.at("newton").at("gap").get<double>() == Approx(exact).epsilon(1e-9));
    CHECK(j.at("oracle").at("gap").get<double>() == Approx(exact).epsilon(1e-9));
    CHECK(j.at("newton").at("ratio").get<double>() == Approx(1.0).margin(1e-3));
    CHECK(j.at("oracle").at("ratio").get<double>() == Approx(1.0).margin(1e-3));
}

TEST_CASE("usage and domain errors exit 1, help exits 0", "[cli]") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate --n 10").exit_code == 1);
    CHECK(run_cli("gap --n 100").exit_code == 1);
    CHECK(run_cli("gap --n 100 --k 5 --bogus").exit_code == 1);
    CHECK(run_cli("gap --n 100 --k 5 --method surprise").exit_code == 1);
    CHECK(run_cli("gap --n 100 --k 100").exit_code == 1);
    CHECK(run_cli("scan --n 100 --stride 0").exit_code == 1);

    const CliRun oracle = run_cli("gap --n 1000 --k 500 --method oracle");
    CHECK(oracle.exit_code == 1);
    CHECK(oracle.err.find("oracle") != std::string::npos);

    const CliRun window = run_cli("bells --n 1000 --p 1 --q 3 --halfwidth 100");
    CHECK(window.exit_code == 1);
    CHECK(window.err.find("window") != std::string::npos);

    const CliRun badout = run_cli("gap --n 100 --k 5 --out /nonexistent/x.json");
    CHECK(badout.exit_code == 1);
    CHECK(badout.err.find("cannot open") != std::string::npos);

    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("gap --help").exit_code == 0);
}

TEST_CASE("scan emits one row per k with empty numeric columns by default",
          "[cli]") {
    const CliRun r = run_cli("scan --n 200");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 200);
    CHECK(lines[0] == "n,k,m_star,gamma,relaxation,gap_numeric,ratio");
    CHECK(lines[1].starts_with("200,1,"));
    CHECK(lines[199].starts_with("200,199,"));
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].ends_with(",,"));
}

TEST_CASE("scan --with-numeric fills sampled rows only", "[cli]") {
    const CliRun r = run_cli("scan --n 60 --with-numeric --stride 30");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 60);
    CHECK(lines[30].starts_with("60,30,"));
    CHECK_FALSE(lines[30].ends_with(",,"));
    CHECK(lines[29].ends_with(",,"));
    CHECK(lines[31].ends_with(",,"));
}

TEST_CASE("eigs emits the full spectrum as CSV", "[cli]") {
    const CliRun r = run_cli("eigs --n 50 --k 20");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 51);
    CHECK(lines[0] == "re,im,modulus,eps,a,b,residual,seed_family");
}

TEST_CASE("bells sweeps the window around the rational point", "[cli]") {
    const CliRun r = run_cli("bells --n 1000 --p 1 --q 3 --halfwidth 40");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 82);
    CHECK(lines[0] == "k,gamma,prediction,ratio");
    CHECK(lines[1].starts_with("293,"));
    CHECK(lines[81].starts_with("373,"));
}

TEST_CASE("thm2 reports counts per delta and exits 0 when bounds hold",
          "[cli]") {
    const CliRun r = run_cli("thm2 --n 100 --delta 0.01 --delta 0.5");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "n,upper_violations,lower_violations,equality_at_k1,delta,count,cap,ok");
    CHECK(lines[1].starts_with("100,0,0,1,0.01,1,"));
    CHECK(lines[2].starts_with("100,0,0,1,0.5,39,"));
    CHECK(lines[1].ends_with(",1"));
    CHECK(lines[2].ends_with(",1"));
}

TEST_CASE("thm5 default denominators give the qualifying golden rows",
          "[cli]") {
    const CliRun r = run_cli("thm5 --alpha-num 618 --alpha-den 1000");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "q,n,k,m_star,product,bound,ok");
    CHECK(lines[1].starts_with("5,483,298,5,"));
    CHECK(lines[2].starts_with("21,150237,92846,21,"));
    CHECK(lines[3].starts_with("89,48468382,29953460,89,"));
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].ends_with(",1"));
}

TEST_CASE("envelope emits report-only data and a stderr note", "[cli]") {
    const CliRun r = run_cli("envelope --n 100");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 100);
    CHECK(lines[0] == "k,relaxation,envelope");
    CHECK(r.err.find("not asserted") != std::string::npos);
}

TEST_CASE("simulate exact mode writes the commented TV series", "[cli]") {
    const CliRun r = run_cli("simulate --n 24 --k 8 --mode exact --steps 50");
    REQUIRE(r.exit_code == 0);

    const std::vector<std::string> lines = lines_of(r.out);
    REQUIRE(lines.size() == 8 + 1 + 51);
    CHECK(lines[0] == "# mode=exact");
    CHECK(lines[7] == "# algorithm=splitmix64");
    CHECK(lines[8] == "t,tv");
    CHECK(lines[9].starts_with("0,0.958333"));
    CHECK(lines[59].starts_with("50,"));
}

TEST_CASE("simulate card mode is seed-reproducible byte for byte", "[cli]") {
    const std::string common =
        "simulate --n 24 --k 8 --mode card --trials 500 --steps 80 "
        "--checkpoint 40 --checkpoint 80";
    const CliRun a = run_cli(common + " --seed 7 --out sim_a.csv");
    const CliRun b = run_cli(common + " --seed 7 --out sim_b.csv");
    const CliRun c = run_cli(common + " --seed 8 --out sim_c.csv");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(c.exit_code == 0);
    CHECK(a.out.empty());

    const std::string text_a = slurp("sim_a.csv");
    CHECK(text_a == slurp("sim_b.csv"));
    CHECK(text_a != slurp("sim_c.csv"));

    const std::vector<std::string> lines = lines_of(text_a);
    REQUIRE(lines.size() == 11);
    CHECK(lines[4] == "# trials=500");
    CHECK(lines[6] == "# rng_seed=7");
    CHECK(lines[8] == "t,tv");
    CHECK(lines[9].starts_with("40,"));
    CHECK(lines[10].starts_with("80,"));

    std::remove("sim_a.csv");
    std::remove("sim_b.csv");
    std::remove("sim_c.csv");
}

TEST_CASE("simulate deck modes label their statistic", "[cli]") {
    const CliRun tv =
        run_cli("simulate --n 6 --k 2 --mode deck --stat tv --steps 100 "
                "--checkpoint 100");
    REQUIRE(tv.exit_code == 0);
    const std::vector<std::string> tv_lines = lines_of(tv.out);
    REQUIRE(tv_lines.size() == 11);
    CHECK(tv_lines[8] == "# stat=tv");
    CHECK(tv_lines[9] == "t,tv");
    REQUIRE(tv_lines[10].starts_with("100,"));
    const double tv_val = std::stod(tv_lines[10].substr(4));
    CHECK(tv_val == Approx(0.5).margin(1e-6));

    const CliRun fp =
        run_cli("simulate --n 6 --k 2 --mode deck --stat fixed_points "
                "--trials 400 --steps 20 --checkpoint 20 --seed 3");
    REQUIRE(fp.exit_code == 0);
    const std::vector<std::string> fp_lines = lines_of(fp.out);
    REQUIRE(fp_lines.size() == 11);
    CHECK(fp_lines[9] == "t,mean_fixed_points");
    REQUIRE(fp_lines[10].starts_with("20,"));
    const double fp_val = std::stod(fp_lines[10].substr(3));
    CHECK(fp_val == Approx(1.0).margin(0.2));
}
