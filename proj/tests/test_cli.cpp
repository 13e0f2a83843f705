#include "doctest.h"

#include "lapext/cli_app.hpp"
#include "lapext/json_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace lapext;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("lapext");
    for (const std::string& a : args)
        argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path scratch_dir() {
    const std::filesystem::path dir = std::filesystem::path("cli_scratch");
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("spectrum writes the Dirichlet CSV and metadata") {
    const auto dir = scratch_dir();
    const auto csv = (dir / "dirichlet.csv").string();
    const auto meta = (dir / "dirichlet.json").string();
    const int rc = run_cli({"spectrum", "--preset", "dirichlet", "--domain",
                            "interval:pi", "--n", "201", "--k", "3", "--out", csv,
                            "--json", meta});
    REQUIRE(rc == 0);

    const auto rows = parse_csv(slurp(csv));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"index", "value", "residual"});
    const double expected[3] = {1.0, 4.0, 9.0};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::stoi(rows[i + 1][0]) == i);
        CHECK(std::stod(rows[i + 1][1]) ==
              doctest::Approx(expected[i]).epsilon(1e-3));
        CHECK(std::stod(rows[i + 1][2]) < 1e-8);
    }

    const json j = json::parse(slurp(meta));
    CHECK(j.at("gap").at("passes").get<bool>());
    CHECK(j.at("bound").at("passes").get<bool>());
    CHECK(j.at("consistency").at("passes").get<bool>());
    CHECK(j.at("boundary").at("dim").get<int>() == 2);
    CHECK(!j.at("boundary").at("fingerprint").get<std::string>().empty());
}

TEST_CASE("identical configurations produce byte-identical output") {
    const auto dir = scratch_dir();
    const auto a = (dir / "det_a.csv").string();
    const auto b = (dir / "det_b.csv").string();
    const std::vector<std::string> base = {"spectrum", "--preset",
                                           "quasiperiodic:alpha=0.5", "--domain",
                                           "interval:2pi", "--n", "201", "--k", "4"};
    auto with_out = [&](const std::string& path) {
        std::vector<std::string> args = base;
        args.push_back("--out");
        args.push_back(path);
        return args;
    };
    REQUIRE(run_cli(with_out(a)) == 0);
    REQUIRE(run_cli(with_out(b)) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("config files feed defaults and flags override them") {
    const auto dir = scratch_dir();
    const auto cfg_path = (dir / "run.json").string();
    {
        std::ofstream out(cfg_path);
        out << R"({"domain": "interval:pi", "preset": "dirichlet", "k": 4,
                   "grid": "151"})";
    }
    const auto csv = (dir / "config_run.csv").string();
    REQUIRE(run_cli({"spectrum", "--config", cfg_path, "--out", csv}) == 0);
    CHECK(parse_csv(slurp(csv)).size() == 5); // header + k rows from config

    const auto csv2 = (dir / "config_override.csv").string();
    REQUIRE(run_cli({"spectrum", "--config", cfg_path, "--k", "2", "--out", csv2}) ==
            0);
    CHECK(parse_csv(slurp(csv2)).size() == 3); // the flag wins over the file
}

TEST_CASE("configuration mistakes exit with code 1") {
    const auto dir = scratch_dir();
    // unknown config field
    const auto bad_field = (dir / "bad_field.json").string();
    {
        std::ofstream out(bad_field);
        out << R"({"grids": "100"})";
    }
    CHECK(run_cli({"spectrum", "--config", bad_field, "--preset", "dirichlet"}) == 1);

    // malformed JSON
    const auto bad_json = (dir / "bad_json.json").string();
    {
        std::ofstream out(bad_json);
        out << "{not json";
    }
    CHECK(run_cli({"spectrum", "--config", bad_json}) == 1);

    CHECK(run_cli({"spectrum", "--domain", "interval:pi"}) == 1);            // no condition
    CHECK(run_cli({"spectrum", "--preset", "dirichlet", "--domain", "blob:1"}) == 1);
    CHECK(run_cli({"spectrum", "--preset", "dirichlet", "--domain",
                   "interval:pi", "--n", "2"}) == 1);                        // grid too small
    CHECK(run_cli({"spectrum", "--preset", "warp", "--domain", "interval:pi"}) == 1);
    CHECK(run_cli({"nonsense_verb"}) == 1);
    CHECK(run_cli({}) == 1);
}

TEST_CASE("a gapless boundary unitary stops the spectrum verb with code 2") {
    const auto dir = scratch_dir();
    const auto upath = (dir / "gapless.json").string();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(2, 2);
    u(0, 0) = std::polar(1.0, std::acos(-1.0) - 1e-8);
    {
        std::ofstream out(upath);
        out << matrix_to_json(u).dump();
    }
    CHECK(run_cli({"spectrum", "--unitary", upath, "--domain", "interval:pi", "--n",
                   "51"}) == 2);
    // the gap verb is an analysis tool: it reports the failure, exit 0
    const auto gap_out = (dir / "gapless_report.json").string();
    CHECK(run_cli({"gap", "--unitary", upath, "--out", gap_out}) == 0);
    const json j = json::parse(slurp(gap_out));
    CHECK(!j.at("passes").get<bool>());
    // the transform verb needs the gap, exit 2
    CHECK(run_cli({"cayley", "--unitary", upath}) == 2);
}

TEST_CASE("robin1d reports the decaying mode and the positive ladder") {
    const auto dir = scratch_dir();
    const auto csv = (dir / "robin1d.csv").string();
    REQUIRE(run_cli({"robin1d", "--c", "1", "--length", "2pi", "--k", "3", "--out",
                     csv}) == 0);
    const auto rows = parse_csv(slurp(csv));
    REQUIRE(rows.size() == 5); // header + negative + 3 positive
    CHECK(rows[1][0] == "negative");
    CHECK(std::stod(rows[1][2]) == doctest::Approx(-1.0000139482442442).epsilon(1e-10));
    CHECK(rows[2][0] == "positive_0");
    CHECK(std::stod(rows[2][2]) == doctest::Approx(0.08747880825842343).epsilon(1e-9));
}

TEST_CASE("verify sweeps Robin coefficients with the expected mode counts") {
    const auto dir = scratch_dir();
    const auto csv = (dir / "verify_robin.csv").string();
    REQUIRE(run_cli({"verify", "--robin-sweep", "-2,-1,0,1,2", "--domain",
                     "interval:2pi", "--n", "201", "--k", "3", "--out", csv}) == 0);
    const auto rows = parse_csv(slurp(csv));
    REQUIRE(rows.size() == 6);
    const int expected_negatives[5] = {0, 0, 0, 1, 1};
    for (int i = 0; i < 5; ++i) {
        CHECK(std::stoi(rows[i + 1][7]) == expected_negatives[i]);
        CHECK(rows[i + 1][9] == "1"); // every report passes
    }
}

TEST_CASE("verify accepts the mixed rectangle preset") {
    CHECK(run_cli({"verify", "--preset", "zaremba", "--domain", "rectangle:2pi,pi",
                   "--n", "33,17", "--k", "3"}) == 0);
}

TEST_CASE("verify output does not depend on the worker pool size") {
    const auto dir = scratch_dir();
    const auto a = (dir / "pool_a.csv").string();
    const auto b = (dir / "pool_b.csv").string();
    const std::vector<std::string> base = {"verify",  "--samples", "6",
                                           "--domain", "interval:2pi", "--n",
                                           "101",     "--k",       "2"};
    auto with_out = [&](const std::string& path) {
        std::vector<std::string> args = base;
        args.push_back("--out");
        args.push_back(path);
        return args;
    };
    setenv("LAPEXT_THREADS", "4", 1);
    const int rc_a = run_cli(with_out(a));
    setenv("LAPEXT_THREADS", "1", 1);
    const int rc_b = run_cli(with_out(b));
    unsetenv("LAPEXT_THREADS");
    REQUIRE(rc_a == 0);
    REQUIRE(rc_b == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("convergence emits second-order Richardson triplets") {
    const auto dir = scratch_dir();
    const auto csv = (dir / "convergence.csv").string();
    REQUIRE(run_cli({"convergence", "--preset", "dirichlet", "--domain",
                     "interval:pi", "--levels", "51,101,201", "--k", "2", "--out",
                     csv}) == 0);
    const auto rows = parse_csv(slurp(csv));
    REQUIRE(rows.size() == 3); // header + one triplet x two eigenvalues
    for (int i = 1; i <= 2; ++i) {
        const double order = std::stod(rows[i][7]);
        CHECK(order > 1.8);
        CHECK(order < 2.2);
        const double extrapolated = std::stod(rows[i][8]);
        const double exact = i * i;
        CHECK(std::abs(extrapolated - exact) < 1e-5 * exact);
    }
    // fewer than three levels is a configuration error
    CHECK(run_cli({"convergence", "--preset", "dirichlet", "--domain",
                   "interval:pi", "--levels", "51,101"}) == 1);
}

TEST_CASE("isotropy check passes presets and grades raw pair files") {
    const auto dir = scratch_dir();
    const auto report = (dir / "isotropy_preset.json").string();
    REQUIRE(run_cli({"isotropy", "check", "--preset", "robin:c=1", "--domain",
                     "interval:2pi", "--n", "11", "--out", report}) == 0);
    json j = json::parse(slurp(report));
    CHECK(j.at("isotropic").get<bool>());
    CHECK(j.at("maximal").get<bool>());
    CHECK(j.at("max_sigma").get<double>() <= 1e-12);
    CHECK(j.at("max_boundary_residual").get<double>() <= 1e-12);
    CHECK(j.at("projector_distance").get<double>() <= 1e-10);

    // raw pairs: canonical derivative-free basis (the identity condition)
    const auto pairs_path = (dir / "pairs.json").string();
    {
        std::ofstream out(pairs_path);
        out << R"({"pairs": [
          {"value": {"re": [1, 0], "im": [0, 0]},
           "derivative": {"re": [0, 0], "im": [0, 0]}},
          {"value": {"re": [0, 1], "im": [0, 0]},
           "derivative": {"re": [0, 0], "im": [0, 0]}}]})";
    }
    const auto pairs_report = (dir / "isotropy_pairs.json").string();
    REQUIRE(run_cli({"isotropy", "check", "--pairs", pairs_path, "--out",
                     pairs_report}) == 0);
    j = json::parse(slurp(pairs_report));
    CHECK(j.at("isotropic").get<bool>());
    CHECK(j.at("maximal").get<bool>());

    // a symplectically paired set is graded, not rejected
    const auto bad_path = (dir / "pairs_bad.json").string();
    {
        std::ofstream out(bad_path);
        out << R"({"pairs": [
          {"value": {"re": [1, 0], "im": [0, 0]},
           "derivative": {"re": [0, 0], "im": [0, 0]}},
          {"value": {"re": [0, 0], "im": [0, 0]},
           "derivative": {"re": [1, 0], "im": [0, 0]}}]})";
    }
    const auto bad_report = (dir / "isotropy_bad.json").string();
    REQUIRE(run_cli({"isotropy", "check", "--pairs", bad_path, "--out",
                     bad_report}) == 0);
    j = json::parse(slurp(bad_report));
    CHECK(!j.at("isotropic").get<bool>());

    // malformed input is a configuration error
    const auto broken = (dir / "pairs_broken.json").string();
    {
        std::ofstream out(broken);
        out << R"({"values": []})";
    }
    CHECK(run_cli({"isotropy", "check", "--pairs", broken}) == 1);
}

TEST_CASE("cayley verb exports the extension map with its norm") {
    const auto dir = scratch_dir();
    const auto out = (dir / "cayley.json").string();
    REQUIRE(run_cli({"cayley", "--preset", "robin:c=1", "--domain", "interval:2pi",
                     "--n", "21", "--out", out}) == 0);
    const json j = json::parse(slurp(out));
    CHECK(j.at("dim").get<int>() == 2);
    CHECK(j.at("norm").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j.at("projector_rank").get<int>() == 2);
    const Eigen::MatrixXcd a = matrix_from_json(j.at("a_u"));
    CHECK(std::abs(a(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(a(1, 1) - 1.0) < 1e-12);
}

TEST_CASE("domain and length parsing accept the pi shorthand") {
    CHECK(parse_length("pi") == doctest::Approx(std::acos(-1.0)));
    CHECK(parse_length("2pi") == doctest::Approx(2.0 * std::acos(-1.0)));
    CHECK(parse_length("0.5pi") == doctest::Approx(0.5 * std::acos(-1.0)));
    CHECK(parse_length("3.25") == doctest::Approx(3.25));
    CHECK_THROWS(parse_length("-2"));
    CHECK_THROWS(parse_length("pie"));
    CHECK_THROWS(parse_length(""));

    const DomainSpec d = parse_domain("rectangle: 2pi , pi");
    CHECK(d.kind == DomainKind::rectangle);
    CHECK(d.lengths[0] == doctest::Approx(2.0 * std::acos(-1.0)));
    CHECK(d.lengths[1] == doctest::Approx(std::acos(-1.0)));
    CHECK_THROWS(parse_domain("interval"));
    CHECK_THROWS(parse_domain("interval:1,2"));
    CHECK_THROWS(parse_domain("rectangle:1"));

    int n[2];
    parse_grid("800", DomainKind::interval, n);
    CHECK(n[0] == 800);
    parse_grid("64", DomainKind::rectangle, n);
    CHECK(n[0] == 64);
    CHECK(n[1] == 64);
    parse_grid("128,96", DomainKind::rectangle, n);
    CHECK(n[0] == 128);
    CHECK(n[1] == 96);
    CHECK_THROWS(parse_grid("10,20", DomainKind::interval, n));
    CHECK_THROWS(parse_grid("2", DomainKind::interval, n));
}
