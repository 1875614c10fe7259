#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "cli_runner.hpp"
#include "merton/io.hpp"
#include "merton/variance.hpp"

using namespace merton;

namespace {

std::vector<std::vector<std::string>> csv_cells(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(cli::run("").code != 0);
    CHECK(cli::run("--help").code == 0);
    CHECK(cli::run("frobnicate").code == 2);
    CHECK(cli::run("scaling --gammas 0.5 --p 2").code == 2);
    CHECK(cli::run("scaling --gammas 3:1:0.1").code == 2);
    CHECK(cli::run("mapping --rhoA 0:1:0.5 --slope steep").code == 2);
    CHECK(cli::run("variance --n 0").code == 2);

    write_text_file(cli::path("bad.csv"), "year,n,k\n1981,100,1\n1982,100,2\n1983,100,200\n");
    const auto bad = cli::run("fit --input " + cli::path("bad.csv"));
    CHECK(bad.code == 2);
    CHECK(bad.err.find("k exceeds n at line 4") != std::string::npos);
    CHECK(bad.out.empty());

    write_text_file(cli::path("gap.csv"), "year,n,k\n1981,100,1\n1983,100,2\n");
    const auto gap = cli::run("fit --input " + cli::path("gap.csv"));
    CHECK(gap.code == 2);
    CHECK(gap.err.find("1982") != std::string::npos);

    CHECK(cli::run("fit --input " + cli::path("nonexistent.csv")).code == 2);
    CHECK(cli::run("generate --T 5").code == 2);
    CHECK(cli::run("simulate --T 3 -o /nonexistent/dir/out.csv").code == 2);
}

TEST_CASE("mapping curves") {
    const auto r = cli::run("mapping --p 0.5,0.01 --rhoA 0:1:0.25");
    REQUIRE(r.code == 0);
    const auto rows = csv_cells(r.out);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == std::vector<std::string>{"p", "rho_A", "rho_D", "tangent"});
    CHECK(std::abs(std::stod(rows[1][2])) < 1e-9);
    CHECK(std::abs(std::stod(rows[3][2]) - 1.0 / 3.0) < 1e-8);
    CHECK(std::abs(std::stod(rows[5][2]) - 1.0) < 1e-9);
    CHECK(std::abs(std::stod(rows[5][3]) - 2.0 / 3.14159265358979) < 1e-6);
}

TEST_CASE("variance curves") {
    const auto r = cli::run("variance --p 0.1 --rhoA 0.5 --theta 0.9 --n 100 --t 1:20:1");
    REQUIRE(r.code == 0);
    const auto rows = csv_cells(r.out);
    REQUIRE(rows.size() == 21);
    CHECK(rows[0] == std::vector<std::string>{"t", "C_t", "V_exact", "V_lower", "V_upper", "V_asymptotic"});
    const ModelParams m(0.1, 0.5, DecayKernel::exponential(0.9));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto t = static_cast<std::size_t>(std::stod(rows[i][0]));
        CHECK(t == i);
        const double v = std::stod(rows[i][2]);
        CHECK(v == doctest::Approx(variance_exact(m, 100, t).total).epsilon(1e-11));
        CHECK(std::stod(rows[i][3]) <= v);
        CHECK(std::stod(rows[i][4]) >= v);
    }
    CHECK(rows[1][5] == "nan");
    const auto log_grid = cli::run("variance --points 10 --T 1000 --theta 0.5");
    REQUIRE(log_grid.code == 0);
    CHECK(csv_cells(log_grid.out).size() >= 9);
}

TEST_CASE("scaling sweep") {
    const auto r = cli::run("scaling --gammas 0.1:3.0:0.1 --T 1e5 --p 0.5 --rhoA 0.5 --n 1e4");
    REQUIRE(r.code == 0);
    const auto rows = csv_cells(r.out);
    REQUIRE(rows.size() == 31);
    CHECK(rows[0] == std::vector<std::string>{"gamma", "delta"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double g = std::stod(rows[i][0]), d = std::stod(rows[i][1]);
        if (g < 0.85) CHECK(std::abs(d - g) <= 0.05);
        if (g > 1.45) CHECK(std::abs(d - 1.0) <= 0.05);
    }
}

TEST_CASE("generate is reproducible") {
    const std::string out = cli::path("syn.csv");
    const auto a = cli::run("generate --T 99 --n 1e4 --p 0.0151 --rhoA 0.2 --gamma 0.3 --seed 1 -o " + out);
    REQUIRE(a.code == 0);
    const auto first = cli::slurp(out);
    const auto truth = cli::slurp(out + ".truth.json");
    CHECK(cli::run("generate --T 99 --n 1e4 --p 0.0151 --rhoA 0.2 --gamma 0.3 --seed 1 -o " + out).code == 0);
    CHECK(cli::slurp(out) == first);
    CHECK(cli::slurp(out + ".truth.json") == truth);
    const auto h = parse_history_csv(out);
    CHECK(h.size() == 99);
    const auto sidecar = truth_from_json(parse_json_file(out + ".truth.json"));
    CHECK(sidecar.family == KernelFamily::Power);
    CHECK(sidecar.p == 0.0151);
    CHECK(sidecar.kernel_param == 0.3);
    CHECK(sidecar.years == 99);
    CHECK(sidecar.cohort_size == 10000);
    CHECK(sidecar.seed == 1);

    // p defaults to 0.0151
    const std::string plain = cli::path("plain.csv");
    REQUIRE(cli::run("generate --T 4 -o " + plain + " --truth " + cli::path("plain.json")).code == 0);
    CHECK(truth_from_json(parse_json_file(cli::path("plain.json"))).p == 0.0151);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    const std::vector<std::string> commands{
        "simulate --T 30 --n 5000 --gamma 0.3 --seed 7",
        "mapping --p 0.01 --rhoA 0:1:0.1",
        "variance --p 0.02 --gamma 0.4 --n 1000 --T 2000 --points 15",
        "scaling --gammas 0.2:1.6:0.7 --T 2e4",
    };
    for (const auto& c : commands) {
        const auto ref = cli::run(c, "MERTON_THREADS=1");
        REQUIRE(ref.code == 0);
        for (const char* env : {"MERTON_THREADS=1", "MERTON_THREADS=2", "MERTON_THREADS=4"}) {
            CHECK(cli::run(c, env).out == ref.out);
        }
    }
    const std::string hist = cli::path("det.csv");
    REQUIRE(cli::run("simulate --T 25 --n 10000 --theta 0.6 --p 0.02 --seed 3 -o " + hist).code == 0);
    const std::string fit = "fit --input " + hist + " --kernel both --n-paths 128 --starts 2 --tolerance 1e-4";
    const auto ref = cli::run(fit, "MERTON_THREADS=1");
    REQUIRE(ref.code == 0);
    CHECK(cli::run(fit, "MERTON_THREADS=3").out == ref.out);
    const auto j = nlohmann::json::parse(ref.out);
    REQUIRE(j.is_array());
    CHECK(j.size() == 2);
    CHECK(fit_summary_from_json(j[0]).family == KernelFamily::Exponential);
    CHECK(fit_summary_from_json(j[1]).family == KernelFamily::Power);
}

TEST_CASE("simulate writes panel statistics") {
    const auto stats = cli::path("stats.json");
    const auto r = cli::run("simulate --T 10 --n 100 --seed 2 --stats " + stats);
    REQUIRE(r.code == 0);
    const auto h = parse_history_csv_text(r.out);
    const auto j = parse_json_file(stats);
    CHECK(j["z"].get<double>() == doctest::Approx(estimator_z(h).z).epsilon(1e-15));
    CHECK(j["years"] == 10);
}

TEST_CASE("fit on independent data recovers the pooled rate") {
    const std::string out = cli::path("indep.csv");
    REQUIRE(cli::run("generate --T 40 --n 1e4 --rhoA 0 --gamma 0.3 --seed 5 -o " + out).code == 0);
    const auto h = parse_history_csv(out);
    const double pooled = static_cast<double>(h.total_defaults()) / h.total_obligors();
    const auto r = cli::run("fit --kernel power --input " + out + " --n-paths 256 --starts 4");
    REQUIRE(r.code == 0);
    const auto s = fit_summary_from_json(nlohmann::json::parse(r.out));
    CHECK(std::abs(s.p_hat - pooled) <= 1e-3);
    CHECK(s.family == KernelFamily::Power);
    CHECK(s.n_paths == 256);

    const auto w = cli::run("fit --kernel exponential --input " + out +
                            " --n-paths 64 --starts 2 --waic --wbic --draws 200 --warmup 100");
    REQUIRE(w.code == 0);
    const auto sw = fit_summary_from_json(nlohmann::json::parse(w.out));
    CHECK(sw.waic.has_value());
    CHECK(sw.wbic.has_value());
}

TEST_CASE("compare output schema") {
    const std::string out = cli::path("cmp.csv");
    REQUIRE(cli::run("generate --T 20 --n 1e4 --gamma 0.3 --seed 2 -o " + out).code == 0);
    const auto r = cli::run("compare --input " + out + " --draws 200 --n-paths 64 --warmup 100");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["years"] == 20);
    CHECK(j["n_draws"] == 200);
    CHECK(j["waic_unit"] == "year-marginal");
    for (const char* family : {"exponential", "power"}) {
        REQUIRE(j["models"].contains(family));
        for (const char* key : {"waic", "wbic", "lppd", "p_waic", "acceptance_rate", "wbic_acceptance_rate"}) {
            CHECK(j["models"][family][key].is_number());
        }
    }
    const auto again = cli::run("compare --input " + out + " --draws 200 --n-paths 64 --warmup 100");
    CHECK(again.out == r.out);
}
