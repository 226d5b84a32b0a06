#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crcap/app/config_io.hpp"
#include "crcap/app/figures.hpp"
#include "crcap/app/manifest.hpp"
#include "crcap/app/sweep.hpp"
#include "crcap/app/validate.hpp"

using namespace crcap;
using namespace crcap::app;
namespace fs = std::filesystem;

namespace {

std::vector<double> column(const CsvTable& t, const std::string& name) {
    const int k = t.column(name);
    REQUIRE(k >= 0);
    std::vector<double> out;
    for (const auto& row : t.rows) out.push_back(std::stod(row[std::size_t(k)]));
    return out;
}

const FigureCurve& curve(const FigureRecipe& r, const std::string& part) {
    for (const FigureCurve& c : r.curves) {
        if (c.file.find(part) != std::string::npos) return c;
    }
    FAIL("missing curve " << part);
    throw 0;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("crcap_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CRCAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json fig2_doc() {
    return json::parse(R"({"T_s": 0.1, "N_s": "2.5m", "B_hz": "100k", "theta": 0.01, "rho": 0.1,
                           "snr1_db": 0, "snr4_db": 10, "lambda": 1.4})");
}

}  // namespace

TEST_CASE("SI suffixes") {
    CHECK(parse_si("100k") == 1e5);
    CHECK(parse_si("2.5m") == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(parse_si("3u") == doctest::Approx(3e-6).epsilon(1e-15));
    CHECK(parse_si("1e3") == 1e3);
    CHECK(parse_si("-4") == -4.0);
    CHECK_THROWS_AS(parse_si("12x"), ConfigError);
    CHECK_THROWS_AS(parse_si("kk"), ConfigError);
    CHECK_THROWS_AS(parse_si(""), ConfigError);
}

TEST_CASE("scenario config round trip and defaults") {
    const ScenarioSpec s = parse_scenario(fig2_doc());
    CHECK(s.sensing_s == doctest::Approx(0.0025));
    CHECK(s.bandwidth_hz == 1e5);
    CHECK(s.sensing_mode == SensingMode::Exact);
    CHECK(s.assumed.count("kappa") == 1);
    CHECK(s.assumed.count("noise_var") == 1);
    const ScenarioSpec t = parse_scenario(to_json(s));
    CHECK(dump_json(to_json(t)) == dump_json(to_json(s)));
    CHECK(t.performance().p_d == doctest::Approx(s.performance().p_d).epsilon(1e-12));

    json bad = fig2_doc();
    bad["thetta"] = 1;
    CHECK_THROWS_AS(parse_scenario(bad), ConfigError);
    json two = fig2_doc();
    two["perfect_sensing"] = true;
    CHECK_THROWS_AS(parse_scenario(two), ConfigError);
    json none = fig2_doc();
    none.erase("lambda");
    const ScenarioSpec p = parse_scenario(none);
    CHECK(p.sensing_mode == SensingMode::Perfect);
    CHECK(p.assumed.count("perfect_sensing") == 1);

    json tab = fig2_doc();
    tab["fading"] = {{"kind", "tabulated"}, {"z", {0.0, 1.0, 4.0}}, {"cdf", {0.0, 0.6, 1.0}}};
    const ScenarioSpec q = parse_scenario(tab);
    CHECK(q.fading.kind() == FadingModel::Kind::TabulatedCdf);
    CHECK(parse_scenario(to_json(q)).fading.cdf(2.0) == doctest::Approx(q.fading.cdf(2.0)));
}

TEST_CASE("lambda sweep: false alarms fall and detection falls with the threshold") {
    SweepSpec sw;
    sw.axis = SweepAxis::Lambda;
    sw.grid = make_grid(0.5, 3.0, 26, false);
    CHECK(sw.grid.front() == 0.5);
    CHECK(sw.grid.back() == 3.0);
    const CsvTable t = run_sweep(parse_scenario(fig2_doc()), sw);
    REQUIRE(t.rows.size() == 26);
    const auto pf = column(t, "p_f"), pd = column(t, "p_d"), lam = column(t, "lambda");
    for (std::size_t k = 1; k < pf.size(); ++k) {
        CHECK(pf[k] <= pf[k - 1]);
        CHECK(pd[k] <= pd[k - 1]);
        CHECK(lam[k] > lam[k - 1]);
    }
    sw.grid = {1.0, 0.5};
    CHECK_THROWS_AS(sw.validate(), ConfigError);
}

TEST_CASE("theta sweep keeps the scheme ordering") {
    json doc = fig2_doc();
    doc.erase("lambda");
    doc["perfect_sensing"] = true;
    const ScenarioSpec s = parse_scenario(doc);
    std::vector<std::vector<double>> r;
    for (Scheme sc : {Scheme::FixedRateFixedPower, Scheme::VarRateFixedPower, Scheme::VarRateVarPower}) {
        SweepSpec sw;
        sw.axis = SweepAxis::Theta;
        sw.scheme = sc;
        sw.grid = make_grid(1e-3, 1.0, 7, true);
        r.push_back(column(run_sweep(s, sw), "r_e"));
    }
    for (std::size_t k = 0; k < r[0].size(); ++k) {
        CHECK(r[2][k] >= r[1][k]);
        CHECK(r[1][k] >= r[0][k]);
    }
}

TEST_CASE("sweep errors land in the error column") {
    SweepSpec sw;
    sw.axis = SweepAxis::N;
    sw.grid = {0.0025, 0.2};  // N > T
    const CsvTable t = run_sweep(parse_scenario(fig2_doc()), sw);
    const int e = t.column("error");
    REQUIRE(e >= 0);
    CHECK(t.rows[0][std::size_t(e)].empty());
    CHECK_FALSE(t.rows[1][std::size_t(e)].empty());
}

TEST_CASE("figure recipes reproduce the published shapes") {
    const FigureRecipe f2 = figure_recipe("fig2");
    const FigureCurve& mid = curve(f2, "N2p5ms");
    const CsvTable t2 = run_sweep(mid.scenario, mid.sweep);
    const auto lam = column(t2, "lambda"), r2 = column(t2, "r_e");
    for (std::size_t k = 0; k < lam.size(); ++k) {
        if (lam[k] >= 1.2 && lam[k] <= 1.7) CHECK(r2[k] == doctest::Approx(0.052).epsilon(0.15));
    }

    const FigureRecipe f3 = figure_recipe("fig3");
    const FigureCurve& strict = curve(f3, "N2p5ms");
    const auto r3 = column(run_sweep(strict.scenario, strict.sweep), "r_e");
    for (std::size_t k = 0; k < r3.size(); ++k) CHECK(r3[k] < r2[k]);

    const FigureRecipe f5 = figure_recipe("fig5");
    const FigureCurve& hi = curve(f5, "lambda2p2");
    const CsvTable t5 = run_sweep(hi.scenario, hi.sweep);
    const auto n = column(t5, "N_s"), r5 = column(t5, "r_e");
    const std::size_t peak = std::size_t(std::max_element(r5.begin(), r5.end()) - r5.begin());
    CHECK(peak > 0);
    CHECK(peak + 1 < r5.size());
    CHECK(n[peak] == doctest::Approx(0.0035).epsilon(0.3));

    // Perfect sensing: the optimal rates do not move with rho, only R_E does.
    const FigureRecipe f7 = figure_recipe("fig7");
    std::vector<CsvTable> t7;
    for (const FigureCurve& c : f7.curves) {
        SweepSpec sw = c.sweep;
        sw.outputs = {"theta", "r_e", "r1_opt", "r2_opt"};
        t7.push_back(run_sweep(c.scenario, sw));
    }
    REQUIRE(t7.size() == 3);
    CHECK(column(t7[0], "r1_opt") == column(t7[2], "r1_opt"));
    CHECK(column(t7[0], "r2_opt") == column(t7[2], "r2_opt"));

    const FigureRecipe f8 = figure_recipe("fig8");
    const FigureCurve& fx = curve(f8, "fixed");
    const FigureCurve& vr = curve(f8, "var-rate");
    const auto a = column(run_sweep(fx.scenario, fx.sweep), "r_e"), b = column(run_sweep(vr.scenario, vr.sweep), "r_e");
    const auto l8 = column(run_sweep(fx.scenario, fx.sweep), "lambda");
    double cross = NAN;
    for (std::size_t k = 1; k < a.size(); ++k) {
        if (b[k - 1] > a[k - 1] && b[k] <= a[k]) cross = l8[k];
    }
    CHECK(cross == doctest::Approx(2.0).epsilon(0.25));

    CHECK_THROWS_AS(figure_recipe("fig4"), ConfigError);
}

TEST_CASE("figure files, CSV reparse and byte-identical reruns") {
    const fs::path dir = scratch("fig6");
    const RunManifest m = reproduce_figure("fig6", dir.string());
    REQUIRE(m.outputs.size() == 3);
    std::map<std::string, std::string> first;
    for (const std::string& f : m.outputs) {
        first[f] = slurp(dir / f);
        std::istringstream in(first[f]);
        const CsvTable t = read_csv(in);
        CHECK(t.column("N_s") >= 0);
        CHECK(t.column("r1_opt") >= 0);
        CHECK(t.rows.size() == 20);
    }
    const std::string manifest = slurp(dir / "fig6.manifest.json");
    const RunManifest back = read_manifest((dir / "fig6.manifest.json").string());
    CHECK(back.command == "reproduce");

    REQUIRE(cli("reproduce --from-manifest " + (dir / "fig6.manifest.json").string()) == 0);
    for (const std::string& f : m.outputs) CHECK(slurp(dir / f) == first[f]);
    CHECK(slurp(dir / "fig6.manifest.json") == manifest);
}

TEST_CASE("sweep manifest reruns through the CLI") {
    const fs::path dir = scratch("sweep");
    const std::string out = (dir / "s.csv").string();
    REQUIRE(cli("sweep --axis rho --values 0.1,0.5,0.9 --lambda 1.3 --output " + out) == 0);
    const std::string first = slurp(out);
    const std::string man = slurp(manifest_path_for(out));
    const json doc = json::parse(man);
    CHECK(doc.at("assumed_defaults").contains("kappa"));
    CHECK(doc.at("command") == "sweep");
    fs::remove(out);
    REQUIRE(cli("sweep --from-manifest " + manifest_path_for(out)) == 0);
    CHECK(slurp(out) == first);
    CHECK(slurp(manifest_path_for(out)) == man);
}

TEST_CASE("validation reports") {
    // Deterministic channel, no primary user: every frame delivers the same bits.
    json doc = fig2_doc();
    doc["rho"] = 0.0;
    doc["fading"] = {{"kind", "degenerate"}, {"z0", 1.0}};
    doc.erase("lambda");
    doc["perfect_sensing"] = true;
    ValidationOptions opt;
    opt.frames = 20000;
    opt.effcap_rel_tol = 1e-9;
    const ValidationReport tight = run_validation(parse_scenario(doc), Scheme::FixedRateFixedPower, opt);
    CHECK(tight.pass);

    ValidationOptions o2;
    o2.frames = 1000000;
    const ScenarioSpec s = parse_scenario(fig2_doc());
    const ValidationReport rep = run_validation(s, Scheme::FixedRateFixedPower, o2);
    CHECK(rep.pass);
    const ValidationReport again = run_validation(s, Scheme::FixedRateFixedPower, o2);
    CHECK(dump_json(rep.report) == dump_json(again.report));
    CHECK(rep.report.at("checks").at(0).at("name") == "effective_capacity");
    CHECK(rep.report.at("checks").at(0).at("estimator") == "importance");

    ValidationOptions few;
    few.frames = 100;
    CHECK_THROWS_AS(run_validation(s, Scheme::FixedRateFixedPower, few), ConfigError);
}

TEST_CASE("simulation summary with a delay check") {
    SimulationOptions o;
    o.frames = 50000;
    o.delay_s = 1.0;
    const SimulationOutput out = run_simulation(parse_scenario(fig2_doc()), Scheme::VarRateFixedPower, o);
    CHECK(out.frames.size() == 50000);
    CHECK(out.queue.size() == 50000);
    CHECK(out.summary.contains("delay"));
    const SimulationOutput again = run_simulation(parse_scenario(fig2_doc()), Scheme::VarRateFixedPower, o);
    CHECK(dump_json(out.summary) == dump_json(again.summary));
}

TEST_CASE("CLI exit codes") {
    CHECK(cli("effcap --lambda 1.4") == 0);
    CHECK(cli("effcap --scheme var-power --perfect-sensing --theta 1") == 0);
    CHECK(cli("sense --start 0.5 --stop 2 --points 4") == 0);
    CHECK(cli("effcap --theta -1") == 2);
    CHECK(cli("effcap --theta abc") == 2);
    CHECK(cli("effcap --no-such-flag") == 2);
    CHECK(cli("effcap --config /nonexistent/x.json") == 2);
    CHECK(cli("reproduce --figure fig4") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("validate --lambda 1.4 --frames 10000 --tolerance 1e-9 --plain") == 4);
    CHECK(cli("simulate --lambda 1.4 --frames 20000") == 0);
}
