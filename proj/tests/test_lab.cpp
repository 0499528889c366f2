#include "doctest.h"

#include "glab/config.hpp"
#include "glab/experiment.hpp"
#include "glab/field.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace glab;
namespace fs = std::filesystem;

namespace {

/// Scratch directory, wiped per test so reruns of the suite stay clean.
fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("glab_lab_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// CSV lines with the trailing (wall-time) column removed, for the
/// byte-identical determinism comparisons.
std::vector<std::string> lines_without_last_column(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        const size_t comma = line.rfind(',');
        out.push_back(comma == std::string::npos ? line : line.substr(0, comma));
    }
    return out;
}

const CriterionVerdict* find_verdict(const CellResult& r, const std::string& name) {
    for (const auto& v : r.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

ExperimentConfig levine_config(const fs::path& out) {
    ExperimentConfig c;
    c.name = "levine";
    c.out_dir = out;
    c.data.amplitude = 2.0;
    c.data.sigma = 1.0;
    c.grid = {GridKind::radial, 1, 12.0, 1201};
    c.controls.t_budget = 1.0;
    c.validate();
    return c;
}

} // namespace

TEST_CASE("flat text and JSON configs parse to the same experiment") {
    const std::string text = R"(
# negative-energy sweep
[experiment]
name = demo
out = scratch/demo
seed = 9
criteria = kaplan, blowup_upper_bound

[equation]
variant = GL
alpha = 2
gamma = 0
theta = 0, 0.3

[data]
family = gaussian
amplitude = 2
sigma = 1

[grid]
kind = radial
dim = 1
extent = 8
n = 64

[run]
dt0 = 0.002
t_budget = 0.5
levels = 4
)";
    const std::string json = R"({
  "experiment": {"name": "demo", "out": "scratch/demo", "seed": 9,
                 "criteria": ["kaplan", "blowup_upper_bound"]},
  "equation": {"variant": "GL", "alpha": 2, "gamma": 0, "theta": [0, 0.3]},
  "data": {"family": "gaussian", "amplitude": 2, "sigma": 1},
  "grid": {"kind": "radial", "dim": 1, "extent": 8, "n": 64},
  "run": {"dt0": 0.002, "t_budget": 0.5, "levels": 4}
})";

    const ExperimentConfig a = parse_config_text(text);
    const ExperimentConfig b = parse_config_json(json);

    CHECK(a.name == "demo");
    CHECK(a.seed == 9u);
    CHECK(a.criteria == std::vector<std::string>{"blowup_upper_bound", "kaplan"});
    CHECK(a.alphas == std::vector<double>{2.0});
    CHECK(a.thetas == std::vector<double>{0.0, 0.3});
    CHECK(a.grid.n == 64);
    CHECK(a.controls.dt0 == 0.002);
    CHECK(a.escalation.levels == 4);
    CHECK(a.cell_count() == 2);

    CHECK(render_config(a) == render_config(b));
    CHECK(config_hash(a) == config_hash(b));

    // The canonical rendering round-trips exactly.
    const ExperimentConfig c = parse_config_text(render_config(a));
    CHECK(render_config(c) == render_config(a));

    // Bookkeeping keys do not change the identity; the seed does.
    ExperimentConfig d = a;
    d.name = "elsewhere";
    d.out_dir = "other/dir";
    CHECK(config_hash(d) == config_hash(a));
    d.seed = 10;
    CHECK(config_hash(d) != config_hash(a));
}

TEST_CASE("config validation rejects malformed experiments") {
    CHECK_THROWS_AS(parse_config_text("[equation]\ntheta =\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[equation]\nalpha = -1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[equation]\ntheta = 2.0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[equation]\nvariant = GL2\ngamma = 0.5\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[equation]\nfoo = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[orbit]\nx = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("alpha = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn = twelve\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[run]\ndt0 = 0.1\ndt0 = 0.2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[experiment]\ncriteria = maximum_principle\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json("[1, 2]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json("{\"equation\": {\"theta\": []}}"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json("not json"), std::invalid_argument);
}

TEST_CASE("cell grid expands in row-major order") {
    ExperimentConfig c;
    c.alphas = {1.0, 2.0};
    c.gammas = {0.0, -1.0};
    c.thetas = {0.0, 0.5};
    const auto cells = expand_cells(c);
    REQUIRE(cells.size() == 8);
    CHECK(cells[0].alpha == 1.0);
    CHECK(cells[0].gamma == 0.0);
    CHECK(cells[0].theta == 0.0);
    CHECK(cells[1].theta == 0.5);
    CHECK(cells[2].gamma == -1.0);
    CHECK(cells[4].alpha == 2.0);
    CHECK(cells[7].index == 7);
    CHECK(cells[7].alpha == 2.0);
    CHECK(cells[7].gamma == -1.0);
    CHECK(cells[7].theta == 0.5);
}

TEST_CASE("initial data families build what the config says") {
    ExperimentConfig c;
    c.grid = {GridKind::periodic1d, 1, 16.0, 128};
    c.data.amplitude = 1.5;
    c.data.sigma = 2.0;
    c.data.chirp = 0.7;
    const CellSettings cell{0, 2.0, 0.0, 0.0};

    const FieldState u = build_initial_state(c, cell);
    REQUIRE(u.values.size() == 128);
    for (const int i : {0, 17, 63, 100}) {
        const double x = u.grid->nodes[static_cast<size_t>(i)];
        const std::complex<double> want = 1.5 * std::exp(-(x * x) / (2.0 * 2.0)) *
                                          std::exp(std::complex<double>(0.0, 0.7 * x * x));
        CHECK(std::abs(u.values[static_cast<size_t>(i)] - want) < 1e-15);
    }

    // The ground-state family lands the alpha = 2, N = 1 profile, whose
    // centre value is sqrt(2), scaled by the amplitude.
    ExperimentConfig g;
    g.grid = {GridKind::radial, 1, 12.0, 601};
    g.data.family = InitialData::Family::ground_state;
    g.data.amplitude = 1.2;
    const FieldState q = build_initial_state(g, cell);
    CHECK(sup_norm(q) == doctest::Approx(1.2 * std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("single negative-energy cell produces a certified record") {
    const fs::path out = fresh_dir("levine");
    const ExperimentConfig c = levine_config(out);

    const ExperimentRecord rec = run_experiment(c, 1);
    REQUIRE(rec.cells.size() == 1);
    const CellResult& r = rec.cells[0];

    CHECK(r.outcome == CellOutcome::blowup);
    CHECK(r.stop_reason == StopReason::sup_norm_threshold);
    CHECK(r.sup0 == 2.0);
    CHECK(!r.loaded);

    // Upper bound from the negative-energy certificate: m/(alpha (alpha+2)
    // (-E)) on this data, frozen against the quadrature-exact value.
    const CriterionVerdict* upper = find_verdict(r, "blowup_upper_bound");
    REQUIRE(upper != nullptr);
    REQUIRE(upper->applicable);
    REQUIRE(upper->t_upper.has_value());
    CHECK(*upper->t_upper == doctest::Approx(0.6036).epsilon(2e-4));

    // The measured bracket sits below the certificate and contains the
    // extrapolated time.
    CHECK(r.blowup.blew_up);
    REQUIRE(r.blowup.t_estimate.has_value());
    CHECK(r.blowup.t_bracket.first <= *r.blowup.t_estimate);
    CHECK(*r.blowup.t_estimate <= r.blowup.t_bracket.second);
    CHECK(r.blowup.t_bracket.second < *upper->t_upper);

    // Kaplan applies to this real, positive heat-flow data.
    const CriterionVerdict* kap = find_verdict(r, "kaplan");
    REQUIRE(kap != nullptr);
    CHECK(kap->applicable);
    REQUIRE(kap->t_upper.has_value());
    CHECK(r.blowup.t_bracket.first < *kap->t_upper);

    // Subcritical existence bound stays below everything measured.
    const CriterionVerdict* lower = find_verdict(r, "global_lower_bound");
    REQUIRE(lower != nullptr);
    CHECK(lower->applicable);
    REQUIRE(lower->t_lower.has_value());
    CHECK(std::isfinite(*lower->t_lower));
    CHECK(*lower->t_lower < r.blowup.t_bracket.first);

    // Mass concentration kicks in on the way to blowup.
    REQUIRE(r.mass_growth_bound.has_value());
    CHECK(r.final_time < *r.mass_growth_bound);

    // nls_variance is evaluated but out of range at alpha = 2 < 4/N.
    const CriterionVerdict* nls = find_verdict(r, "nls_variance");
    REQUIRE(nls != nullptr);
    CHECK(!nls->applicable);

    // Conservation-law residuals are dominated by the last few steps, where
    // the peak outgrows the grid; earlier rows sit orders below these caps.
    CHECK(r.max_mass_residual < 0.2);
    CHECK(r.max_energy_residual < 0.2);

    // The report over this record finds nothing to complain about.
    const ReportFiles files = report({rec}, out / "report");
    CHECK(files.violation_count == 0);
    CHECK(files.skipped_cells == 0);
    const std::string violations = read_file(files.violations);
    CHECK(violations == "hash,cell,kind,source,bound,measured\n");
    const auto summary = lines_without_last_column(read_file(files.summary));
    REQUIRE(summary.size() == 2);
    CHECK(summary[0] ==
          "hash,cell,alpha,gamma,theta,outcome,stop_reason,sup0,sup_final,final_time,"
          "bracket_lo,bracket_hi,t_estimate,fit_rho,kaplan_t_upper,smallness_global,upper_t,"
          "well_t,lower_t,lower_global,nls_t_upper,mass_growth_t,residual_mass,residual_energy,"
          "skip_reason");
    CHECK(summary[1].find(rec.hash) == 0);
    CHECK(summary[1].find("blowup") != std::string::npos);
}

TEST_CASE("rerunning a completed config loads every cell instead of recomputing") {
    const fs::path out = fresh_dir("idempotent");
    ExperimentConfig c = levine_config(out);
    c.grid.n = 401;
    c.grid.extent = 10.0;

    const ExperimentRecord first = run_experiment(c, 1);
    REQUIRE(first.cells.size() == 1);
    CHECK(!first.cells[0].loaded);

    const fs::path cell_file = out / first.hash / "cell_0.json";
    REQUIRE(fs::exists(cell_file));
    const std::string before = read_file(cell_file);

    const ExperimentRecord second = run_experiment(c, 1);
    REQUIRE(second.cells.size() == 1);
    CHECK(second.cells[0].loaded);
    CHECK(read_file(cell_file) == before);

    // The shortest-round-trip JSON encoding reproduces every number exactly.
    const CellResult& a = first.cells[0];
    const CellResult& b = second.cells[0];
    CHECK(a.outcome == b.outcome);
    CHECK(a.final_time == b.final_time);
    CHECK(a.blowup.t_bracket.first == b.blowup.t_bracket.first);
    CHECK(a.blowup.t_bracket.second == b.blowup.t_bracket.second);
    CHECK(a.verdicts.size() == b.verdicts.size());
    for (size_t i = 0; i < a.verdicts.size(); ++i) {
        CHECK(a.verdicts[i].name == b.verdicts[i].name);
        CHECK(a.verdicts[i].applicable == b.verdicts[i].applicable);
        if (a.verdicts[i].t_upper) CHECK(*a.verdicts[i].t_upper == *b.verdicts[i].t_upper);
        CHECK(a.verdicts[i].details == b.verdicts[i].details);
    }

    // load_record sees the same thing without touching the solver.
    const auto loaded = load_record(c);
    REQUIRE(loaded.has_value());
    CHECK(loaded->hash == first.hash);
    REQUIRE(loaded->cells.size() == 1);
    CHECK(loaded->cells[0].final_time == a.final_time);

    ExperimentConfig other = c;
    other.seed = c.seed + 1;
    CHECK(!load_record(other).has_value());
}

TEST_CASE("theta zero cell matches a hand-built heat-flow run") {
    const fs::path out = fresh_dir("heatcheck");
    ExperimentConfig c = levine_config(out);
    c.grid.n = 401;
    c.grid.extent = 10.0;

    const auto cells = expand_cells(c);
    const CellResult r = run_cell(c, cells[0]);
    REQUIRE(r.outcome == CellOutcome::blowup);

    // Rebuild the exact run the lab is supposed to have made.
    const FieldState u0 = build_initial_state(c, cells[0]);
    RunControls rc = c.controls;
    const double m0 = c.escalation.m0_factor * sup_norm(u0);
    for (int k = 0; k < c.escalation.levels; ++k)
        rc.hit_thresholds.push_back(m0 * std::pow(2.0, k));
    rc.sup_threshold = rc.hit_thresholds.back();
    const Trajectory traj = run(u0, cell_params(c, cells[0]), rc);
    const BlowupVerdict direct = estimate_blowup_time(traj.threshold_hits);

    CHECK(r.final_time == traj.reports.back().time);
    CHECK(r.sup_final == sup_norm(traj.final_state));
    REQUIRE(direct.blew_up);
    REQUIRE(direct.t_estimate.has_value());
    REQUIRE(r.blowup.t_estimate.has_value());
    CHECK(r.blowup.t_bracket.first == direct.t_bracket.first);
    CHECK(r.blowup.t_bracket.second == direct.t_bracket.second);
    CHECK(*r.blowup.t_estimate == *direct.t_estimate);
}

TEST_CASE("theta sweep tabulates the cos-theta trade against the certificates") {
    const fs::path out = fresh_dir("sweep");
    ExperimentConfig c;
    c.name = "sweep";
    c.out_dir = out;
    c.thetas = {0.0, 0.3, 0.6, 0.9, 1.1, 1.3, 1.45, 1.52};
    c.data.amplitude = 2.0;
    // Near pi/2 the run radiates like a free Schrodinger wave while the core
    // focuses, so the domain is kept wide and the leak alarm tolerant.
    c.grid = {GridKind::radial, 1, 20.0, 1001};
    c.controls.t_budget = 14.0;
    c.controls.boundary_leak_tol = 0.05;
    c.validate();

    const SweepTable table = theta_sweep(c, 4);
    REQUIRE(table.rows.size() == 8);
    CHECK(table.alpha == 2.0);

    double min_cos_t = 1e300;
    double max_cos_t = 0.0;
    double prev_upper = 0.0;
    for (const SweepRow& row : table.rows) {
        CAPTURE(row.theta);
        REQUIRE(row.outcome == CellOutcome::blowup);
        REQUIRE(row.t_upper.has_value());
        REQUIRE(row.t_lower.has_value());
        REQUIRE(row.t_estimate.has_value());

        // Negative-energy certificate scales like 1/cos(theta).
        CHECK(*row.t_upper > prev_upper);
        prev_upper = *row.t_upper;

        REQUIRE(row.bracket_lo.has_value());
        REQUIRE(row.bracket_hi.has_value());
        CHECK(*row.bracket_hi < *row.t_upper);
        CHECK(*row.t_lower < *row.bracket_lo);

        REQUIRE(row.cos_theta_T.has_value());
        min_cos_t = std::min(min_cos_t, *row.cos_theta_T);
        max_cos_t = std::max(max_cos_t, *row.cos_theta_T);
        if (row.theta == 0.0)
            CHECK(!row.t_over_log.has_value());
        else
            CHECK(row.t_over_log.has_value());
    }
    // The scaling diagnostic stays within one order of magnitude.
    CHECK(max_cos_t / min_cos_t < 10.0);

    // Blowup takes longer as the rotation strengthens on this data.
    CHECK(*table.rows.back().t_estimate > *table.rows.front().t_estimate);

    std::ostringstream csv;
    write_csv(table, csv);
    const std::string text = csv.str();
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "theta,cos_theta,outcome,bracket_lo,bracket_hi,t_estimate,t_upper,t_lower,"
          "cos_theta_T,T_over_log");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 8);
    CHECK(text.find("nan") != std::string::npos); // T_over_log at theta = 0

    // No measurement contradicts a certificate anywhere in the sweep.
    const auto rec = load_record(c);
    REQUIRE(rec.has_value());
    const ReportFiles files = report({*rec}, out / "report");
    CHECK(files.violation_count == 0);
}

TEST_CASE("strong damping certifies the tail of the sweep global before any solve") {
    const fs::path out = fresh_dir("damped");
    ExperimentConfig c;
    c.name = "damped";
    c.out_dir = out;
    c.criteria = {"global_lower_bound"};
    c.thetas = {0.0, 0.3, 0.6, 0.9, 1.1, 1.3, 1.45, 1.52};
    c.data.amplitude = 0.8;
    c.grid = {GridKind::radial, 1, 10.0, 401};
    c.controls.t_budget = 0.8;

    // Choose gamma so the global branch cos(theta) <= -gamma/B splits the
    // grid between 0.9 and 1.1.
    const FieldState u0 = build_initial_state(c, {0, 2.0, 0.0, 0.0});
    const double A = gn_constant(2.0, 1);
    const double B = A * std::pow(std::sqrt(mass_of(u0)), 4.0);
    c.gammas = {-B * std::cos(1.0)};
    c.validate();

    const SweepTable table = theta_sweep(c, 2);
    REQUIRE(table.rows.size() == 8);

    const auto rec = load_record(c);
    REQUIRE(rec.has_value());
    int globals = 0;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const SweepRow& row = table.rows[i];
        CAPTURE(row.theta);
        if (row.theta >= 1.0) {
            CHECK(row.outcome == CellOutcome::global);
            // Marked by the certificate alone: the solver never started.
            CHECK(rec->cells[i].stop_reason == StopReason::none);
            CHECK(rec->cells[i].final_time == 0.0);
            ++globals;
        } else {
            CHECK(row.outcome == CellOutcome::undecided);
            CHECK(rec->cells[i].stop_reason == StopReason::budget_reached);
            REQUIRE(row.t_lower.has_value());
            CHECK(*row.t_lower > 0.0);
        }
    }
    CHECK(globals == 4);
}

TEST_CASE("runs are deterministic and independent of the worker count") {
    const fs::path out1 = fresh_dir("jobs1");
    const fs::path out4 = fresh_dir("jobs4");
    ExperimentConfig c;
    c.criteria = {"blowup_upper_bound", "global_lower_bound", "kaplan", "mass_growth"};
    c.thetas = {0.0, 0.45, 0.9, 1.2};
    c.data.amplitude = 2.0;
    c.grid = {GridKind::radial, 1, 10.0, 401};
    c.controls.t_budget = 6.0;
    c.controls.boundary_leak_tol = 1e-6;

    c.out_dir = out1;
    const ExperimentRecord rec1 = run_experiment(c, 1);
    const ReportFiles rep1 = report({rec1}, out1 / "report");

    c.out_dir = out4;
    const ExperimentRecord rec4 = run_experiment(c, 4);
    const ReportFiles rep4 = report({rec4}, out4 / "report");

    CHECK(rec1.hash == rec4.hash); // out_dir is not part of the identity
    CHECK(lines_without_last_column(read_file(rep1.summary)) ==
          lines_without_last_column(read_file(rep4.summary)));
    CHECK(read_file(rep1.long_form) == read_file(rep4.long_form));
    CHECK(read_file(rep1.violations) == read_file(rep4.violations));
}

TEST_CASE("a failing cell is recorded with its reason and does not sink the record") {
    const fs::path out = fresh_dir("skip");
    ExperimentConfig c;
    c.out_dir = out;
    c.criteria = {"potential_well"};
    c.alphas = {4.0};
    c.gammas = {-1.0};
    c.grid = {GridKind::radial, 3, 10.0, 201};
    c.controls.t_budget = 0.05;
    c.validate();

    // (dim - 2) alpha = 4 has no ground state, so the cell's potential-well
    // lookup throws; the lab must turn that into a skip, not a crash.
    const ExperimentRecord rec = run_experiment(c, 1);
    REQUIRE(rec.cells.size() == 1);
    CHECK(rec.cells[0].outcome == CellOutcome::skipped);
    CHECK(!rec.cells[0].skip_reason.empty());
    CHECK(rec.skipped_cells() == 1);

    const ReportFiles files = report({rec}, out / "report");
    CHECK(files.skipped_cells == 1);
    CHECK(files.violation_count == 0);
    const auto summary = lines_without_last_column(read_file(files.summary));
    REQUIRE(summary.size() == 2);
    CHECK(summary[1].find("skipped") != std::string::npos);
    CHECK(summary[1].find("find_ground_state") != std::string::npos);
}

TEST_CASE("sweep rejects configs that vary more than theta") {
    ExperimentConfig c;
    c.alphas = {1.0, 2.0};
    CHECK_THROWS_AS(theta_sweep(c, 1), std::invalid_argument);
}
