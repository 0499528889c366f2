// Command line front end of the lab library.
//
//   evolve       run the cell grid of a config, persisting per-cell records
//   criteria     data-level verdicts as JSON lines, no time integration
//   groundstate  construct a stationary profile, export CSV and JSON
//   ckn          audit the truncated variance weight and its error budget
//   sweep        theta scaling table (sweep.csv)
//   report       fold finished experiments into summary/long/violations CSVs
//
// Exit codes: 0 clean, 2 unusable input (flags, config, file system),
// 3 finished but at least one cell was skipped, 4 a checked bound failed.

#include "glab/config.hpp"
#include "glab/criteria.hpp"
#include "glab/cutoff.hpp"
#include "glab/experiment.hpp"
#include "glab/field.hpp"
#include "glab/groundstate.hpp"
#include "glab/variance.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace glab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSkipped = 3;
constexpr int kExitViolation = 4;

// Same convention as the persisted records: JSON has no infinities, so they
// travel as the strings "inf" / "-inf" and NaN as null.
json num_json(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    return v;
}

json opt_json(const std::optional<double>& v) { return v ? num_json(*v) : json(nullptr); }

json verdict_json(const CriterionVerdict& v) {
    json details = json::object();
    for (const auto& [key, value] : v.details) details[key] = num_json(value);
    return json{{"name", v.name},
                {"applicable", v.applicable},
                {"prediction", to_string(v.prediction)},
                {"t_upper", opt_json(v.t_upper)},
                {"t_lower", opt_json(v.t_lower)},
                {"details", details},
                {"note", v.note}};
}

struct CommonFlags {
    std::string config_path;
    std::string out_override;
    int jobs = 1;
    long cell = -1;                    // -1 = every cell
    std::optional<unsigned> seed;      // overrides the config when set
};

ExperimentConfig load_overridden(const CommonFlags& f) {
    ExperimentConfig c = load_config(f.config_path);
    if (!f.out_override.empty()) c.out_dir = f.out_override;
    if (f.seed) c.seed = *f.seed;
    c.validate();
    return c;
}

std::vector<CellSettings> selected_cells(const ExperimentConfig& c, long cell) {
    std::vector<CellSettings> cells = expand_cells(c);
    if (cell < 0) return cells;
    if (cell >= static_cast<long>(cells.size()))
        throw std::invalid_argument("--cell " + std::to_string(cell) + " out of range, config has " +
                                    std::to_string(cells.size()) + " cells");
    return {cells[static_cast<size_t>(cell)]};
}

void print_cell_line(const CellResult& r) {
    std::printf("cell %3d  alpha=%-4g gamma=%-6g theta=%-7g  %-9s", r.cell.index, r.cell.alpha,
                r.cell.gamma, r.cell.theta, to_string(r.outcome));
    switch (r.outcome) {
    case CellOutcome::blowup:
        if (r.blowup.t_estimate)
            std::printf("  T~%-10.6g in [%.6g, %.6g]", *r.blowup.t_estimate, r.blowup.t_bracket.first,
                        r.blowup.t_bracket.second);
        std::printf("  stop=%s", to_string(r.stop_reason));
        break;
    case CellOutcome::global: {
        auto cert = std::find_if(r.verdicts.begin(), r.verdicts.end(), [](const CriterionVerdict& v) {
            return v.prediction == Prediction::global;
        });
        std::printf("  certified by %s, no run", cert != r.verdicts.end() ? cert->name.c_str() : "?");
        break;
    }
    case CellOutcome::undecided:
        std::printf("  reached t=%-10.6g sup=%-10.6g stop=%s", r.final_time, r.sup_final,
                    to_string(r.stop_reason));
        break;
    case CellOutcome::skipped:
        std::printf("  %s", r.skip_reason.c_str());
        break;
    }
    if (r.loaded) std::printf("  [cached]");
    std::printf("\n");
}

int tally_exit(const std::vector<CellResult>& cells) {
    int by_outcome[4] = {0, 0, 0, 0};
    for (const auto& r : cells) ++by_outcome[static_cast<int>(r.outcome)];
    std::printf("%zu cells: %d blowup, %d global, %d undecided, %d skipped\n", cells.size(),
                by_outcome[0], by_outcome[1], by_outcome[2], by_outcome[3]);
    return by_outcome[3] > 0 ? kExitSkipped : kExitOk;
}

int cmd_evolve(const CommonFlags& f) {
    ExperimentConfig c = load_overridden(f);
    if (f.cell >= 0) {
        // Single-cell debug path: run in-process, print the verdicts too,
        // leave the persisted record alone.
        const CellSettings cell = selected_cells(c, f.cell).front();
        const CellResult r = run_cell(c, cell);
        print_cell_line(r);
        for (const auto& v : r.verdicts) std::printf("%s\n", verdict_json(v).dump().c_str());
        return r.outcome == CellOutcome::skipped ? kExitSkipped : kExitOk;
    }
    const ExperimentRecord rec = run_experiment(c, f.jobs);
    for (const auto& r : rec.cells) print_cell_line(r);
    const int code = tally_exit(rec.cells);
    std::printf("record: %s\n", (c.out_dir / rec.hash / "record.json").string().c_str());
    return code;
}

int cmd_criteria(const CommonFlags& f) {
    ExperimentConfig c = load_overridden(f);
    bool failed = false;
    for (const CellSettings& cell : selected_cells(c, f.cell)) {
        json base{{"cell", cell.index},
                  {"alpha", cell.alpha},
                  {"gamma", cell.gamma},
                  {"theta", cell.theta}};
        try {
            for (const CriterionVerdict& v : evaluate_criteria(c, cell)) {
                json line = verdict_json(v);
                line.update(base);
                std::printf("%s\n", line.dump().c_str());
            }
        } catch (const std::exception& e) {
            json line = base;
            line["error"] = e.what();
            std::printf("%s\n", line.dump().c_str());
            failed = true;
        }
    }
    return failed ? kExitSkipped : kExitOk;
}

int cmd_groundstate(double alpha, double gamma, int dim, double tol, int grid_n,
                    const std::string& out_dir) {
    const GroundState q = find_ground_state(gamma, alpha, dim, tol, grid_n);
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);

    const fs::path csv = dir / "groundstate_profile.csv";
    {
        std::ofstream os(csv);
        if (!os) throw std::runtime_error("cannot write " + csv.string());
        os << "r,Q\n";
        char row[64];
        for (size_t i = 0; i < q.profile.grid->nodes.size(); ++i) {
            std::snprintf(row, sizeof row, "%.17g,%.17g\n", q.profile.grid->nodes[i],
                          q.profile.values[i].real());
            os << row;
        }
    }

    const fs::path meta = dir / "groundstate.json";
    {
        json j{{"alpha", q.alpha},
               {"gamma", q.gamma},
               {"dim", q.dim},
               {"eta0", q.eta0},
               {"well_depth", q.well_depth},
               {"nehari_residual", q.nehari_residual},
               {"grid_n", static_cast<int>(q.profile.grid->n)},
               {"extent", q.profile.grid->extent}};
        std::ofstream os(meta);
        if (!os) throw std::runtime_error("cannot write " + meta.string());
        os << j.dump(2) << "\n";
    }

    std::printf("alpha=%g gamma=%g dim=%d: eta0=%.12g  well_depth=%.12g  nehari_residual=%.3g\n",
                q.alpha, q.gamma, q.dim, q.eta0, q.well_depth, q.nehari_residual);
    std::printf("profile: %s (%d nodes, extent %g)\nmetadata: %s\n", csv.string().c_str(),
                q.profile.grid->n, q.profile.grid->extent, meta.string().c_str());
    return kExitOk;
}

// One random radial field for the estimate corpus: a ring parked near the
// weight's shoulder (where the estimate is tight), optionally mixed with a
// gaussian and a quadratic chirp, rescaled to an L2 norm below the mass
// cap. Plain wide rings drive the lhs closest to the budget; the mixtures
// and chirps exercise the gradient term.
FieldState corpus_field(std::shared_ptr<const Grid> g, std::mt19937& rng, double eps) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double shoulder = 1.0 / eps;
    FieldState u = sample_ring(g, 0.2 + 2.0 * unit(rng), shoulder * (0.6 + 0.8 * unit(rng)),
                               0.2 + 1.5 * unit(rng));
    if (unit(rng) < 0.5) {
        const FieldState bump =
            sample_gaussian(g, 0.2 + 2.0 * unit(rng), 0.3 + 2.0 * unit(rng));
        for (size_t i = 0; i < u.values.size(); ++i) u.values[i] += bump.values[i];
    }
    if (unit(rng) < 0.5) {
        const double chirp = 2.0 * unit(rng) - 1.0;
        for (size_t i = 0; i < u.values.size(); ++i) {
            const double r = g->nodes[i];
            u.values[i] *= std::exp(std::complex<double>(0.0, chirp * r * r));
        }
    }
    const double target = 0.1 + 2.8 * unit(rng);
    const double norm = std::sqrt(mass_of(u));
    if (norm > 0.0)
        for (auto& v : u.values) v *= target / norm;
    return u;
}

int cmd_ckn(int samples, unsigned seed) {
    bool ok = true;
    const double tol = 1e-8;

    // Invariants of the weight family: quadratic core, flat plateau, the
    // curvature defect identity, the Laplacian ceiling and monotonicity.
    std::printf("== weight invariants (worst defect over a dense radial scan) ==\n");
    std::printf("%4s %6s %12s %12s %12s %12s %12s\n", "dim", "eps", "core", "plateau", "curvature",
                "lap_ceil", "monotone");
    for (const int dim : {2, 3}) {
        for (const double eps : {0.5, 0.1, 0.02}) {
            const CutoffFamily fam(eps, dim);
            const double top = fam.plateau() / (eps * eps);
            double core = 0.0, plateau = 0.0, curvature = 0.0, lap_ceil = 0.0, monotone = 0.0;
            const double r_max = 3.0 / eps;
            const int steps = 6000;
            for (int i = 0; i <= steps; ++i) {
                const double r = r_max * i / steps;
                const double t = eps * eps * r * r;
                if (t < 1.0 - 1e-9) {
                    core = std::max({core, std::abs(fam.psi(r) - r * r),
                                     std::abs(fam.psi_rr(r) - 2.0), std::abs(fam.bilap_psi(r))});
                }
                if (t >= 2.0) {
                    plateau = std::max({plateau, std::abs(fam.psi(r) - top), std::abs(fam.psi_r(r)),
                                        std::abs(fam.lap_psi(r))});
                }
                const double g = fam.gamma_eps(r);
                curvature = std::max(curvature, std::abs((2.0 - fam.psi_rr(r)) - g * g));
                lap_ceil = std::max(lap_ceil, fam.lap_psi(r) - 2.0 * dim);
                monotone = std::max(monotone, -fam.psi_r(r));
            }
            std::printf("%4d %6.2f %12.3e %12.3e %12.3e %12.3e %12.3e\n", dim, eps, core, plateau,
                        curvature, lap_ceil, monotone);
            ok = ok && core < tol && plateau < tol && curvature < tol && lap_ceil < tol &&
                 monotone < tol;
        }
    }

    // The localised estimate itself on a random corpus, with mu gated the
    // way callers must gate it.
    std::printf("\n== localised estimate, %d random fields (seed %u) ==\n", samples, seed);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double mass_cap = 3.0;
    int violations = 0;
    double worst_ratio = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const int dim = 2 + static_cast<int>(rng() % 2);
        const double eps = 0.12 + 0.38 * unit(rng);
        const double alpha = 0.5 + 3.5 * unit(rng);
        const auto grid = make_grid(GridKind::radial, dim, 12.0, 1201);
        const CutoffFamily fam(eps, dim);
        const double gate =
            alpha < 4.0 ? 1.0 / (kCknConst * std::pow(eps, 2.0 * (dim - 1))) : 1.0;
        const double mu = gate * 0.999 * std::max(unit(rng), 1e-3);
        const FieldState u = corpus_field(grid, rng, eps);
        const CknCheck chk = ckn_check(u, fam, mu, alpha, mass_cap);
        if (!chk.holds) ++violations;
        if (chk.kappa > 0.0) worst_ratio = std::max(worst_ratio, chk.lhs / chk.kappa);
    }
    std::printf("violations: %d / %d   worst lhs/kappa: %.4f\n", violations, samples, worst_ratio);
    ok = ok && violations == 0;

    // Budget decay along the coupled scaling eps = a mu^{-lambda}. The
    // ratio kappa / mu^{1-delta} must stay bounded (here: nonincreasing).
    const double alpha = 2.0, lambda = 0.375, a = 0.125;
    const int dim = 3;
    const double delta = kappa_decay_exponent(alpha, lambda, dim);
    std::printf("\n== budget decay, alpha=%g dim=%d lambda=%g a=%g (delta=%g) ==\n", alpha, dim,
                lambda, a, delta);
    std::printf("%10s %12s %14s %18s\n", "mu", "eps", "kappa", "kappa/mu^(1-d)");
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (const double mu : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
        const double eps = a * std::pow(mu, -lambda);
        const double k = kappa(mu, eps, alpha, dim, kCknConst);
        const double ratio = k / std::pow(mu, 1.0 - delta);
        std::printf("%10g %12.5g %14.6g %18.6g\n", mu, eps, k, ratio);
        if (ratio > prev_ratio * (1.0 + 1e-9)) ok = false;
        prev_ratio = ratio;
    }

    std::printf("\n%s\n", ok ? "PASS" : "FAIL");
    return ok ? kExitOk : kExitViolation;
}

int cmd_sweep(const CommonFlags& f) {
    ExperimentConfig c = load_overridden(f);
    const SweepTable t = theta_sweep(c, f.jobs);

    const fs::path dir = c.out_dir / t.hash;
    fs::create_directories(dir);
    const fs::path csv = dir / "sweep.csv";
    {
        std::ofstream os(csv);
        if (!os) throw std::runtime_error("cannot write " + csv.string());
        write_csv(t, os);
    }
    std::ostringstream table;
    write_csv(t, table);
    std::fputs(table.str().c_str(), stdout);
    std::printf("sweep table: %s\n", csv.string().c_str());

    const bool any_skipped = std::any_of(t.rows.begin(), t.rows.end(), [](const SweepRow& r) {
        return r.outcome == CellOutcome::skipped;
    });
    return any_skipped ? kExitSkipped : kExitOk;
}

int cmd_report(const std::vector<std::string>& config_paths, const std::string& out, int jobs) {
    std::vector<ExperimentRecord> records;
    records.reserve(config_paths.size());
    for (const std::string& path : config_paths) {
        ExperimentConfig c = load_config(path);
        c.validate();
        // run_experiment is a no-op on fully persisted configs, so this
        // loads finished experiments and finishes partial ones.
        records.push_back(run_experiment(c, jobs));
    }
    const fs::path dir = out.empty() ? records.front().config.out_dir / "report" : fs::path(out);
    const ReportFiles files = report(records, dir);
    std::printf("summary:    %s\nlong form:  %s\nviolations: %s\n", files.summary.string().c_str(),
                files.long_form.string().c_str(), files.violations.string().c_str());
    std::printf("%d bound violations, %d skipped cells\n", files.violation_count,
                files.skipped_cells);
    if (files.violation_count > 0) return kExitViolation;
    return files.skipped_cells > 0 ? kExitSkipped : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parameter lab for complex Ginzburg-Landau dynamics"};
    app.require_subcommand(1);

    CommonFlags flags;
    unsigned seed_value = 0;

    auto add_common = [&](CLI::App* sub, bool with_cell) {
        sub->add_option("--config", flags.config_path, "experiment config (flat text or JSON)")
            ->required();
        sub->add_option("--out", flags.out_override, "override the config's output directory");
        sub->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::Range(1, 64));
        sub->add_option("--seed", seed_value, "override the config's seed")
            ->each([&](const std::string&) { flags.seed = seed_value; });
        if (with_cell) sub->add_option("--cell", flags.cell, "restrict to one cell index");
    };

    CLI::App* evolve = app.add_subcommand(
        "evolve", "run the config's cells under threshold escalation, persisting records");
    add_common(evolve, true);

    CLI::App* criteria = app.add_subcommand(
        "criteria", "evaluate the analytic criteria on each cell's data (JSON lines, no run)");
    add_common(criteria, true);

    CLI::App* groundstate =
        app.add_subcommand("groundstate", "construct a stationary profile by shooting");
    double gs_alpha = 2.0, gs_gamma = -1.0, gs_tol = 1e-10;
    int gs_dim = 1, gs_grid_n = 0;
    std::string gs_out = ".";
    groundstate->add_option("--alpha", gs_alpha, "nonlinearity exponent");
    groundstate->add_option("--gamma", gs_gamma, "shift (must be negative)");
    groundstate->add_option("--dim", gs_dim, "spatial dimension");
    groundstate->add_option("--tol", gs_tol, "bisection tolerance on eta0");
    groundstate->add_option("--grid-n", gs_grid_n, "profile nodes (0 = automatic)");
    groundstate->add_option("--out", gs_out, "output directory");

    CLI::App* ckn = app.add_subcommand(
        "ckn", "audit the truncated variance weight, the localised estimate and its budget");
    int ckn_samples = 200;
    unsigned ckn_seed = 1u;
    ckn->add_option("--samples", ckn_samples, "corpus size")->check(CLI::PositiveNumber);
    ckn->add_option("--seed", ckn_seed, "corpus RNG seed");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "theta scaling table of a single-alpha, single-gamma config");
    add_common(sweep, false);

    CLI::App* rep = app.add_subcommand("report", "aggregate experiments into CSV reports");
    std::vector<std::string> rep_configs;
    std::string rep_out;
    int rep_jobs = 1;
    rep->add_option("--config", rep_configs, "experiment configs (repeatable)")->required();
    rep->add_option("--out", rep_out, "report directory (default: first config's out/report)");
    rep->add_option("--jobs", rep_jobs, "worker threads")->check(CLI::Range(1, 64));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (evolve->parsed()) return cmd_evolve(flags);
        if (criteria->parsed()) return cmd_criteria(flags);
        if (groundstate->parsed())
            return cmd_groundstate(gs_alpha, gs_gamma, gs_dim, gs_tol, gs_grid_n, gs_out);
        if (ckn->parsed()) return cmd_ckn(ckn_samples, ckn_seed);
        if (sweep->parsed()) return cmd_sweep(flags);
        if (rep->parsed()) return cmd_report(rep_configs, rep_out, rep_jobs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
