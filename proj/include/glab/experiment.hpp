#pragma once

#include "glab/config.hpp"
#include "glab/criteria.hpp"
#include "glab/evolve.hpp"

#include <iosfwd>
#include <optional>
#include <utility>

namespace glab {

/// One point of the alphas x gammas x thetas product, in row-major order
/// (alpha slowest, theta fastest).
struct CellSettings {
    int index = 0;
    double alpha = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
};

std::vector<CellSettings> expand_cells(const ExperimentConfig& c);

/// Equation parameters of one cell. The forcing is always f = 1; frames
/// with factored-out growth are produced by the solver's own transforms.
EquationParams cell_params(const ExperimentConfig& c, const CellSettings& cell);

/// Initial state of one cell. Only the ground_state family depends on the
/// cell (through alpha); the closed-form families are shared by all cells.
FieldState build_initial_state(const ExperimentConfig& c, const CellSettings& cell);

/// How a cell ended. `global` means a criterion certified global existence
/// and no run happened; `blowup` means the escalation run produced a
/// contracting hitting-time fit; `undecided` is a first-class outcome for
/// budget- or guard-limited runs that certified nothing; `skipped` records
/// a per-cell failure, with the reason.
enum class CellOutcome { blowup, global, undecided, skipped };
const char* to_string(CellOutcome o);

struct CellResult {
    CellSettings cell;
    CellOutcome outcome = CellOutcome::skipped;
    std::string skip_reason; // nonempty exactly when outcome == skipped
    std::vector<CriterionVerdict> verdicts;
    BlowupVerdict blowup;                      // meaningful after a run
    StopReason stop_reason = StopReason::none; // none when no run happened
    double sup0 = 0.0;
    double sup_final = 0.0;
    double final_time = 0.0; // latest time the run demonstrably reached
    std::optional<double> mass_growth_bound;
    double max_mass_residual = 0.0;
    double max_energy_residual = 0.0;
    double wall_seconds = 0.0; // excluded from every determinism guarantee
    bool loaded = false;       // deserialised from disk, not computed
};

struct ExperimentRecord {
    std::string hash;
    ExperimentConfig config;
    std::vector<CellResult> cells; // in cell-index order
    int skipped_cells() const;
};

/// Just the criteria stage of a cell: verdicts on the initial data, no
/// solver run. Unlike run_cell this propagates exceptions.
std::vector<CriterionVerdict> evaluate_criteria(const ExperimentConfig& c,
                                                const CellSettings& cell);

/// Evaluate the enabled criteria on the cell's data and, unless a global
/// certificate was found, run the solver under threshold escalation and
/// extrapolate the blowup time. Exceptions inside the cell are caught and
/// reported as outcome == skipped.
CellResult run_cell(const ExperimentConfig& c, const CellSettings& cell);

/// Run every cell in a pool of `jobs` workers. Each finished cell is
/// persisted atomically (write-then-rename) under out_dir/<hash>/; cells
/// already on disk are loaded instead of recomputed, making reruns of a
/// completed config no-ops. The record is assembled single-threaded in
/// index order, so the result does not depend on `jobs`. I/O failures
/// throw std::runtime_error; per-cell failures do not.
ExperimentRecord run_experiment(const ExperimentConfig& c, int jobs = 1);

/// Reload a fully persisted record without computing anything. Empty when
/// the record file is missing, its hash disagrees, or any cell fails to
/// parse.
std::optional<ExperimentRecord> load_record(const ExperimentConfig& c);

/// One theta cell folded into scaling diagnostics. The measured columns
/// are empty unless the cell blew up; T_over_log is additionally empty at
/// theta = 0 where log(1/cos theta) vanishes.
struct SweepRow {
    double theta = 0.0;
    double cos_theta = 1.0;
    CellOutcome outcome = CellOutcome::undecided;
    std::optional<double> bracket_lo;
    std::optional<double> bracket_hi;
    std::optional<double> t_estimate;
    std::optional<double> t_upper; // blowup_upper_bound certificate
    std::optional<double> t_lower; // finite global_lower_bound value
    std::optional<double> cos_theta_T; // cos(theta) * t_estimate
    std::optional<double> t_over_log;  // t_estimate / log(1/cos theta)
};

struct SweepTable {
    std::string hash;
    double alpha = 0.0;
    double gamma = 0.0;
    std::vector<SweepRow> rows; // one per theta, in config order
};

/// Runs (or reloads) the experiment and tabulates how the measured blowup
/// time trades against cos theta. Requires a single-alpha single-gamma
/// config; throws std::invalid_argument otherwise.
SweepTable theta_sweep(const ExperimentConfig& c, int jobs = 1);

void write_csv(const SweepTable& t, std::ostream& os);

struct ReportFiles {
    std::filesystem::path summary;
    std::filesystem::path long_form;
    std::filesystem::path violations;
    int violation_count = 0;
    int skipped_cells = 0;
};

/// Emits summary.csv (one row per cell, every criterion bound next to the
/// measured bracket, wall_seconds in the last column), violations.csv and
/// long.csv (cell keys plus name/value pairs, for plotting) under `dir`.
/// Violation detection is plain table arithmetic: a run that demonstrably
/// exists past a certified upper bound, a blowup bracket entirely below a
/// certified existence time, or an observed blowup in a cell holding a
/// global certificate. Requires at least one record.
ReportFiles report(const std::vector<ExperimentRecord>& records,
                   const std::filesystem::path& dir);

} // namespace glab
