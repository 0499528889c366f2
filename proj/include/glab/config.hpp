#pragma once

#include "glab/equation.hpp"
#include "glab/evolve.hpp"
#include "glab/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace glab {

/// Closed-form initial-data families the lab builds on its own. `chirp`
/// multiplies the profile by exp(i chirp |x|^2); that is how sweeps produce
/// data with nonzero momentum. The ground_state family interpolates the
/// gamma = -1 stationary profile of the cell's alpha onto the run grid and
/// scales it by `amplitude`, so (1 + eps) Q data is amplitude = 1 + eps.
struct InitialData {
    enum class Family { gaussian, ring, ground_state };
    Family family = Family::gaussian;
    double amplitude = 1.0;
    double sigma = 1.0; // gaussian / ring width
    double r0 = 0.0;    // ring radius
    double chirp = 0.0;
};

const char* to_string(InitialData::Family f);

/// Grid requested by a config; realised through make_grid when cells run.
struct GridSpec {
    GridKind kind = GridKind::radial;
    int dim = 1;
    double extent = 12.0;
    int n = 1201;
};

/// Threshold escalation for blowup-time extrapolation: the solver stops at
/// M0 * 2^(levels-1) with M0 = m0_factor * ||u0||_inf, and every level in
/// between is recorded as a hitting time.
struct Escalation {
    double m0_factor = 10.0;
    int levels = 5;
};

/// Everything needed to reproduce an experiment: the cell grid (outer
/// product alphas x gammas x thetas), one initial-data family, one spatial
/// grid, run controls, threshold escalation and the criteria to evaluate
/// per cell.
///
/// `criteria` lists any of kaplan, smallness_global, blowup_upper_bound,
/// potential_well, global_lower_bound, nls_variance, mass_growth; an empty
/// list enables all of them. The list is kept sorted and deduplicated.
/// `name` and `out_dir` only steer persistence and are excluded from the
/// identity hash; everything else, including `seed`, is part of it.
struct ExperimentConfig {
    std::string name = "experiment";
    std::filesystem::path out_dir = "out";
    unsigned seed = 1;
    std::vector<std::string> criteria;

    EquationVariant variant = EquationVariant::GL;
    std::vector<double> alphas{2.0};
    std::vector<double> gammas{0.0};
    std::vector<double> thetas{0.0};

    InitialData data;
    GridSpec grid;
    RunControls controls;
    Escalation escalation;

    size_t cell_count() const { return alphas.size() * gammas.size() * thetas.size(); }

    /// Throws std::invalid_argument on empty parameter lists, thetas outside
    /// [0, pi/2], non-positive alphas, GL2 cells with gamma != 0, unknown
    /// criterion names, or degenerate grid / data / run parameters.
    void validate() const;
};

/// Canonical flat rendering: sections and keys in a fixed order, doubles
/// printed with %.17g. parse_config_text(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& c);

/// FNV-1a (64-bit) over the canonical rendering minus the name and
/// output-directory keys, as 16 hex digits. Two configs share a hash
/// exactly when they describe the same computation.
std::string config_hash(const ExperimentConfig& c);

/// Flat key = value format with [section] headers; # starts a comment.
/// Sections: experiment, equation, data, grid, run. Every key is optional
/// and defaults to the value in ExperimentConfig{}; list-valued keys take
/// comma-separated entries. Unknown sections or keys throw
/// std::invalid_argument naming the offender, as do unparsable values and
/// duplicate keys. The result has been validate()d.
ExperimentConfig parse_config_text(const std::string& text);

/// The same schema as a JSON object of section objects,
/// {"equation": {"alpha": [2], ...}, ...}. List-valued keys accept a
/// scalar or an array. Parses to the identical config (and hash) as the
/// flat encoding of the same content.
ExperimentConfig parse_config_json(const std::string& text);

/// Reads a config file, dispatching on the first non-whitespace byte
/// ('{' means JSON). Throws std::runtime_error when the file cannot be
/// read.
ExperimentConfig load_config(const std::filesystem::path& file);

} // namespace glab
