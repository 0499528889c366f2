#include "glab/experiment.hpp"

#include "glab/field.hpp"
#include "glab/groundstate.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace glab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Relative slack for the violation arithmetic: measured times and analytic
/// bounds are both clean, so anything past this is a genuine contradiction.
constexpr double kViolationSlack = 1e-6;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

/// Commas and newlines would break the CSV row; reasons are free-form text.
std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

/// Ground states and interpolation constants are pure functions of
/// (alpha, dim) and expensive enough to share across cells. std::map keeps
/// references stable while other workers insert.
struct Caches {
    std::mutex m;
    std::map<std::pair<double, int>, GroundState> ground_;
    std::map<std::pair<double, int>, double> gn_;

    const GroundState& ground(double alpha, int dim) {
        std::lock_guard<std::mutex> lock(m);
        const auto key = std::make_pair(alpha, dim);
        auto it = ground_.find(key);
        if (it == ground_.end()) it = ground_.emplace(key, find_ground_state(-1.0, alpha, dim)).first;
        return it->second;
    }

    double gn(double alpha, int dim) {
        std::lock_guard<std::mutex> lock(m);
        const auto key = std::make_pair(alpha, dim);
        auto it = gn_.find(key);
        if (it == gn_.end()) it = gn_.emplace(key, gn_constant(alpha, dim)).first;
        return it->second;
    }
};

FieldState build_initial(const ExperimentConfig& c, const CellSettings& cell, Caches* caches) {
    auto grid = make_grid(c.grid.kind, c.grid.dim, c.grid.extent, c.grid.n);
    FieldState u;
    switch (c.data.family) {
        case InitialData::Family::gaussian:
            u = sample_gaussian(grid, c.data.amplitude, c.data.sigma);
            break;
        case InitialData::Family::ring:
            u = sample_ring(grid, c.data.amplitude, c.data.r0, c.data.sigma);
            break;
        case InitialData::Family::ground_state: {
            const GroundState& q = caches ? caches->ground(cell.alpha, c.grid.dim)
                                          : find_ground_state(-1.0, cell.alpha, c.grid.dim);
            u = sample_scaled_profile(grid, q.profile, c.data.amplitude);
            break;
        }
    }
    if (c.data.chirp != 0.0) {
        for (int i = 0; i < grid->n; ++i) {
            const double x = grid->nodes[static_cast<size_t>(i)];
            u.values[static_cast<size_t>(i)] *=
                std::exp(std::complex<double>(0.0, c.data.chirp * x * x));
        }
    }
    return u;
}

bool criterion_enabled(const ExperimentConfig& c, const char* name) {
    return c.criteria.empty() ||
           std::find(c.criteria.begin(), c.criteria.end(), name) != c.criteria.end();
}

std::vector<CriterionVerdict> criteria_verdicts(const ExperimentConfig& c,
                                                const CellSettings& cell,
                                                const EquationParams& p,
                                                const FieldState& u0, Caches& caches) {
    std::vector<CriterionVerdict> verdicts;

    // The lab only tries kaplan where its comparison argument lives: the
    // real heat flow at theta = 0. The weight scale trades the damping
    // -lambda^2 against localisation, so a small sweep picks the best
    // applicable bound.
    if (criterion_enabled(c, "kaplan") && cell.theta == 0.0 &&
        p.variant == EquationVariant::GL) {
        std::optional<CriterionVerdict> best;
        for (const double lambda : {0.25, 0.5, 1.0}) {
            CriterionVerdict v = kaplan(u0, cell.gamma, cell.alpha, lambda);
            const bool better = v.applicable && v.t_upper &&
                                (!best || !best->t_upper || *v.t_upper < *best->t_upper);
            if (better || !best) best = std::move(v);
        }
        verdicts.push_back(std::move(*best));
    }
    if (criterion_enabled(c, "smallness_global"))
        verdicts.push_back(smallness_global(u0, p));
    if (criterion_enabled(c, "blowup_upper_bound"))
        verdicts.push_back(blowup_upper_bound(u0, p));
    if (criterion_enabled(c, "potential_well") &&
        (p.variant == EquationVariant::GL2 || cell.gamma < 0.0)) {
        const GroundState& q = caches.ground(cell.alpha, c.grid.dim);
        verdicts.push_back(potential_well_bound(u0, p, q));
    }
    if (criterion_enabled(c, "global_lower_bound") && cell.alpha * c.grid.dim < 4.0) {
        const double A = caches.gn(cell.alpha, c.grid.dim);
        verdicts.push_back(global_lower_bound(u0, p, A));
    }
    if (criterion_enabled(c, "nls_variance") && p.variant == EquationVariant::GL)
        verdicts.push_back(nls_variance_criteria(u0, cell.gamma, cell.alpha));
    return verdicts;
}

CellResult run_cell_impl(const ExperimentConfig& c, const CellSettings& cell, Caches& caches) {
    CellResult r;
    r.cell = cell;
    const auto start = std::chrono::steady_clock::now();
    try {
        EquationParams p = cell_params(c, cell);
        p.validate();
        const FieldState u0 = build_initial(c, cell, &caches);
        r.sup0 = sup_norm(u0);
        r.verdicts = criteria_verdicts(c, cell, p, u0, caches);

        const bool global_cert =
            std::any_of(r.verdicts.begin(), r.verdicts.end(),
                        [](const CriterionVerdict& v) { return v.prediction == Prediction::global; });

        if (global_cert) {
            r.outcome = CellOutcome::global;
        } else if (r.sup0 > 0.0) {
            RunControls rc = c.controls;
            rc.hit_thresholds.clear();
            const double m0 = c.escalation.m0_factor * r.sup0;
            for (int k = 0; k < c.escalation.levels; ++k)
                rc.hit_thresholds.push_back(m0 * std::pow(2.0, k));
            rc.sup_threshold = rc.hit_thresholds.back();
            if (p.variant == EquationVariant::GL2)
                rc.shift_c = -1.0;
            else if (cell.gamma < 0.0 && !p.is_schrodinger_limit())
                rc.shift_c = cell.gamma / p.cos_theta();

            const Trajectory traj = run(u0, p, rc);
            r.stop_reason = traj.stop_reason;
            r.sup_final = sup_norm(traj.final_state);
            r.final_time = traj.reports.empty() ? 0.0 : traj.reports.back().time;
            r.blowup = estimate_blowup_time(traj.threshold_hits);
            if (criterion_enabled(c, "mass_growth"))
                r.mass_growth_bound =
                    blowup_bound_from_mass_growth(traj.reports, cell.alpha, cell.gamma);
            const ResidualReport resid = identity_residuals(traj);
            r.max_mass_residual = resid.max_mass_law;
            r.max_energy_residual = resid.max_energy_law;
            r.outcome = r.blowup.blew_up ? CellOutcome::blowup : CellOutcome::undecided;
        } else {
            // Zero data has nothing to escalate; undecided unless a
            // criterion already certified it global above.
            r.outcome = CellOutcome::undecided;
        }
        r.skip_reason.clear();
    } catch (const std::exception& e) {
        r.outcome = CellOutcome::skipped;
        r.skip_reason = e.what();
        if (r.skip_reason.empty()) r.skip_reason = "unknown failure";
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// ---------------------------------------------------------------------------
// Persistence. JSON cannot hold infinities, which global certificates use
// for t_lower, so they round-trip as the strings "inf" / "-inf".

json num_tag(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    return v;
}

json opt_tag(const std::optional<double>& v) { return v ? num_tag(*v) : json(nullptr); }

std::optional<double> load_opt(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) return j.get<std::string>() == "-inf" ? -kInf : kInf;
    return j.get<double>();
}

double load_num(const json& j) { return load_opt(j).value_or(kNaN); }

json verdict_to_json(const CriterionVerdict& v) {
    json details = json::object();
    for (const auto& [key, value] : v.details) details[key] = num_tag(value);
    return json{{"name", v.name},         {"applicable", v.applicable},
                {"prediction", to_string(v.prediction)}, {"t_upper", opt_tag(v.t_upper)},
                {"t_lower", opt_tag(v.t_lower)},         {"details", details},
                {"note", v.note}};
}

Prediction parse_prediction(const std::string& s) {
    if (s == "blowup") return Prediction::blowup;
    if (s == "global") return Prediction::global;
    return Prediction::none;
}

StopReason parse_stop_reason(const std::string& s) {
    if (s == "budget_reached") return StopReason::budget_reached;
    if (s == "sup_norm_threshold") return StopReason::sup_norm_threshold;
    if (s == "dt_underflow") return StopReason::dt_underflow;
    if (s == "boundary_leak") return StopReason::boundary_leak;
    return StopReason::none;
}

CellOutcome parse_outcome(const std::string& s) {
    if (s == "blowup") return CellOutcome::blowup;
    if (s == "global") return CellOutcome::global;
    if (s == "undecided") return CellOutcome::undecided;
    return CellOutcome::skipped;
}

CriterionVerdict verdict_from_json(const json& j) {
    CriterionVerdict v;
    v.name = j.at("name").get<std::string>();
    v.applicable = j.at("applicable").get<bool>();
    v.prediction = parse_prediction(j.at("prediction").get<std::string>());
    v.t_upper = load_opt(j.at("t_upper"));
    v.t_lower = load_opt(j.at("t_lower"));
    for (const auto& [key, value] : j.at("details").items())
        v.details[key] = load_num(value);
    v.note = j.at("note").get<std::string>();
    return v;
}

json cell_to_json(const CellResult& r) {
    json verdicts = json::array();
    for (const auto& v : r.verdicts) verdicts.push_back(verdict_to_json(v));
    return json{{"index", r.cell.index},
                {"alpha", r.cell.alpha},
                {"gamma", r.cell.gamma},
                {"theta", r.cell.theta},
                {"outcome", to_string(r.outcome)},
                {"skip_reason", r.skip_reason},
                {"stop_reason", to_string(r.stop_reason)},
                {"sup0", num_tag(r.sup0)},
                {"sup_final", num_tag(r.sup_final)},
                {"final_time", num_tag(r.final_time)},
                {"mass_growth_bound", opt_tag(r.mass_growth_bound)},
                {"residual_mass", num_tag(r.max_mass_residual)},
                {"residual_energy", num_tag(r.max_energy_residual)},
                {"blowup",
                 json{{"blew_up", r.blowup.blew_up},
                      {"t_estimate", opt_tag(r.blowup.t_estimate)},
                      {"bracket_lo", num_tag(r.blowup.t_bracket.first)},
                      {"bracket_hi", num_tag(r.blowup.t_bracket.second)},
                      {"fit_rho", num_tag(r.blowup.fit_rho)},
                      {"fit_residual", num_tag(r.blowup.fit_residual)},
                      {"diagnostic", r.blowup.diagnostic}}},
                {"verdicts", verdicts},
                {"wall_seconds", r.wall_seconds}};
}

CellResult cell_from_json(const json& j) {
    CellResult r;
    r.cell.index = j.at("index").get<int>();
    r.cell.alpha = j.at("alpha").get<double>();
    r.cell.gamma = j.at("gamma").get<double>();
    r.cell.theta = j.at("theta").get<double>();
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.skip_reason = j.at("skip_reason").get<std::string>();
    r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
    r.sup0 = load_num(j.at("sup0"));
    r.sup_final = load_num(j.at("sup_final"));
    r.final_time = load_num(j.at("final_time"));
    r.mass_growth_bound = load_opt(j.at("mass_growth_bound"));
    r.max_mass_residual = load_num(j.at("residual_mass"));
    r.max_energy_residual = load_num(j.at("residual_energy"));
    const json& b = j.at("blowup");
    r.blowup.blew_up = b.at("blew_up").get<bool>();
    r.blowup.t_estimate = load_opt(b.at("t_estimate"));
    r.blowup.t_bracket = {load_num(b.at("bracket_lo")), load_num(b.at("bracket_hi"))};
    r.blowup.fit_rho = load_num(b.at("fit_rho"));
    r.blowup.fit_residual = load_num(b.at("fit_residual"));
    r.blowup.diagnostic = b.at("diagnostic").get<std::string>();
    for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from_json(v));
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.loaded = true;
    return r;
}

std::string cell_filename(size_t index) { return "cell_" + std::to_string(index) + ".json"; }

void write_file_atomic(const fs::path& path, const std::string& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << body;
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

const CriterionVerdict* find_verdict(const CellResult& r, const char* name) {
    for (const auto& v : r.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

std::optional<double> verdict_upper(const CellResult& r, const char* name) {
    const CriterionVerdict* v = find_verdict(r, name);
    if (v && v->applicable && v->t_upper) return *v->t_upper;
    return std::nullopt;
}

std::optional<double> verdict_finite_lower(const CellResult& r, const char* name) {
    const CriterionVerdict* v = find_verdict(r, name);
    if (v && v->applicable && v->t_lower && std::isfinite(*v->t_lower)) return *v->t_lower;
    return std::nullopt;
}

/// 1/0 when the named verdict was evaluated, empty column otherwise.
std::string verdict_global_flag(const CellResult& r, const char* name) {
    const CriterionVerdict* v = find_verdict(r, name);
    if (!v) return "nan";
    return v->prediction == Prediction::global ? "1" : "0";
}

bool holds_global_certificate(const CellResult& r) {
    return std::any_of(r.verdicts.begin(), r.verdicts.end(), [](const CriterionVerdict& v) {
        return v.prediction == Prediction::global;
    });
}

} // namespace

const char* to_string(CellOutcome o) {
    switch (o) {
        case CellOutcome::blowup: return "blowup";
        case CellOutcome::global: return "global";
        case CellOutcome::undecided: return "undecided";
        case CellOutcome::skipped: return "skipped";
    }
    return "?";
}

std::vector<CellSettings> expand_cells(const ExperimentConfig& c) {
    std::vector<CellSettings> out;
    out.reserve(c.cell_count());
    int index = 0;
    for (const double alpha : c.alphas)
        for (const double gamma : c.gammas)
            for (const double theta : c.thetas) out.push_back({index++, alpha, gamma, theta});
    return out;
}

EquationParams cell_params(const ExperimentConfig& c, const CellSettings& cell) {
    EquationParams p;
    p.alpha = cell.alpha;
    p.gamma = cell.gamma;
    p.theta = cell.theta;
    p.variant = c.variant;
    p.forcing = Forcing::one();
    return p;
}

FieldState build_initial_state(const ExperimentConfig& c, const CellSettings& cell) {
    return build_initial(c, cell, nullptr);
}

int ExperimentRecord::skipped_cells() const {
    return static_cast<int>(std::count_if(cells.begin(), cells.end(), [](const CellResult& r) {
        return r.outcome == CellOutcome::skipped;
    }));
}

std::vector<CriterionVerdict> evaluate_criteria(const ExperimentConfig& c,
                                                const CellSettings& cell) {
    Caches caches;
    EquationParams p = cell_params(c, cell);
    p.validate();
    const FieldState u0 = build_initial(c, cell, &caches);
    return criteria_verdicts(c, cell, p, u0, caches);
}

CellResult run_cell(const ExperimentConfig& c, const CellSettings& cell) {
    Caches caches;
    return run_cell_impl(c, cell, caches);
}

ExperimentRecord run_experiment(const ExperimentConfig& c, int jobs) {
    c.validate();
    ExperimentRecord rec;
    rec.hash = config_hash(c);
    rec.config = c;
    const fs::path dir = c.out_dir / rec.hash;
    fs::create_directories(dir);

    const std::vector<CellSettings> cells = expand_cells(c);
    rec.cells.resize(cells.size());
    std::vector<size_t> todo;
    for (size_t i = 0; i < cells.size(); ++i) {
        const fs::path file = dir / cell_filename(i);
        bool have = false;
        if (fs::exists(file)) {
            try {
                CellResult stored = cell_from_json(read_json_file(file));
                have = stored.cell.index == static_cast<int>(i);
                if (have) rec.cells[i] = std::move(stored);
            } catch (const std::exception&) {
                have = false; // corrupt cell files are recomputed
            }
        }
        if (!have) todo.push_back(i);
    }

    Caches caches;
    std::atomic<size_t> next{0};
    std::exception_ptr io_error;
    std::mutex io_mutex;
    const auto work = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= todo.size()) return;
            const size_t i = todo[k];
            CellResult res = run_cell_impl(c, cells[i], caches);
            try {
                write_file_atomic(dir / cell_filename(i), cell_to_json(res).dump(2) + "\n");
            } catch (...) {
                std::lock_guard<std::mutex> lock(io_mutex);
                if (!io_error) io_error = std::current_exception();
            }
            rec.cells[i] = std::move(res);
        }
    };

    const int workers = std::clamp(jobs, 1, 64);
    if (workers == 1 || todo.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (io_error) std::rethrow_exception(io_error);

    // Written last, single-threaded, so its presence implies a complete set.
    const json meta{{"hash", rec.hash}, {"cells", rec.cells.size()}, {"config", render_config(c)}};
    write_file_atomic(dir / "record.json", meta.dump(2) + "\n");
    return rec;
}

std::optional<ExperimentRecord> load_record(const ExperimentConfig& c) {
    const std::string hash = config_hash(c);
    const fs::path dir = c.out_dir / hash;
    try {
        const json meta = read_json_file(dir / "record.json");
        if (meta.at("hash").get<std::string>() != hash) return std::nullopt;
        const size_t n = meta.at("cells").get<size_t>();
        if (n != c.cell_count()) return std::nullopt;
        ExperimentRecord rec;
        rec.hash = hash;
        rec.config = c;
        rec.cells.reserve(n);
        for (size_t i = 0; i < n; ++i)
            rec.cells.push_back(cell_from_json(read_json_file(dir / cell_filename(i))));
        return rec;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

SweepTable theta_sweep(const ExperimentConfig& c, int jobs) {
    c.validate();
    if (c.alphas.size() != 1 || c.gammas.size() != 1)
        throw std::invalid_argument("theta_sweep: config must fix alpha and gamma");

    const ExperimentRecord rec = run_experiment(c, jobs);
    SweepTable table;
    table.hash = rec.hash;
    table.alpha = c.alphas.front();
    table.gamma = c.gammas.front();
    table.rows.reserve(rec.cells.size());
    for (const CellResult& r : rec.cells) {
        SweepRow row;
        row.theta = r.cell.theta;
        row.cos_theta = std::cos(r.cell.theta);
        row.outcome = r.outcome;
        row.t_upper = verdict_upper(r, "blowup_upper_bound");
        row.t_lower = verdict_finite_lower(r, "global_lower_bound");
        if (r.outcome == CellOutcome::blowup) {
            row.bracket_lo = r.blowup.t_bracket.first;
            row.bracket_hi = r.blowup.t_bracket.second;
            row.t_estimate = r.blowup.t_estimate;
            if (row.t_estimate) {
                row.cos_theta_T = row.cos_theta * *row.t_estimate;
                const double log_inv = std::log(1.0 / row.cos_theta);
                if (log_inv > 0.0) row.t_over_log = *row.t_estimate / log_inv;
            }
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_csv(const SweepTable& t, std::ostream& os) {
    os << "theta,cos_theta,outcome,bracket_lo,bracket_hi,t_estimate,t_upper,t_lower,"
          "cos_theta_T,T_over_log\n";
    for (const SweepRow& r : t.rows) {
        os << fmt(r.theta) << ',' << fmt(r.cos_theta) << ',' << to_string(r.outcome) << ','
           << fmt(r.bracket_lo) << ',' << fmt(r.bracket_hi) << ',' << fmt(r.t_estimate) << ','
           << fmt(r.t_upper) << ',' << fmt(r.t_lower) << ',' << fmt(r.cos_theta_T) << ','
           << fmt(r.t_over_log) << '\n';
    }
}

ReportFiles report(const std::vector<ExperimentRecord>& records, const fs::path& dir) {
    if (records.empty()) throw std::invalid_argument("report: needs at least one record");
    fs::create_directories(dir);

    ReportFiles out;
    out.summary = dir / "summary.csv";
    out.long_form = dir / "long.csv";
    out.violations = dir / "violations.csv";

    std::string summary =
        "hash,cell,alpha,gamma,theta,outcome,stop_reason,sup0,sup_final,final_time,"
        "bracket_lo,bracket_hi,t_estimate,fit_rho,kaplan_t_upper,smallness_global,upper_t,"
        "well_t,lower_t,lower_global,nls_t_upper,mass_growth_t,residual_mass,residual_energy,"
        "skip_reason,wall_seconds\n";
    std::string long_form = "hash,cell,alpha,gamma,theta,name,value\n";
    std::string violations = "hash,cell,kind,source,bound,measured\n";

    for (const ExperimentRecord& rec : records) {
        for (const CellResult& r : rec.cells) {
            const bool ran = r.outcome == CellOutcome::blowup || r.outcome == CellOutcome::undecided;
            const bool ran_solver = ran && r.stop_reason != StopReason::none;
            const bool blew = r.outcome == CellOutcome::blowup;
            const std::optional<double> kap = verdict_upper(r, "kaplan");
            const std::optional<double> upper = verdict_upper(r, "blowup_upper_bound");
            const std::optional<double> well = verdict_upper(r, "potential_well");
            const std::optional<double> nls = verdict_upper(r, "nls_variance");
            const std::optional<double> lower = verdict_finite_lower(r, "global_lower_bound");

            const std::string prefix = rec.hash + "," + std::to_string(r.cell.index) + "," +
                                       fmt(r.cell.alpha) + "," + fmt(r.cell.gamma) + "," +
                                       fmt(r.cell.theta);

            summary += prefix;
            summary += std::string(",") + to_string(r.outcome) + "," + to_string(r.stop_reason);
            summary += "," + fmt(r.sup0);
            summary += "," + (ran_solver ? fmt(r.sup_final) : "nan");
            summary += "," + (ran_solver ? fmt(r.final_time) : "nan");
            summary += "," + (blew ? fmt(r.blowup.t_bracket.first) : "nan");
            summary += "," + (blew ? fmt(r.blowup.t_bracket.second) : "nan");
            summary += "," + (blew ? fmt(r.blowup.t_estimate) : "nan");
            summary += "," + (blew ? fmt(r.blowup.fit_rho) : "nan");
            summary += "," + fmt(kap);
            summary += "," + verdict_global_flag(r, "smallness_global");
            summary += "," + fmt(upper);
            summary += "," + fmt(well);
            summary += "," + fmt(lower);
            summary += "," + verdict_global_flag(r, "global_lower_bound");
            summary += "," + fmt(nls);
            summary += "," + fmt(r.mass_growth_bound);
            summary += "," + (ran_solver ? fmt(r.max_mass_residual) : "nan");
            summary += "," + (ran_solver ? fmt(r.max_energy_residual) : "nan");
            summary += "," + sanitize(r.skip_reason);
            summary += "," + fmt(r.wall_seconds) + "\n";

            const auto long_row = [&](const std::string& name, double value) {
                long_form += prefix + "," + name + "," + fmt(value) + "\n";
            };
            if (r.outcome != CellOutcome::skipped) long_row("sup0", r.sup0);
            if (ran_solver) {
                long_row("sup_final", r.sup_final);
                long_row("final_time", r.final_time);
                long_row("residual_mass", r.max_mass_residual);
                long_row("residual_energy", r.max_energy_residual);
            }
            if (blew) {
                long_row("bracket_lo", r.blowup.t_bracket.first);
                long_row("bracket_hi", r.blowup.t_bracket.second);
                if (r.blowup.t_estimate) long_row("t_estimate", *r.blowup.t_estimate);
                long_row("fit_rho", r.blowup.fit_rho);
            }
            if (r.mass_growth_bound) long_row("mass_growth_t", *r.mass_growth_bound);
            for (const CriterionVerdict& v : r.verdicts) {
                long_row(v.name + ".applicable", v.applicable ? 1.0 : 0.0);
                if (v.t_upper) long_row(v.name + ".t_upper", *v.t_upper);
                if (v.t_lower && std::isfinite(*v.t_lower)) long_row(v.name + ".t_lower", *v.t_lower);
                for (const auto& [key, value] : v.details) long_row(v.name + "." + key, value);
            }

            // Bound violations are contradictions between what the solver
            // demonstrated and what a certificate promised.
            const auto violation = [&](const char* kind, const char* source, double bound,
                                       double measured) {
                violations += prefix + "," + kind + "," + source + "," + fmt(bound) + "," +
                              fmt(measured) + "\n";
                ++out.violation_count;
            };
            if (ran_solver) {
                const auto check_upper = [&](const char* source, const std::optional<double>& b) {
                    if (b && r.final_time > *b * (1.0 + kViolationSlack) + 1e-12)
                        violation("exists_past_upper", source, *b, r.final_time);
                };
                check_upper("kaplan", kap);
                check_upper("blowup_upper_bound", upper);
                check_upper("potential_well", well);
                if (std::abs(std::cos(r.cell.theta)) < 1e-12) check_upper("nls_variance", nls);
                check_upper("mass_growth", r.mass_growth_bound);
            }
            if (blew && lower && r.blowup.t_bracket.second < *lower * (1.0 - kViolationSlack))
                violation("blowup_before_lower", "global_lower_bound", *lower,
                          r.blowup.t_bracket.second);
            if (blew && holds_global_certificate(r))
                violation("global_but_blowup", "certificates",
                          r.blowup.t_bracket.first, r.blowup.t_bracket.second);
        }
        out.skipped_cells += rec.skipped_cells();
    }

    write_file_atomic(out.summary, summary);
    write_file_atomic(out.long_form, long_form);
    write_file_atomic(out.violations, violations);
    return out;
}

} // namespace glab
