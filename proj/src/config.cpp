#include "glab/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace glab {

namespace {

const std::array<const char*, 7> kCriterionNames = {
    "blowup_upper_bound", "global_lower_bound", "kaplan",         "mass_growth",
    "nls_variance",       "potential_well",     "smallness_global"};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw std::invalid_argument("config: key '" + key + "': cannot parse number '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw std::invalid_argument("config: key '" + key + "': cannot parse integer '" + s + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_double(item, key));
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += v[i];
    }
    return out;
}

/// Shared back end of both encodings: a flat "section.key" -> raw string
/// map. Consumed keys are erased so anything left over is a typo.
ExperimentConfig build_from_map(std::map<std::string, std::string> kv) {
    ExperimentConfig c;
    const auto take = [&kv](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string value = std::move(it->second);
        kv.erase(it);
        return value;
    };

    if (auto v = take("experiment.name")) c.name = *v;
    if (auto v = take("experiment.out")) c.out_dir = *v;
    if (auto v = take("experiment.seed")) {
        const long s = parse_long(*v, "experiment.seed");
        if (s < 0) throw std::invalid_argument("config: experiment.seed must be nonnegative");
        c.seed = static_cast<unsigned>(s);
    }
    if (auto v = take("experiment.criteria")) {
        c.criteria = split_list(*v);
        std::sort(c.criteria.begin(), c.criteria.end());
        c.criteria.erase(std::unique(c.criteria.begin(), c.criteria.end()), c.criteria.end());
    }

    if (auto v = take("equation.variant")) {
        const std::string t = trim(*v);
        if (t == "GL")
            c.variant = EquationVariant::GL;
        else if (t == "GL2")
            c.variant = EquationVariant::GL2;
        else
            throw std::invalid_argument("config: equation.variant must be GL or GL2, got '" + t +
                                        "'");
    }
    if (auto v = take("equation.alpha")) c.alphas = parse_double_list(*v, "equation.alpha");
    if (auto v = take("equation.gamma")) c.gammas = parse_double_list(*v, "equation.gamma");
    if (auto v = take("equation.theta")) c.thetas = parse_double_list(*v, "equation.theta");

    if (auto v = take("data.family")) {
        const std::string t = trim(*v);
        if (t == "gaussian")
            c.data.family = InitialData::Family::gaussian;
        else if (t == "ring")
            c.data.family = InitialData::Family::ring;
        else if (t == "ground_state")
            c.data.family = InitialData::Family::ground_state;
        else
            throw std::invalid_argument(
                "config: data.family must be gaussian, ring or ground_state, got '" + t + "'");
    }
    if (auto v = take("data.amplitude")) c.data.amplitude = parse_double(*v, "data.amplitude");
    if (auto v = take("data.sigma")) c.data.sigma = parse_double(*v, "data.sigma");
    if (auto v = take("data.r0")) c.data.r0 = parse_double(*v, "data.r0");
    if (auto v = take("data.chirp")) c.data.chirp = parse_double(*v, "data.chirp");

    if (auto v = take("grid.kind")) {
        const std::string t = trim(*v);
        if (t == "radial")
            c.grid.kind = GridKind::radial;
        else if (t == "periodic1d")
            c.grid.kind = GridKind::periodic1d;
        else
            throw std::invalid_argument("config: grid.kind must be radial or periodic1d, got '" +
                                        t + "'");
    }
    if (auto v = take("grid.dim")) c.grid.dim = static_cast<int>(parse_long(*v, "grid.dim"));
    if (auto v = take("grid.extent")) c.grid.extent = parse_double(*v, "grid.extent");
    if (auto v = take("grid.n")) c.grid.n = static_cast<int>(parse_long(*v, "grid.n"));

    if (auto v = take("run.dt0")) c.controls.dt0 = parse_double(*v, "run.dt0");
    if (auto v = take("run.dt_min")) c.controls.dt_min = parse_double(*v, "run.dt_min");
    if (auto v = take("run.t_budget")) c.controls.t_budget = parse_double(*v, "run.t_budget");
    if (auto v = take("run.c_dt")) c.controls.c_dt = parse_double(*v, "run.c_dt");
    if (auto v = take("run.snapshot_stride"))
        c.controls.snapshot_stride = static_cast<int>(parse_long(*v, "run.snapshot_stride"));
    if (auto v = take("run.linear_subcycles"))
        c.controls.linear_subcycles = static_cast<int>(parse_long(*v, "run.linear_subcycles"));
    if (auto v = take("run.boundary_leak_tol"))
        c.controls.boundary_leak_tol = parse_double(*v, "run.boundary_leak_tol");
    if (auto v = take("run.m0_factor"))
        c.escalation.m0_factor = parse_double(*v, "run.m0_factor");
    if (auto v = take("run.levels"))
        c.escalation.levels = static_cast<int>(parse_long(*v, "run.levels"));

    if (!kv.empty())
        throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
    c.validate();
    return c;
}

/// Rendering shared by the canonical form and the hash (which drops the
/// bookkeeping keys so moving an experiment's output does not re-run it).
std::string render(const ExperimentConfig& c, bool for_hash) {
    std::string out;
    out += "[experiment]\n";
    if (!for_hash) {
        out += "name = " + c.name + "\n";
        out += "out = " + c.out_dir.generic_string() + "\n";
    }
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "criteria = " + join(c.criteria) + "\n";
    out += "\n[equation]\n";
    out += std::string("variant = ") + (c.variant == EquationVariant::GL ? "GL" : "GL2") + "\n";
    out += "alpha = " + fmt_list(c.alphas) + "\n";
    out += "gamma = " + fmt_list(c.gammas) + "\n";
    out += "theta = " + fmt_list(c.thetas) + "\n";
    out += "\n[data]\n";
    out += std::string("family = ") + to_string(c.data.family) + "\n";
    out += "amplitude = " + fmt(c.data.amplitude) + "\n";
    out += "sigma = " + fmt(c.data.sigma) + "\n";
    out += "r0 = " + fmt(c.data.r0) + "\n";
    out += "chirp = " + fmt(c.data.chirp) + "\n";
    out += "\n[grid]\n";
    out += std::string("kind = ") +
           (c.grid.kind == GridKind::radial ? "radial" : "periodic1d") + "\n";
    out += "dim = " + std::to_string(c.grid.dim) + "\n";
    out += "extent = " + fmt(c.grid.extent) + "\n";
    out += "n = " + std::to_string(c.grid.n) + "\n";
    out += "\n[run]\n";
    out += "dt0 = " + fmt(c.controls.dt0) + "\n";
    out += "dt_min = " + fmt(c.controls.dt_min) + "\n";
    out += "t_budget = " + fmt(c.controls.t_budget) + "\n";
    out += "c_dt = " + fmt(c.controls.c_dt) + "\n";
    out += "snapshot_stride = " + std::to_string(c.controls.snapshot_stride) + "\n";
    out += "linear_subcycles = " + std::to_string(c.controls.linear_subcycles) + "\n";
    out += "boundary_leak_tol = " + fmt(c.controls.boundary_leak_tol) + "\n";
    out += "m0_factor = " + fmt(c.escalation.m0_factor) + "\n";
    out += "levels = " + std::to_string(c.escalation.levels) + "\n";
    return out;
}

std::string json_value_to_string(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) return fmt(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            const auto& e = v[i];
            if (e.is_array() || e.is_object())
                throw std::invalid_argument("config: key '" + key + "': nested lists");
            out += json_value_to_string(e, key);
        }
        return out;
    }
    throw std::invalid_argument("config: key '" + key + "': unsupported JSON value type");
}

} // namespace

const char* to_string(InitialData::Family f) {
    switch (f) {
        case InitialData::Family::gaussian: return "gaussian";
        case InitialData::Family::ring: return "ring";
        case InitialData::Family::ground_state: return "ground_state";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    const auto fail = [](const std::string& why) {
        throw std::invalid_argument("ExperimentConfig: " + why);
    };
    if (alphas.empty()) fail("alpha list is empty");
    if (gammas.empty()) fail("gamma list is empty");
    if (thetas.empty()) fail("theta list is empty");
    for (double a : alphas)
        if (!(a > 0.0) || !std::isfinite(a)) fail("alpha values must be positive");
    for (double g : gammas) {
        if (!std::isfinite(g)) fail("gamma values must be finite");
        if (variant == EquationVariant::GL2 && g != 0.0) fail("GL2 cells have no gamma term");
    }
    const double half_pi = std::acos(-1.0) / 2.0;
    for (double t : thetas)
        if (!(t >= 0.0) || t > half_pi + 1e-12) fail("theta values must lie in [0, pi/2]");

    if (data.family != InitialData::Family::ground_state && !(data.sigma > 0.0))
        fail("data.sigma must be positive");
    if (data.r0 < 0.0) fail("data.r0 must be nonnegative");
    if (!std::isfinite(data.amplitude) || !std::isfinite(data.chirp))
        fail("data parameters must be finite");

    if (grid.dim < 1) fail("grid.dim must be at least 1");
    if (!(grid.extent > 0.0)) fail("grid.extent must be positive");
    if (grid.n < 8) fail("grid.n must be at least 8");
    if (grid.kind == GridKind::periodic1d && grid.dim != 1) fail("periodic grids have dim 1");

    if (!(controls.dt0 > 0.0)) fail("run.dt0 must be positive");
    if (!(controls.dt_min > 0.0) || controls.dt_min > controls.dt0)
        fail("run.dt_min must lie in (0, dt0]");
    if (!(controls.t_budget > 0.0)) fail("run.t_budget must be positive");
    if (!(controls.c_dt > 0.0)) fail("run.c_dt must be positive");
    if (controls.snapshot_stride < 0) fail("run.snapshot_stride must be nonnegative");
    if (controls.linear_subcycles < 1) fail("run.linear_subcycles must be at least 1");
    if (!(controls.boundary_leak_tol > 0.0)) fail("run.boundary_leak_tol must be positive");

    if (!(escalation.m0_factor > 1.0)) fail("run.m0_factor must exceed 1");
    if (escalation.levels < 1 || escalation.levels > 40)
        fail("run.levels must lie in [1, 40]");

    for (const auto& name : criteria)
        if (std::find(kCriterionNames.begin(), kCriterionNames.end(), name) ==
            kCriterionNames.end())
            fail("unknown criterion '" + name + "'");
}

std::string render_config(const ExperimentConfig& c) { return render(c, false); }

std::string config_hash(const ExperimentConfig& c) {
    const std::string body = render(c, true);
    uint64_t h = 14695981039346656037ull;
    for (unsigned char byte : body) {
        h ^= byte;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config_text(const std::string& text) {
    static const std::array<const char*, 5> sections = {"experiment", "equation", "data", "grid",
                                                        "run"};
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(sections.begin(), sections.end(), section) == sections.end())
                throw std::invalid_argument("config: unknown section '" + section + "'");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        ": expected key = value");
        if (section.empty())
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        ": key before any [section]");
        const std::string key = section + "." + trim(line.substr(0, eq));
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    return build_from_map(std::move(kv));
}

ExperimentConfig parse_config_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: JSON root must be an object");
    std::map<std::string, std::string> kv;
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object())
            throw std::invalid_argument("config: section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            const std::string full = section + "." + key;
            kv[full] = json_value_to_string(value, full);
        }
    }
    return build_from_map(std::move(kv));
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("load_config: cannot read " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
    return parse_config_text(text);
}

} // namespace glab
