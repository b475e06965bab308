#include "villus/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "villus/csv.hpp"
#include "villus/error.hpp"

namespace villus {

namespace {

using Member = std::variant<double ExperimentConfig::*, int ExperimentConfig::*, std::string ExperimentConfig::*,
                            std::vector<double> ExperimentConfig::*>;

struct Field {
    const char* section;
    const char* key;
    Member member;
};

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        {"experiment", "scenario", &C::scenario},
        {"experiment", "module", &C::module},
        {"experiment", "output_dir", &C::output_dir},

        {"units", "length_scale", &C::length_scale},
        {"units", "time_scale", &C::time_scale},

        {"pulse", "wave_speed", &C::wave_speed},
        {"pulse", "pulse_period", &C::pulse_period},
        {"pulse", "shape", &C::pulse_shape},
        {"pulse", "amplitude", &C::pulse_amplitude},
        {"pulse", "friction", &C::friction},
        {"pulse", "c0", &C::c0},
        {"pulse", "c1", &C::c1},
        {"pulse", "a", &C::a},
        {"pulse", "b", &C::b},
        {"pulse", "initial_speed", &C::initial_speed},
        {"pulse", "horizon", &C::ode_horizon},
        {"pulse", "dt", &C::ode_dt},
        {"pulse", "pulse_periods", &C::pulse_periods},
        {"pulse", "quadrature_nodes", &C::quadrature_nodes},
        {"pulse", "output_points", &C::output_points},

        {"kinetics", "species", &C::species},
        {"kinetics", "decay", &C::decay},
        {"kinetics", "initial_composition", &C::initial_composition},

        {"absorption", "eta_p", &C::eta_p},
        {"absorption", "eta_p_modulation", &C::eta_p_modulation},
        {"absorption", "eta_a", &C::eta_a},
        {"absorption", "g_a", &C::g_a},
        {"absorption", "g_a_vmax", &C::g_a_vmax},
        {"absorption", "g_a_km", &C::g_a_km},
        {"absorption", "g_a_slope", &C::g_a_slope},
        {"absorption", "rho", &C::rho},
        {"absorption", "alpha", &C::alpha},
        {"absorption", "omega", &C::omega},
        {"absorption", "chi", &C::chi},
        {"absorption", "zeta", &C::zeta},
        {"absorption", "phi", &C::phi},
        {"absorption", "phi_vmax", &C::phi_vmax},
        {"absorption", "phi_km", &C::phi_km},
        {"absorption", "phi_slope", &C::phi_slope},

        {"velocity", "family", &C::velocity},
        {"velocity", "speed", &C::speed},

        {"profile", "family", &C::profile},
        {"profile", "radius", &C::radius},
        {"profile", "amplitude", &C::amplitude},
        {"profile", "modulation", &C::modulation},
        {"profile", "lobes", &C::lobes},
        {"profile", "table", &C::table},

        {"grids", "quadrature_nz", &C::quadrature_nz},
        {"grids", "quadrature_ntheta", &C::quadrature_ntheta},
        {"grids", "quadrature_nrho", &C::quadrature_nrho},
        {"grids", "cell_nz", &C::cell_nz},
        {"grids", "cell_nrho", &C::cell_nrho},
        {"grids", "axial_length", &C::axial_length},
        {"grids", "axial_cells", &C::axial_cells},
        {"grids", "cfl", &C::cfl},
        {"grids", "horizon", &C::horizon},
        {"grids", "micro_nz_per_period", &C::micro_nz_per_period},
        {"grids", "micro_nrho", &C::micro_nrho},
        {"grids", "eps_list", &C::eps_list},
        {"grids", "snapshot_times", &C::snapshot_times},

        {"inflow", "family", &C::inflow},
        {"inflow", "amplitude", &C::inflow_amplitude},
        {"inflow", "rise_time", &C::rise_time},
        {"inflow", "u_share", &C::u_share},
        {"inflow", "half_period", &C::half_period},

        {"cell", "p", &C::p},
        {"cell", "mu", &C::mu},
        {"cell", "nu", &C::nu},
        {"cell", "delta", &C::delta},
        {"cell", "x1", &C::x1},
        {"cell", "t", &C::t},
        {"cell", "solvability_tolerance", &C::solvability_tolerance},
    };
    return table;
}

const std::vector<std::string> kSections = {"experiment", "units", "pulse",   "kinetics", "absorption", "velocity",
                                            "profile",    "grids",   "inflow",   "cell"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_real(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
    if (text.empty()) return false;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    return r.ec == std::errc() && r.ptr == text.data() + text.size();
}

std::string render(const ExperimentConfig& c, const Member& m) {
    return std::visit(
        [&](auto ptr) -> std::string {
            using T = std::decay_t<decltype(c.*ptr)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_number(c.*ptr);
            } else if constexpr (std::is_same_v<T, int>) {
                return std::to_string(c.*ptr);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return c.*ptr;
            } else {
                std::string s;
                for (std::size_t i = 0; i < (c.*ptr).size(); ++i) {
                    if (i) s += ", ";
                    s += format_number((c.*ptr)[i]);
                }
                return s;
            }
        },
        m);
}

/// Assigns a textual value; returns an error message or empty.
std::string assign(ExperimentConfig& c, const Member& m, const std::string& value) {
    return std::visit(
        [&](auto ptr) -> std::string {
            using T = std::decay_t<decltype(c.*ptr)>;
            if constexpr (std::is_same_v<T, double>) {
                double v;
                if (!parse_real(value, v)) return "expected a real number, got '" + value + "'";
                c.*ptr = v;
            } else if constexpr (std::is_same_v<T, int>) {
                int v;
                if (!parse_int(value, v)) return "expected an integer, got '" + value + "'";
                c.*ptr = v;
            } else if constexpr (std::is_same_v<T, std::string>) {
                c.*ptr = value;
            } else {
                std::vector<double> list;
                std::string item;
                std::istringstream in(value);
                while (std::getline(in, item, ',')) {
                    double v;
                    const std::string t = trim(item);
                    if (!parse_real(t, v)) return "expected a comma-separated list of reals, got '" + value + "'";
                    list.push_back(v);
                }
                c.*ptr = std::move(list);
            }
            return {};
        },
        m);
}

/// Sections each module reads; absent sections are an error.
std::vector<std::string> required_sections(const std::string& module) {
    if (module == "ode-sim" || module == "ode-converge") return {"pulse"};
    if (module == "geometry") return {"profile"};
    if (module == "homogenize") return {"profile", "velocity", "absorption"};
    if (module == "cell-solve") return {"profile", "velocity", "absorption", "cell"};
    if (module == "macro-solve") return {"profile", "velocity", "absorption", "grids", "inflow"};
    if (module == "micro-verify" || module == "compare") return {"profile", "velocity", "absorption", "grids", "inflow"};
    return {};
}

class Validator {
public:
    Validator(const std::map<std::string, int>& lines, std::vector<ConfigIssue>& out) : lines_(lines), out_(out) {}

    void check(bool ok, const std::string& section, const std::string& key, const std::string& message) {
        if (ok) return;
        const auto it = lines_.find(section + "." + key);
        out_.push_back({it == lines_.end() ? 0 : it->second, "[" + section + "] " + key + ": " + message});
    }
    void positive(double v, const std::string& s, const std::string& k) { check(v > 0.0, s, k, "must be positive"); }
    void nonnegative(double v, const std::string& s, const std::string& k) {
        check(v >= 0.0, s, k, "must be nonnegative");
    }
    void one_of(const std::string& v, std::initializer_list<const char*> options, const std::string& s,
                const std::string& k) {
        std::string names;
        for (const char* o : options) {
            if (v == o) return;
            if (!names.empty()) names += " | ";
            names += o;
        }
        check(false, s, k, "unknown family '" + v + "' (expected " + names + ")");
    }

private:
    const std::map<std::string, int>& lines_;
    std::vector<ConfigIssue>& out_;
};

void validate(const ExperimentConfig& c, const std::map<std::string, int>& lines, std::vector<ConfigIssue>& errors) {
    Validator v(lines, errors);
    const auto& mods = module_names();
    v.check(std::find(mods.begin(), mods.end(), c.module) != mods.end(), "experiment", "module",
            "unknown module selector '" + c.module + "'");
    auto plain = [](const std::string& s) {
        return !s.empty() && s == trim(s) && s.find_first_of("#\n") == std::string::npos;
    };
    v.check(plain(c.scenario), "experiment", "scenario", "must be a nonempty name without '#'");
    v.check(plain(c.output_dir), "experiment", "output_dir", "must be a nonempty path without '#'");
    v.check(c.table.empty() || plain(c.table), "profile", "table", "path must not contain '#'");

    v.positive(c.length_scale, "units", "length_scale");
    v.positive(c.time_scale, "units", "time_scale");
    v.positive(c.wave_speed, "pulse", "wave_speed");
    v.positive(c.pulse_period, "pulse", "pulse_period");
    v.one_of(c.pulse_shape, {"sin2", "constant"}, "pulse", "shape");
    v.nonnegative(c.pulse_amplitude, "pulse", "amplitude");
    v.positive(c.friction, "pulse", "friction");
    v.check(c.b >= 0.0 && c.a > 0.0, "pulse", "a", "amplitude denominator a + b x must stay positive (a > 0, b >= 0)");
    v.check(c.initial_speed >= 0.0 && c.initial_speed < c.wave_speed, "pulse", "initial_speed",
            "initial bolus speed must satisfy 0 <= v0 < c (precondition of the averaging theorem)");
    v.positive(c.ode_horizon, "pulse", "horizon");
    v.nonnegative(c.ode_dt, "pulse", "dt");
    v.check(!c.pulse_periods.empty(), "pulse", "pulse_periods", "must list at least one period");
    for (double e : c.pulse_periods) v.check(e > 0.0, "pulse", "pulse_periods", "periods must be positive");
    v.check(c.quadrature_nodes >= 3, "pulse", "quadrature_nodes", "needs at least 3 nodes");
    v.check(c.output_points >= 2, "pulse", "output_points", "needs at least 2 points");

    v.check(c.species >= 1, "kinetics", "species", "needs at least one species");
    v.nonnegative(c.decay, "kinetics", "decay");
    v.nonnegative(c.initial_composition, "kinetics", "initial_composition");

    v.nonnegative(c.eta_p, "absorption", "eta_p");
    v.check(std::abs(c.eta_p_modulation) < 1.0, "absorption", "eta_p_modulation", "must lie in (-1, 1)");
    v.nonnegative(c.eta_a, "absorption", "eta_a");
    v.one_of(c.g_a, {"michaelis-menten", "linear", "zero"}, "absorption", "g_a");
    v.nonnegative(c.g_a_vmax, "absorption", "g_a_vmax");
    v.positive(c.g_a_km, "absorption", "g_a_km");
    v.nonnegative(c.g_a_slope, "absorption", "g_a_slope");
    v.nonnegative(c.rho, "absorption", "rho");
    v.check(c.alpha > 0.0 && c.alpha <= 1.0, "absorption", "alpha", "must lie in (0, 1]");
    v.positive(c.omega, "absorption", "omega");
    v.positive(c.chi, "absorption", "chi");
    v.check(c.omega <= c.chi, "absorption", "omega", "feedstuff diffusion omega must not exceed chi");
    v.nonnegative(c.zeta, "absorption", "zeta");
    v.one_of(c.phi, {"michaelis-menten", "linear", "zero"}, "absorption", "phi");
    v.nonnegative(c.phi_vmax, "absorption", "phi_vmax");
    v.positive(c.phi_km, "absorption", "phi_km");
    v.nonnegative(c.phi_slope, "absorption", "phi_slope");

    v.one_of(c.velocity, {"plug", "poiseuille"}, "velocity", "family");
    v.check(c.speed > 0.0, "velocity", "speed", "must be positive (mean axial flow, assumption C1)");

    v.one_of(c.profile, {"flat", "cosine", "lobed", "table"}, "profile", "family");
    v.positive(c.radius, "profile", "radius");
    v.check(c.amplitude > -0.5, "profile", "amplitude", "must exceed -1/2 so the wall radius stays positive");
    v.check(c.lobes >= 0, "profile", "lobes", "must be nonnegative");
    v.check(c.profile != "table" || !c.table.empty(), "profile", "table", "table family needs a file path");
    if (c.radius > 0.0 && (c.profile == "flat" || c.profile == "cosine" || c.profile == "lobed")) {
        try {
            build_profile(c).validate();
        } catch (const Error& e) {
            v.check(false, "profile", "family", e.what());
        }
    }

    v.check(c.quadrature_nz >= 8, "grids", "quadrature_nz", "needs at least 8 points");
    v.check(c.quadrature_ntheta >= 8, "grids", "quadrature_ntheta", "needs at least 8 points");
    v.check(c.quadrature_nrho >= 2, "grids", "quadrature_nrho", "needs at least 2 intervals");
    v.check(c.cell_nz >= 16, "grids", "cell_nz", "needs at least 16 cells");
    v.check(c.cell_nrho >= 16, "grids", "cell_nrho", "needs at least 16 cells");
    v.positive(c.axial_length, "grids", "axial_length");
    v.check(c.axial_cells >= 1, "grids", "axial_cells", "needs at least one cell");
    v.check(c.cfl > 0.0 && c.cfl < 1.0, "grids", "cfl", "must lie in (0, 1)");
    v.positive(c.horizon, "grids", "horizon");
    v.check(c.micro_nz_per_period >= 16, "grids", "micro_nz_per_period", "needs at least 16 cells per period");
    v.check(c.micro_nrho >= 2, "grids", "micro_nrho", "needs at least 2 cells");
    for (double e : c.eps_list) {
        const double n = c.axial_length / e;
        v.check(e > 0.0 && std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n), "grids", "eps_list",
                "every eps must divide axial_length into an integer number of periods");
    }
    if (c.module == "compare") {
        v.check(c.eps_list.size() >= 3, "grids", "eps_list", "comparison needs at least three eps values");
    }
    for (std::size_t k = 0; k < c.snapshot_times.size(); ++k) {
        const double s = c.snapshot_times[k];
        v.check(s >= 0.0 && s <= c.horizon && (k == 0 || s > c.snapshot_times[k - 1]), "grids", "snapshot_times",
                "must increase within [0, horizon]");
    }

    v.one_of(c.inflow, {"meal", "pulses", "zero"}, "inflow", "family");
    v.nonnegative(c.inflow_amplitude, "inflow", "amplitude");
    v.positive(c.rise_time, "inflow", "rise_time");
    v.nonnegative(c.u_share, "inflow", "u_share");
    v.positive(c.half_period, "inflow", "half_period");
    if (c.inflow == "meal" || c.inflow == "pulses" || c.inflow == "zero") {
        const auto in = build_inflow(c);
        v.check(std::abs(in.u0(0.0)) <= 1e-14 && std::abs(in.v0(0.0)) <= 1e-14, "inflow", "family",
                "inflow must vanish at t = 0 (u0(0) = v0(0) = 0)");
    }

    v.nonnegative(c.mu, "cell", "mu");
    v.nonnegative(c.nu, "cell", "nu");
    v.positive(c.solvability_tolerance, "cell", "solvability_tolerance");
}

}  // namespace

const std::vector<std::string>& module_names() {
    static const std::vector<std::string> names = {"ode-sim",     "ode-converge", "geometry",     "homogenize",
                                                   "cell-solve",  "macro-solve",  "micro-verify", "compare"};
    return names;
}

ConfigParseResult parse_config(std::string_view text, std::string_view module_override) {
    ConfigParseResult result;
    ExperimentConfig c;
    std::map<std::string, int> key_lines;
    std::map<std::string, int> section_lines;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        std::string line = trim(raw);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                result.errors.push_back({line_no, "malformed section header '" + line + "'"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
                result.errors.push_back({line_no, "unknown section [" + section + "]"});
            } else if (section_lines.count(section)) {
                result.errors.push_back({line_no, "duplicate section [" + section + "]"});
            } else {
                section_lines[section] = line_no;
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back({line_no, "expected key = value, got '" + line + "'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            result.errors.push_back({line_no, "key '" + key + "' appears before any section"});
            continue;
        }
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const Field& f) { return f.section == section && f.key == key; });
        if (it == table.end()) {
            result.errors.push_back({line_no, "unknown key '" + key + "' in section [" + section + "]"});
            continue;
        }
        const std::string id = section + "." + key;
        if (key_lines.count(id)) {
            result.errors.push_back({line_no, "duplicate key '" + key + "' in section [" + section + "]"});
            continue;
        }
        key_lines[id] = line_no;
        const std::string err = assign(c, it->member, value);
        if (!err.empty()) result.errors.push_back({line_no, "[" + section + "] " + key + ": " + err});
    }

    if (!module_override.empty()) c.module = std::string(module_override);
    if (!section_lines.count("experiment")) {
        if (module_override.empty()) result.errors.push_back({0, "missing section [experiment]"});
    } else if (module_override.empty() && !key_lines.count("experiment.module")) {
        result.errors.push_back({section_lines["experiment"], "[experiment] is missing the module key"});
    }
    const int module_line = key_lines.count("experiment.module") ? key_lines["experiment.module"] : 0;
    for (const auto& s : required_sections(c.module)) {
        if (!section_lines.count(s)) {
            result.errors.push_back({module_line, "missing section [" + s + "] required by module " + c.module});
        }
    }
    validate(c, key_lines, result.errors);
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    if (result.errors.empty()) result.config = std::move(c);
    return result;
}

ExperimentConfig load_config(std::string_view text) {
    auto r = parse_config(text);
    if (r.config) return *r.config;
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& e : r.errors) msg << "\n  line " << e.line << ": " << e.message;
    throw Error(ErrorKind::Config, msg.str());
}

std::vector<ConfigEntry> config_entries(const ExperimentConfig& config) {
    std::vector<ConfigEntry> out;
    for (const auto& f : fields()) out.push_back({f.section, f.key, render(config, f.member)});
    return out;
}

std::string emit_config(const ExperimentConfig& config) {
    std::string out;
    std::string section;
    for (const auto& e : config_entries(config)) {
        if (e.section != section) {
            if (!section.empty()) out += '\n';
            section = e.section;
            out += "[" + section + "]\n";
        }
        out += e.key + " = " + e.value + "\n";
    }
    return out;
}

UnitScales build_units(const ExperimentConfig& c) { return {c.length_scale, c.time_scale}; }

PulseModel build_pulse(const ExperimentConfig& c) {
    const auto units = build_units(c);
    PulseModel m;
    m.wave_speed = units.speed_to_internal(c.wave_speed);
    m.pulse_period = units.time_to_internal(c.pulse_period);
    m.shape = c.pulse_shape == "constant" ? constant_pulse_shape(c.pulse_amplitude) : sin2_pulse_shape(c.pulse_amplitude);
    m.friction = constant_friction(c.friction * units.time);
    m.c0 = c.c0;
    m.c1 = c.c1;
    m.a = c.a;
    m.b = c.b;
    return m;
}

KineticsModel build_kinetics(const ExperimentConfig& c) {
    return linear_decay_kinetics(static_cast<std::size_t>(c.species), c.decay);
}

std::vector<double> build_initial_composition(const ExperimentConfig& c) {
    return std::vector<double>(static_cast<std::size_t>(c.species), c.initial_composition);
}

namespace {

SaturatingLaw build_law(const std::string& family, double vmax, double km, double slope) {
    if (family == "linear") return SaturatingLaw::linear(slope);
    if (family == "zero") return SaturatingLaw::zero();
    return SaturatingLaw::michaelis_menten(vmax, km);
}

}  // namespace

AbsorptionModel build_absorption(const ExperimentConfig& c) {
    AbsorptionModel a;
    const double eta = c.eta_p, m = c.eta_p_modulation;
    a.eta_p = [eta, m](double, const Vec3& X) { return eta * (1.0 + m * std::cos(kTwoPi * X[0])); };
    const double eta_a = c.eta_a;
    a.eta_a = [eta_a](double, const Vec3&, double) { return eta_a; };
    a.g_a = build_law(c.g_a, c.g_a_vmax, c.g_a_km, c.g_a_slope);
    const double rho = c.rho;
    a.rho_surf = [rho](double, const Vec3&) { return rho; };
    a.alpha = c.alpha;
    a.omega = c.omega;
    a.chi = c.chi;
    const double zeta = c.zeta;
    a.zeta = [zeta](double, double) { return zeta; };
    a.phi = build_law(c.phi, c.phi_vmax, c.phi_km, c.phi_slope);
    a.eta_lower_bound = eta * (1.0 - std::abs(m));
    return a;
}

VillusProfile build_profile(const ExperimentConfig& c) {
    if (c.profile == "flat") return flat_profile(c.radius);
    if (c.profile == "lobed") return lobed_profile(c.radius, c.amplitude, c.modulation, c.lobes);
    if (c.profile == "table") {
        std::ifstream in(c.table);
        require(static_cast<bool>(in), ErrorKind::Io, "cannot open profile table " + c.table);
        return load_profile_csv(in, c.radius);
    }
    return cosine_profile(c.radius, c.amplitude);
}

VelocityField build_velocity(const ExperimentConfig& c, const VillusProfile& profile) {
    AxisymmetricStream s;
    s.shape = c.velocity == "poiseuille" ? AxisymmetricStream::Shape::Poiseuille : AxisymmetricStream::Shape::Plug;
    const double q = c.speed;
    s.q = [q](double, double) { return q; };
    s.base_radius = profile.base_radius;
    return make_stream_velocity(
        s, [profile](double z) { return profile.radius(z); }, [profile](double z) { return profile.radius_dz(z); });
}

InflowSignals build_inflow(const ExperimentConfig& c) {
    if (c.inflow == "pulses") return InflowSignals::sine_pulses(c.inflow_amplitude, c.half_period);
    if (c.inflow == "zero") return InflowSignals::zero();
    return InflowSignals::smooth_meal(c.inflow_amplitude, c.rise_time, c.u_share);
}

}  // namespace villus
