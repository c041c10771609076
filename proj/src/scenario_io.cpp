#include "kfp/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kfp/output_io.hpp"
#include "kfp/util.hpp"

namespace kfp {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Sections {
    std::map<std::string, std::map<std::string, Entry>> data;

    bool has(const std::string& section, const std::string& key) {
        auto s = data.find(section);
        return s != data.end() && s->second.count(key) > 0;
    }
    std::string take(const std::string& section, const std::string& key) {
        auto& e = data[section][key];
        e.used = true;
        return e.value;
    }
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Sections tokenize(const std::string& text) {
    Sections out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "scenario line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            require(!section.empty(), "scenario line " + std::to_string(lineno) + ": empty section");
            out.data[section];
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                "scenario line " + std::to_string(lineno) + ": expected key = value");
        require(!section.empty(),
                "scenario line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), "scenario line " + std::to_string(lineno) + ": empty key");
        require(out.data[section].count(key) == 0,
                "scenario: duplicate key " + section + "." + key);
        out.data[section][key] = Entry{value, lineno, false};
    }
    return out;
}

double to_double(const std::string& value, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        require(pos == value.size(), "scenario: trailing characters in " + path);
        return x;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("scenario: " + path + " is not a number: " + value);
    }
}

int to_int(const std::string& value, const std::string& path) {
    const double x = to_double(value, path);
    require(x == std::floor(x), "scenario: " + path + " must be an integer");
    return static_cast<int>(x);
}

bool to_bool(const std::string& value, const std::string& path) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("scenario: " + path + " must be a boolean");
}

std::vector<double> to_list(const std::string& value, const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), path));
    require(!out.empty(), "scenario: " + path + " must be a nonempty list");
    return out;
}

Vec to_vec(const std::string& value, int dim, const std::string& path) {
    const std::vector<double> list = to_list(value, path);
    require(static_cast<int>(list.size()) == dim,
            "scenario: " + path + " must have " + std::to_string(dim) + " component(s)");
    return {list[0], dim > 1 ? list[1] : 0.0};
}

class Reader {
public:
    Reader(Sections& s, std::string section) : s_(s), section_(std::move(section)) {}

    std::string path(const std::string& key) const { return section_ + "." + key; }
    bool has(const std::string& key) const { return s_.has(section_, key); }

    double number(const std::string& key, double fallback) {
        return has(key) ? to_double(s_.take(section_, key), path(key)) : fallback;
    }
    double number_required(const std::string& key) {
        require(has(key), "scenario: missing required key " + path(key));
        return to_double(s_.take(section_, key), path(key));
    }
    int integer(const std::string& key, int fallback) {
        return has(key) ? to_int(s_.take(section_, key), path(key)) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) {
        return has(key) ? to_bool(s_.take(section_, key), path(key)) : fallback;
    }
    std::string word(const std::string& key, const std::string& fallback) {
        return has(key) ? s_.take(section_, key) : fallback;
    }
    std::vector<double> list(const std::string& key) {
        return to_list(s_.take(section_, key), path(key));
    }
    Vec vec(const std::string& key, int dim, const Vec& fallback) {
        return has(key) ? to_vec(s_.take(section_, key), dim, path(key)) : fallback;
    }

private:
    Sections& s_;
    std::string section_;
};

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    Sections sections = tokenize(text);
    Scenario s;

    {
        Reader g(sections, "grid");
        s.grid.dim = g.integer("dim", 1);
        require(s.grid.dim == 1 || s.grid.dim == 2, "scenario: grid.dim must be 1 or 2");
        s.grid.space[0].lower = g.number("x_min", 0.0);
        s.grid.space[0].upper = g.number("x_max", 1.0);
        s.grid.space[0].cells = g.integer("nx", 64);
        s.grid.velocity[0].vmax = g.number("vmax", 8.0);
        s.grid.velocity[0].cells = g.integer("nv", 128);
        if (s.grid.dim == 2) {
            s.grid.space[1].lower = g.number("y_min", 0.0);
            s.grid.space[1].upper = g.number("y_max", 1.0);
            s.grid.space[1].cells = g.integer("ny", s.grid.space[0].cells);
            s.grid.velocity[1].vmax = g.number("vmax_y", s.grid.velocity[0].vmax);
            s.grid.velocity[1].cells = g.integer("nv_y", s.grid.velocity[0].cells);
        }
    }

    {
        Reader b(sections, "boundary");
        const std::string kind = b.word("kind", "inflow");
        if (kind == "inflow") {
            s.bc.kind = BoundaryCondition::Kind::inflow;
            require(!b.has("theta"), "scenario: boundary.theta is only valid for reflection");
        } else if (kind == "reflection") {
            s.bc.kind = BoundaryCondition::Kind::absorb_reflect;
            s.bc.theta = b.number("theta", 0.0);
            require(s.bc.theta >= 0.0 && s.bc.theta < 1.0,
                    "scenario: boundary.theta must lie in [0, 1)");
            require(!b.has("inflow"), "scenario: boundary.inflow is only valid for inflow kind");
        } else {
            throw std::invalid_argument("scenario: boundary.kind must be inflow or reflection");
        }
        if (s.bc.kind == BoundaryCondition::Kind::inflow) {
            const std::string inflow = b.word("inflow", "zero");
            if (inflow == "zero") {
                s.bc.inflow.kind = InflowSpec::Kind::zero;
            } else if (inflow == "maxwellian") {
                s.bc.inflow.kind = InflowSpec::Kind::maxwellian;
                s.bc.inflow.rho = b.number("inflow_rho", 1.0);
                s.bc.inflow.u = b.vec("inflow_u", s.grid.dim, {0.0, 0.0});
                s.bc.inflow.T = b.number("inflow_temperature", 1.0);
                require(s.bc.inflow.rho >= 0.0, "scenario: boundary.inflow_rho must be nonnegative");
                require(s.bc.inflow.T > 0.0, "scenario: boundary.inflow_temperature must be positive");
            } else if (inflow == "table") {
                s.bc.inflow.kind = InflowSpec::Kind::tabulated;
                require(b.has("inflow_table"), "scenario: boundary.inflow_table path required");
                const std::string pathv = b.word("inflow_table", "");
                const PhaseGrid grid = PhaseGrid::build(s.grid);
                const auto faces = classify_boundary(grid);
                s.bc.inflow.table =
                    read_boundary_table(pathv, faces.size(), grid.velocity_cells());
            } else {
                throw std::invalid_argument(
                    "scenario: boundary.inflow must be zero, maxwellian, or table");
            }
        }
    }

    {
        Reader c(sections, "collision");
        const std::string model = c.word("model", "constant");
        if (model == "constant") {
            s.collision.kind = CollisionFrequencyModel::Kind::constant;
            s.collision.nu0 = c.number("nu", 1.0);
        } else if (model == "density_saturating") {
            s.collision.kind = CollisionFrequencyModel::Kind::density_saturating;
        } else if (model == "power_saturating") {
            s.collision.kind = CollisionFrequencyModel::Kind::power_saturating;
            s.collision.alpha = c.number("alpha", 1.0);
            s.collision.beta = c.number("beta", 0.0);
        } else if (model == "table") {
            s.collision.kind = CollisionFrequencyModel::Kind::tabulated;
            s.collision.table_rho = c.list("table_rho");
            s.collision.table_nu = c.list("table_nu");
            require(c.has("nu_sup"), "scenario: collision.nu_sup required for table model");
            s.collision.declared_sup = c.number("nu_sup", 1.0);
        } else {
            throw std::invalid_argument(
                "scenario: collision.model must be constant, density_saturating, power_saturating, or table");
        }
    }

    {
        Reader i(sections, "initial");
        const std::string kind = i.word("kind", "maxwellian");
        const int dim = s.grid.dim;
        if (kind == "maxwellian") {
            s.initial.kind = DatumSpec::Kind::maxwellian;
            s.initial.rho = i.number("rho", 1.0);
            s.initial.u = i.vec("u", dim, {0.0, 0.0});
            s.initial.T = i.number("temperature", 1.0);
        } else if (kind == "bimodal") {
            s.initial.kind = DatumSpec::Kind::bimodal;
            s.initial.rho = i.number("rho", 0.5);
            s.initial.u = i.vec("u", dim, {1.5, 0.0});
            s.initial.T = i.number("temperature", 0.5);
            s.initial.rho2 = i.number("rho2", 0.5);
            s.initial.u2 = i.vec("u2", dim, {-1.5, 0.0});
            s.initial.T2 = i.number("temperature2", 0.5);
        } else if (kind == "box") {
            s.initial.kind = DatumSpec::Kind::box;
            s.initial.height = i.number("height", 1.0);
            s.initial.x_min = i.vec("x_min", dim, {0.25, 0.25});
            s.initial.x_max = i.vec("x_max", dim, {0.75, 0.75});
            s.initial.v_bound = i.number("v_bound", 1.0);
        } else if (kind == "stripe") {
            s.initial.kind = DatumSpec::Kind::stripe;
            s.initial.rho = i.number("rho", 1.0);
            s.initial.u = i.vec("u", dim, {0.0, 0.0});
            s.initial.T = i.number("temperature", 1.0);
            s.initial.x_min = i.vec("x_min", dim, {0.25, 0.25});
            s.initial.x_max = i.vec("x_max", dim, {0.75, 0.75});
        } else if (kind == "heavy_tail") {
            s.initial.kind = DatumSpec::Kind::heavy_tail;
            s.initial.height = i.number("height", 1.0);
            s.initial.tail_exponent = i.number("tail_exponent", 3.0);
        } else if (kind == "snapshot") {
            s.initial.kind = DatumSpec::Kind::tabulated;
            require(i.has("path"), "scenario: initial.path required for snapshot kind");
            const std::string pathv = i.word("path", "");
            const PhaseGrid grid = PhaseGrid::build(s.grid);
            s.initial.table = read_snapshot_for_grid(grid, pathv);
        } else {
            throw std::invalid_argument("scenario: unknown initial.kind " + kind);
        }
    }

    {
        Reader r(sections, "run");
        s.epsilon = r.number("epsilon", 0.1);
        require(s.epsilon > 0.0, "scenario: run.epsilon must be positive (the system requires epsilon > 0)");
        require(s.epsilon <= 1.0, "scenario: run.epsilon must be at most 1");
        s.t_final = r.number("t_final", 1.0);
        require(s.t_final >= 0.0, "scenario: run.t_final must be nonnegative");
        s.cfl_fraction = r.number("cfl", 0.5);
        require(s.cfl_fraction > 0.0 && s.cfl_fraction <= 1.0,
                "scenario: run.cfl must lie in (0, 1]");
        if (r.has("dt")) {
            s.fixed_dt = r.number("dt", 0.0);
            require(*s.fixed_dt > 0.0, "scenario: run.dt must be positive");
        }
        s.output_every = r.integer("output_every", 16);
        require(s.output_every >= 1, "scenario: run.output_every must be >= 1");
        s.picard.tolerance = r.number("picard_tol", 1e-8);
        require(s.picard.tolerance > 0.0, "scenario: run.picard_tol must be positive");
        s.picard.max_iters = r.integer("picard_max_iters", 25);
        require(s.picard.max_iters >= 1, "scenario: run.picard_max_iters must be >= 1");
        const std::string splitting = r.word("splitting", "strang");
        require(splitting == "strang" || splitting == "lie",
                "scenario: run.splitting must be strang or lie");
        s.lie_splitting = splitting == "lie";
        const std::string ct = r.word("collision_time", "trapezoidal");
        require(ct == "trapezoidal" || ct == "backward_euler",
                "scenario: run.collision_time must be trapezoidal or backward_euler");
        s.collision_time = ct == "trapezoidal" ? TimeScheme::trapezoidal : TimeScheme::backward_euler;
        s.unregularized_drift = r.boolean("unregularized_drift", false);
        s.truncate_data = r.boolean("truncate_data", false);
        if (r.has("rho_floor")) s.rho_floor_override = r.number("rho_floor", 0.0);
        s.workers = r.integer("workers", 1);
        require(s.workers >= 1, "scenario: run.workers must be >= 1");
        if (r.has("probe_deltas")) {
            s.probe_deltas = r.list("probe_deltas");
            for (double k : s.probe_deltas)
                require(k >= 2.0, "scenario: run.probe_deltas entries must be >= 2 (units of dv)");
        }
    }

    {
        Reader a(sections, "audit");
        s.tol.mass_rel = a.number("mass_tol", s.tol.mass_rel);
        s.tol.energy_rel = a.number("energy_tol", s.tol.energy_rel);
        s.tol.entropy_rel = a.number("entropy_tol_rel", s.tol.entropy_rel);
        s.tol.entropy_abs = a.number("entropy_tol_abs", s.tol.entropy_abs);
        s.tol.reflection_rel = a.number("reflection_tol", s.tol.reflection_rel);
        s.tol.variance_rel = a.number("variance_tol", s.tol.variance_rel);
        s.tol.negativity_rel = a.number("negativity_tol", s.tol.negativity_rel);
        s.tol.jensen_abs = a.number("jensen_tol", s.tol.jensen_abs);
        s.tol.probe_tol = a.number("probe_tol", s.tol.probe_tol);
    }

    for (const auto& [section, keys] : sections.data) {
        static const char* known[] = {"grid", "boundary", "collision", "initial", "run", "audit"};
        bool known_section = false;
        for (const char* k : known) known_section = known_section || section == k;
        require(known_section, "scenario: unknown section [" + section + "]");
        for (const auto& [key, entry] : keys)
            require(entry.used, "scenario: unknown key " + section + "." + key + " (line " +
                                    std::to_string(entry.line) + ")");
    }

    // validate the grid eagerly so errors carry scenario context
    PhaseGrid::build(s.grid);
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream is(path);
    check_runtime(static_cast<bool>(is), "scenario: cannot open " + path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_scenario_text(buffer.str());
}

namespace {

const char* kind_name(DatumSpec::Kind k) {
    switch (k) {
        case DatumSpec::Kind::maxwellian: return "maxwellian";
        case DatumSpec::Kind::bimodal: return "bimodal";
        case DatumSpec::Kind::box: return "box";
        case DatumSpec::Kind::stripe: return "stripe";
        case DatumSpec::Kind::heavy_tail: return "heavy_tail";
        case DatumSpec::Kind::tabulated: return "snapshot";
    }
    return "?";
}

const char* model_name(CollisionFrequencyModel::Kind k) {
    switch (k) {
        case CollisionFrequencyModel::Kind::constant: return "constant";
        case CollisionFrequencyModel::Kind::density_saturating: return "density_saturating";
        case CollisionFrequencyModel::Kind::power_saturating: return "power_saturating";
        case CollisionFrequencyModel::Kind::tabulated: return "table";
    }
    return "?";
}

void put_vec(std::ostream& os, const char* key, const Vec& v, int dim) {
    os << key << " = " << format_g17(v[0]);
    if (dim > 1) os << "," << format_g17(v[1]);
    os << "\n";
}

}  // namespace

std::string echo_scenario(const Scenario& s) {
    std::ostringstream os;
    const int dim = s.grid.dim;
    os << "[grid]\n";
    os << "dim = " << dim << "\n";
    os << "x_min = " << format_g17(s.grid.space[0].lower) << "\n";
    os << "x_max = " << format_g17(s.grid.space[0].upper) << "\n";
    os << "nx = " << s.grid.space[0].cells << "\n";
    os << "vmax = " << format_g17(s.grid.velocity[0].vmax) << "\n";
    os << "nv = " << s.grid.velocity[0].cells << "\n";
    if (dim == 2) {
        os << "y_min = " << format_g17(s.grid.space[1].lower) << "\n";
        os << "y_max = " << format_g17(s.grid.space[1].upper) << "\n";
        os << "ny = " << s.grid.space[1].cells << "\n";
        os << "vmax_y = " << format_g17(s.grid.velocity[1].vmax) << "\n";
        os << "nv_y = " << s.grid.velocity[1].cells << "\n";
    }
    os << "\n[boundary]\n";
    if (s.bc.kind == BoundaryCondition::Kind::inflow) {
        os << "kind = inflow\n";
        switch (s.bc.inflow.kind) {
            case InflowSpec::Kind::zero:
                os << "inflow = zero\n";
                break;
            case InflowSpec::Kind::maxwellian:
                os << "inflow = maxwellian\n";
                os << "inflow_rho = " << format_g17(s.bc.inflow.rho) << "\n";
                put_vec(os, "inflow_u", s.bc.inflow.u, dim);
                os << "inflow_temperature = " << format_g17(s.bc.inflow.T) << "\n";
                break;
            case InflowSpec::Kind::tabulated:
                os << "inflow = table\n";
                os << "# table entries = " << s.bc.inflow.table.size() << "\n";
                break;
        }
    } else {
        os << "kind = reflection\n";
        os << "theta = " << format_g17(s.bc.theta) << "\n";
    }
    os << "\n[collision]\n";
    os << "model = " << model_name(s.collision.kind) << "\n";
    switch (s.collision.kind) {
        case CollisionFrequencyModel::Kind::constant:
            os << "nu = " << format_g17(s.collision.nu0) << "\n";
            break;
        case CollisionFrequencyModel::Kind::power_saturating:
            os << "alpha = " << format_g17(s.collision.alpha) << "\n";
            os << "beta = " << format_g17(s.collision.beta) << "\n";
            break;
        case CollisionFrequencyModel::Kind::tabulated: {
            os << "table_rho =";
            for (std::size_t k = 0; k < s.collision.table_rho.size(); ++k)
                os << (k ? "," : " ") << format_g17(s.collision.table_rho[k]);
            os << "\ntable_nu =";
            for (std::size_t k = 0; k < s.collision.table_nu.size(); ++k)
                os << (k ? "," : " ") << format_g17(s.collision.table_nu[k]);
            os << "\nnu_sup = " << format_g17(s.collision.declared_sup.value_or(0.0)) << "\n";
            break;
        }
        default:
            break;
    }
    os << "\n[initial]\n";
    os << "kind = " << kind_name(s.initial.kind) << "\n";
    switch (s.initial.kind) {
        case DatumSpec::Kind::maxwellian:
            os << "rho = " << format_g17(s.initial.rho) << "\n";
            put_vec(os, "u", s.initial.u, dim);
            os << "temperature = " << format_g17(s.initial.T) << "\n";
            break;
        case DatumSpec::Kind::bimodal:
            os << "rho = " << format_g17(s.initial.rho) << "\n";
            put_vec(os, "u", s.initial.u, dim);
            os << "temperature = " << format_g17(s.initial.T) << "\n";
            os << "rho2 = " << format_g17(s.initial.rho2) << "\n";
            put_vec(os, "u2", s.initial.u2, dim);
            os << "temperature2 = " << format_g17(s.initial.T2) << "\n";
            break;
        case DatumSpec::Kind::box:
            os << "height = " << format_g17(s.initial.height) << "\n";
            put_vec(os, "x_min", s.initial.x_min, dim);
            put_vec(os, "x_max", s.initial.x_max, dim);
            os << "v_bound = " << format_g17(s.initial.v_bound) << "\n";
            break;
        case DatumSpec::Kind::stripe:
            os << "rho = " << format_g17(s.initial.rho) << "\n";
            put_vec(os, "u", s.initial.u, dim);
            os << "temperature = " << format_g17(s.initial.T) << "\n";
            put_vec(os, "x_min", s.initial.x_min, dim);
            put_vec(os, "x_max", s.initial.x_max, dim);
            break;
        case DatumSpec::Kind::heavy_tail:
            os << "height = " << format_g17(s.initial.height) << "\n";
            os << "tail_exponent = " << format_g17(s.initial.tail_exponent) << "\n";
            break;
        case DatumSpec::Kind::tabulated:
            os << "# snapshot entries = " << s.initial.table.size() << "\n";
            break;
    }
    os << "\n[run]\n";
    os << "epsilon = " << format_g17(s.epsilon) << "\n";
    os << "t_final = " << format_g17(s.t_final) << "\n";
    os << "cfl = " << format_g17(s.cfl_fraction) << "\n";
    if (s.fixed_dt) os << "dt = " << format_g17(*s.fixed_dt) << "\n";
    os << "output_every = " << s.output_every << "\n";
    os << "picard_tol = " << format_g17(s.picard.tolerance) << "\n";
    os << "picard_max_iters = " << s.picard.max_iters << "\n";
    os << "splitting = " << (s.lie_splitting ? "lie" : "strang") << "\n";
    os << "collision_time = "
       << (s.collision_time == TimeScheme::trapezoidal ? "trapezoidal" : "backward_euler") << "\n";
    os << "unregularized_drift = " << (s.unregularized_drift ? "true" : "false") << "\n";
    os << "truncate_data = " << (s.truncate_data ? "true" : "false") << "\n";
    if (s.rho_floor_override) os << "rho_floor = " << format_g17(*s.rho_floor_override) << "\n";
    os << "workers = " << s.workers << "\n";
    if (!s.probe_deltas.empty()) {
        os << "probe_deltas =";
        for (std::size_t k = 0; k < s.probe_deltas.size(); ++k)
            os << (k ? "," : " ") << format_g17(s.probe_deltas[k]);
        os << "\n";
    }
    os << "\n[audit]\n";
    os << "mass_tol = " << format_g17(s.tol.mass_rel) << "\n";
    os << "energy_tol = " << format_g17(s.tol.energy_rel) << "\n";
    os << "entropy_tol_rel = " << format_g17(s.tol.entropy_rel) << "\n";
    os << "entropy_tol_abs = " << format_g17(s.tol.entropy_abs) << "\n";
    os << "reflection_tol = " << format_g17(s.tol.reflection_rel) << "\n";
    os << "variance_tol = " << format_g17(s.tol.variance_rel) << "\n";
    os << "negativity_tol = " << format_g17(s.tol.negativity_rel) << "\n";
    os << "jensen_tol = " << format_g17(s.tol.jensen_abs) << "\n";
    os << "probe_tol = " << format_g17(s.tol.probe_tol) << "\n";
    return os.str();
}

std::string scenario_hash(const Scenario& s) { return fnv1a_hex(echo_scenario(s)); }

}  // namespace kfp
