#include "msgfem/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace msgfem {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Entry {
    std::string value;
    int line;
    bool used = false;
};

class KeyMap {
  public:
    std::map<std::string, Entry> scalars;
    std::vector<std::pair<std::string, int>> disks; // repeated "field.disk" lines

    double number(const std::string& key, double fallback) {
        const auto it = scalars.find(key);
        if (it == scalars.end()) return fallback;
        it->second.used = true;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                              "' expects a number, got '" + it->second.value + "'");
        }
    }
    int integer(const std::string& key, int fallback) {
        const double v = number(key, fallback);
        if (v != std::floor(v))
            throw ConfigError("key '" + key + "' expects an integer");
        return static_cast<int>(v);
    }
    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
        const auto it = scalars.find(key);
        if (it == scalars.end()) return fallback;
        it->second.used = true;
        std::uint64_t v = 0;
        const auto& s = it->second.value;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                              "' expects an unsigned integer");
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const auto it = scalars.find(key);
        if (it == scalars.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }
    bool boolean(const std::string& key, bool fallback) {
        const auto it = scalars.find(key);
        if (it == scalars.end()) return fallback;
        it->second.used = true;
        if (it->second.value == "true" || it->second.value == "1") return true;
        if (it->second.value == "false" || it->second.value == "0") return false;
        throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                          "' expects true/false");
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const auto it = scalars.find(key);
        if (it == scalars.end()) return fallback;
        it->second.used = true;
        std::vector<double> out;
        std::istringstream in(it->second.value);
        double v;
        while (in >> v) out.push_back(v);
        if (out.empty())
            throw ConfigError("line " + std::to_string(it->second.line) + ": key '" + key +
                              "' expects numbers");
        return out;
    }
};

} // namespace

ScenarioConfig parse_config(const std::string& text) {
    KeyMap map;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "field.disk") {
            map.disks.emplace_back(value, lineno);
        } else {
            if (map.scalars.count(key))
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                                  "'");
            map.scalars[key] = Entry{value, lineno};
        }
    }

    ScenarioConfig c;
    c.kind = map.text("scenario.kind", c.kind);
    c.seed = map.unsigned64("scenario.seed", c.seed);
    c.workers = map.integer("scenario.workers", c.workers);
    c.out = map.text("scenario.out", c.out);

    c.domain.x0 = map.number("domain.x0", c.domain.x0);
    c.domain.y0 = map.number("domain.y0", c.domain.y0);
    c.domain.width = map.number("domain.width", c.domain.width);
    c.domain.height = map.number("domain.height", c.domain.height);
    c.resolution = map.integer("domain.resolution", c.resolution);

    c.field_kind = map.text("field.kind", c.field_kind);
    c.matrix_value.a11 = map.number("field.a11", c.matrix_value.a11);
    c.matrix_value.a12 = map.number("field.a12", c.matrix_value.a12);
    c.matrix_value.a22 = map.number("field.a22", c.matrix_value.a22);
    c.inclusion_hole = map.boolean("field.inclusion_hole", c.inclusion_hole);
    c.inclusion_value.a11 = map.number("field.inclusion_a11", c.inclusion_value.a11);
    c.inclusion_value.a12 = map.number("field.inclusion_a12", c.inclusion_value.a12);
    c.inclusion_value.a22 = map.number("field.inclusion_a22", c.inclusion_value.a22);
    for (const auto& [value, lineno] : map.disks) {
        std::istringstream ds(value);
        Disk d;
        if (!(ds >> d.cx >> d.cy >> d.r))
            throw ConfigError("line " + std::to_string(lineno) + ": disk expects 'cx cy r'");
        c.disks.push_back(d);
    }
    c.disks_csv = map.text("field.disks_csv", c.disks_csv);
    c.disk_count = map.integer("field.count", c.disk_count);
    c.radius_min = map.number("field.radius_min", c.radius_min);
    c.radius_max = map.number("field.radius_max", c.radius_max);
    c.disk_margin = map.number("field.margin", c.disk_margin);
    c.epsilon = map.number("field.epsilon", c.epsilon);
    c.cell = map.text("field.cell", c.cell);
    c.cell_a = map.number("field.cell_a", c.cell_a);
    c.cell_b = map.number("field.cell_b", c.cell_b);
    c.cell_resolution = map.integer("field.cell_resolution", c.cell_resolution);

    c.m = map.integer("cover.m", c.m);
    c.star_cells = map.integer("cover.star_cells", c.star_cells);

    c.family = map.text("basis.family", c.family);
    c.k_min = map.integer("basis.k_min", c.k_min);
    c.k_max = map.integer("basis.k_max", c.k_max);
    c.n = map.integer("basis.n", c.n);
    c.snapshots = map.integer("basis.snapshots", c.snapshots);
    c.rank_threshold = map.number("basis.rank_threshold", c.rank_threshold);

    c.f_const = map.number("problem.f", c.f_const);
    c.g0 = map.number("problem.g0", c.g0);
    c.gx = map.number("problem.gx", c.gx);
    c.gy = map.number("problem.gy", c.gy);
    c.overkill_refine = map.integer("problem.overkill_refine", c.overkill_refine);

    c.geometry = map.text("nwidth.geometry", c.geometry);
    c.r = map.number("nwidth.r", c.r);
    c.r_star = map.number("nwidth.r_star", c.r_star);
    c.omega_fraction = map.number("nwidth.omega_fraction", c.omega_fraction);
    c.trace = map.text("nwidth.trace", c.trace);

    c.eps_list = map.numbers("homog.eps_list", c.eps_list);
    c.sweep_n = map.integer("homog.sweep_n", c.sweep_n);
    c.sweep_snapshots = map.integer("homog.sweep_snapshots", c.sweep_snapshots);

    for (const auto& [key, entry] : map.scalars)
        if (!entry.used)
            throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key +
                              "'");

    const std::vector<std::string> kinds = {"study", "nwidth", "homog", "validate", "solve"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        throw ConfigError("scenario.kind must be one of study|nwidth|homog|validate|solve");
    if (c.resolution < 1 || c.m < 1 || c.k_min < 1 || c.k_max < c.k_min || c.n < 1)
        throw ConfigError("numeric parameter outside its documented range");
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "kind = " << c.kind << "\n";
    out << "seed = " << c.seed << "\n";
    out << "workers = " << c.workers << "\n";
    out << "out = " << c.out << "\n";
    out << "\n[domain]\n";
    out << "x0 = " << fmt(c.domain.x0) << "\n";
    out << "y0 = " << fmt(c.domain.y0) << "\n";
    out << "width = " << fmt(c.domain.width) << "\n";
    out << "height = " << fmt(c.domain.height) << "\n";
    out << "resolution = " << c.resolution << "\n";
    out << "\n[field]\n";
    out << "kind = " << c.field_kind << "\n";
    out << "a11 = " << fmt(c.matrix_value.a11) << "\n";
    out << "a12 = " << fmt(c.matrix_value.a12) << "\n";
    out << "a22 = " << fmt(c.matrix_value.a22) << "\n";
    out << "inclusion_hole = " << (c.inclusion_hole ? "true" : "false") << "\n";
    out << "inclusion_a11 = " << fmt(c.inclusion_value.a11) << "\n";
    out << "inclusion_a12 = " << fmt(c.inclusion_value.a12) << "\n";
    out << "inclusion_a22 = " << fmt(c.inclusion_value.a22) << "\n";
    for (const auto& d : c.disks)
        out << "disk = " << fmt(d.cx) << " " << fmt(d.cy) << " " << fmt(d.r) << "\n";
    if (!c.disks_csv.empty()) out << "disks_csv = " << c.disks_csv << "\n";
    out << "count = " << c.disk_count << "\n";
    out << "radius_min = " << fmt(c.radius_min) << "\n";
    out << "radius_max = " << fmt(c.radius_max) << "\n";
    out << "margin = " << fmt(c.disk_margin) << "\n";
    out << "epsilon = " << fmt(c.epsilon) << "\n";
    out << "cell = " << c.cell << "\n";
    out << "cell_a = " << fmt(c.cell_a) << "\n";
    out << "cell_b = " << fmt(c.cell_b) << "\n";
    out << "cell_resolution = " << c.cell_resolution << "\n";
    out << "\n[cover]\n";
    out << "m = " << c.m << "\n";
    out << "star_cells = " << c.star_cells << "\n";
    out << "\n[basis]\n";
    out << "family = " << c.family << "\n";
    out << "k_min = " << c.k_min << "\n";
    out << "k_max = " << c.k_max << "\n";
    out << "n = " << c.n << "\n";
    out << "snapshots = " << c.snapshots << "\n";
    out << "rank_threshold = " << fmt(c.rank_threshold) << "\n";
    out << "\n[problem]\n";
    out << "f = " << fmt(c.f_const) << "\n";
    out << "g0 = " << fmt(c.g0) << "\n";
    out << "gx = " << fmt(c.gx) << "\n";
    out << "gy = " << fmt(c.gy) << "\n";
    out << "overkill_refine = " << c.overkill_refine << "\n";
    out << "\n[nwidth]\n";
    out << "geometry = " << c.geometry << "\n";
    out << "r = " << fmt(c.r) << "\n";
    out << "r_star = " << fmt(c.r_star) << "\n";
    out << "omega_fraction = " << fmt(c.omega_fraction) << "\n";
    out << "trace = " << c.trace << "\n";
    out << "\n[homog]\n";
    out << "eps_list =";
    for (double e : c.eps_list) out << " " << fmt(e);
    out << "\n";
    out << "sweep_n = " << c.sweep_n << "\n";
    out << "sweep_snapshots = " << c.sweep_snapshots << "\n";
    return out.str();
}

namespace {

std::vector<Disk> load_disks_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open disks csv: " + path);
    std::vector<Disk> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Disk d;
        if (!(ls >> d.cx >> d.cy >> d.r))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected cx,cy,r");
        out.push_back(d);
    }
    return out;
}

std::vector<Disk> random_layout(const ScenarioConfig& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Rect& d = c.domain;
    std::uniform_real_distribution<double> px(d.x0 + c.disk_margin, d.x1() - c.disk_margin);
    std::uniform_real_distribution<double> py(d.y0 + c.disk_margin, d.y1() - c.disk_margin);
    std::uniform_real_distribution<double> pr(c.radius_min, c.radius_max);
    std::vector<Disk> out;
    int attempts = 0;
    const int max_attempts = 200000;
    while (static_cast<int>(out.size()) < c.disk_count && attempts < max_attempts) {
        ++attempts;
        Disk cand{px(rng), py(rng), pr(rng)};
        if (cand.cx - cand.r < d.x0 + c.disk_margin || cand.cx + cand.r > d.x1() - c.disk_margin ||
            cand.cy - cand.r < d.y0 + c.disk_margin || cand.cy + cand.r > d.y1() - c.disk_margin)
            continue;
        bool ok = true;
        for (const auto& o : out) {
            const double dx = cand.cx - o.cx, dy = cand.cy - o.cy;
            const double sep = cand.r + o.r + c.disk_margin;
            if (dx * dx + dy * dy < sep * sep) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(cand);
    }
    if (static_cast<int>(out.size()) < c.disk_count)
        throw ConfigError("random layout: could not place the requested disks; "
                          "reduce count or radii");
    return out;
}

} // namespace

CoefficientField build_field(const ScenarioConfig& c, std::uint64_t seed) {
    const int rx = c.resolution, ry = c.resolution;
    if (c.field_kind == "constant") {
        return constant_field(c.matrix_value, c.domain, rx, ry);
    }
    if (c.field_kind == "periodic") {
        return periodic_field(build_unit_cell(c), c.epsilon, c.domain, rx, ry);
    }
    if (c.field_kind == "inclusions") {
        std::vector<Disk> disks = c.disks;
        if (disks.empty() && !c.disks_csv.empty()) disks = load_disks_csv(c.disks_csv);
        if (disks.empty()) disks = random_layout(c, seed);
        const InclusionValue iv = c.inclusion_hole ? InclusionValue::hole()
                                                   : InclusionValue::material(c.inclusion_value);
        return inclusion_field(c.domain, rx, ry, disks, c.matrix_value, iv);
    }
    throw ConfigError("field.kind must be constant|periodic|inclusions");
}

CoefficientField build_unit_cell(const ScenarioConfig& c) {
    const Rect unit{0.0, 0.0, 1.0, 1.0};
    const int r = c.cell_resolution;
    if (c.cell == "laminate") {
        if (r % 2 != 0) throw ConfigError("laminate cell needs an even cell_resolution");
        std::vector<SymMat2> cells(static_cast<std::size_t>(r) * r);
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < r; ++i)
                cells[static_cast<std::size_t>(j) * r + i] =
                    SymMat2::isotropic(i < r / 2 ? c.cell_a : c.cell_b);
        return CoefficientField(unit, r, r, cells);
    }
    if (c.cell == "checkerboard") {
        if (r % 2 != 0) throw ConfigError("checkerboard cell needs an even cell_resolution");
        std::vector<SymMat2> cells(static_cast<std::size_t>(r) * r);
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < r; ++i) {
                const bool first = (2 * i / r + 2 * j / r) % 2 == 0;
                cells[static_cast<std::size_t>(j) * r + i] =
                    SymMat2::isotropic(first ? c.cell_a : c.cell_b);
            }
        return CoefficientField(unit, r, r, cells);
    }
    throw ConfigError("field.cell must be laminate|checkerboard");
}

} // namespace msgfem
