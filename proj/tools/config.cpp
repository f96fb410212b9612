#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nlpt/error.hpp"
#include "nlpt/superharmonic.hpp"

namespace nlpt::cli {

using nlohmann::json;

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + path + ": " + msg);
}

/// Reads keys of one JSON object, records the values used (defaults included)
/// and rejects keys nobody asked for.
class Section {
public:
    Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
        if (j_ && !j_->is_object()) fail(path_, "must be an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_ && j_->contains(key); }

    double number(const std::string& key, double def) {
        const json* v = take(key);
        double x = def;
        if (v) {
            if (!v->is_number()) fail(key_path(key), "expected a number");
            x = v->get<double>();
            if (!std::isfinite(x)) fail(key_path(key), "must be finite");
        }
        out_[key] = x;
        return x;
    }

    long long integer(const std::string& key, long long def) {
        const json* v = take(key);
        long long x = def;
        if (v) {
            if (!v->is_number_integer()) fail(key_path(key), "expected an integer");
            x = v->get<long long>();
        }
        out_[key] = x;
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = take(key);
        bool x = def;
        if (v) {
            if (!v->is_boolean()) fail(key_path(key), "expected true or false");
            x = v->get<bool>();
        }
        out_[key] = x;
        return x;
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = take(key);
        std::string x = def;
        if (v) {
            if (!v->is_string()) fail(key_path(key), "expected a string");
            x = v->get<std::string>();
        }
        out_[key] = x;
        return x;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
        const json* v = take(key);
        std::vector<double> x = def;
        if (v) {
            if (!v->is_array()) fail(key_path(key), "expected an array of numbers");
            x.clear();
            for (const json& e : *v) {
                if (!e.is_number()) fail(key_path(key), "expected an array of numbers");
                x.push_back(e.get<double>());
            }
        }
        out_[key] = x;
        return x;
    }

    std::vector<int> integers(const std::string& key, const std::vector<int>& def) {
        const json* v = take(key);
        std::vector<int> x = def;
        if (v) {
            if (v->is_number_integer()) {
                x.assign(1, v->get<int>());
            } else if (v->is_array()) {
                x.clear();
                for (const json& e : *v) {
                    if (!e.is_number_integer()) fail(key_path(key), "expected integers");
                    x.push_back(e.get<int>());
                }
            } else {
                fail(key_path(key), "expected an integer or an array of integers");
            }
        }
        out_[key] = x;
        return x;
    }

    Point point(const std::string& key, const Point& def, int n) {
        const json* v = take(key);
        Point x = def;
        if (v) {
            if (!v->is_array() || static_cast<int>(v->size()) != n)
                fail(key_path(key), "expected " + std::to_string(n) + " coordinates");
            x = Point{0.0, 0.0};
            for (int a = 0; a < n; ++a) {
                if (!(*v)[a].is_number()) fail(key_path(key), "expected numeric coordinates");
                x[a] = (*v)[a].get<double>();
            }
        }
        std::vector<double> c(x.begin(), x.begin() + n);
        out_[key] = c;
        return x;
    }

    const json* raw(const std::string& key) { return take(key); }
    void record(const std::string& key, json value) { out_[key] = std::move(value); }

    Section child(const std::string& key) { return Section(take(key), key_path(key)); }

    /// Rejects unknown keys and returns the canonical object.
    json finish() {
        if (j_)
            for (const auto& [key, value] : j_->items())
                if (!used_.count(key)) fail(key_path(key), "unknown key");
        return out_;
    }

private:
    const json* take(const std::string& key) {
        used_.insert(key);
        if (!j_) return nullptr;
        auto it = j_->find(key);
        if (it == j_->end() || it->is_null()) return nullptr;
        return &*it;
    }

    const json* j_;
    std::string path_;
    std::set<std::string> used_;
    json out_ = json::object();
};

void parse_grid(Section sec, RunConfig& c, json& canon) {
    GridSection& g = c.grid;
    g.n = static_cast<int>(sec.integer("n", 1));
    if (g.n != 1 && g.n != 2) fail(sec.key_path("n"), "dimension must be 1 or 2");
    const json* box = sec.raw("box");
    g.box.assign(g.n, Interval{-2.0, 2.0});
    if (box) {
        if (!box->is_array() || static_cast<int>(box->size()) != g.n)
            fail(sec.key_path("box"), "expected one [lo, hi] pair per axis");
        for (int a = 0; a < g.n; ++a) {
            const json& e = (*box)[a];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                fail(sec.key_path("box"), "expected one [lo, hi] pair per axis");
            g.box[a] = {e[0].get<double>(), e[1].get<double>()};
            if (!(g.box[a].hi > g.box[a].lo)) fail(sec.key_path("box"), "degenerate interval on axis " + std::to_string(a));
        }
    }
    json b = json::array();
    for (const Interval& iv : g.box) b.push_back({iv.lo, iv.hi});
    sec.record("box", b);
    g.resolution = sec.integers("resolution", {g.n == 1 ? 128 : 32});
    if (g.resolution.size() == 1 && g.n == 2) g.resolution.push_back(g.resolution[0]);
    if (static_cast<int>(g.resolution.size()) != g.n) fail(sec.key_path("resolution"), "one value per axis");
    sec.record("resolution", g.resolution);
    for (int r : g.resolution)
        if (r < 4) fail(sec.key_path("resolution"), "must be >= 4 on every axis");
    if (g.n == 1 && g.resolution[0] > 16384)
        fail(sec.key_path("resolution"), "dense assembly is limited to 16384 cells in 1D");
    if (g.n == 2 && (g.resolution[0] > 64 || g.resolution[1] > 64))
        fail(sec.key_path("resolution"), "dense assembly is limited to 64 x 64 cells in 2D");
    canon["grid"] = sec.finish();
}

void parse_kernel(Section sec, RunConfig& c, json& canon) {
    KernelSection& k = c.kernel;
    k.s = sec.number("s", 0.5);
    if (!(k.s >= 0.05 && k.s <= 0.95))
        fail(sec.key_path("s"), num(k.s) + " violates the clamp s in [0.05, 0.95]");
    k.p = sec.number("p", 2.0);
    if (!(k.p >= 1.1 && k.p <= 8.0)) fail(sec.key_path("p"), num(k.p) + " violates the clamp p in [1.1, 8]");
    k.lambda = sec.number("lambda", 1.0);
    if (!(k.lambda >= 1.0)) fail(sec.key_path("lambda"), "ellipticity bound must satisfy lambda >= 1");
    const std::string coef = sec.string("coefficient", "gagliardo");
    // Accepted spellings: "gagliardo", "hashed(SEED)", "checkerboard(SCALE)".
    const auto open = coef.find('(');
    const std::string name = coef.substr(0, open);
    std::string arg;
    if (open != std::string::npos) {
        if (coef.back() != ')') fail(sec.key_path("coefficient"), "malformed '" + coef + "'");
        arg = coef.substr(open + 1, coef.size() - open - 2);
    }
    k.coefficient = name;
    if (name == "gagliardo") {
        if (!arg.empty()) fail(sec.key_path("coefficient"), "gagliardo takes no argument");
    } else if (name == "hashed") {
        std::size_t used = 0;
        try {
            k.seed = std::stoull(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (arg.empty() || used != arg.size()) fail(sec.key_path("coefficient"), "hashed(SEED) needs an integer seed");
    } else if (name == "checkerboard") {
        std::size_t used = 0;
        try {
            k.scale = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (arg.empty() || used != arg.size() || !(k.scale > 0.0))
            fail(sec.key_path("coefficient"), "checkerboard(SCALE) needs a positive scale");
    } else {
        fail(sec.key_path("coefficient"), "unknown coefficient '" + coef + "' (gagliardo, hashed(SEED), checkerboard(SCALE))");
    }
    if (name == "hashed") {
        k.scale = sec.number("cell", 0.0);
        if (k.scale < 0.0) fail(sec.key_path("cell"), "must be >= 0 (0 = grid spacing)");
    }
    canon["kernel"] = sec.finish();
}

void parse_mask(Section sec, RunConfig& c, json& canon) {
    MaskSection& m = c.mask;
    const int n = c.grid.n;
    m.shape = sec.string("shape", "ball");
    if (m.shape == "ball") {
        m.center = sec.point("center", {0.0, 0.0}, n);
        m.radius = sec.number("radius", 1.0);
        if (!(m.radius > 0.0)) fail(sec.key_path("radius"), "must be positive");
    } else if (m.shape == "box") {
        m.lo = sec.point("lo", {-1.0, -1.0}, n);
        m.hi = sec.point("hi", {1.0, 1.0}, n);
        for (int a = 0; a < n; ++a)
            if (!(m.hi[a] > m.lo[a])) fail(sec.key_path("hi"), "must exceed lo on every axis");
    } else {
        fail(sec.key_path("shape"), "unknown shape '" + m.shape + "' (ball, box)");
    }
    m.buffer = static_cast<int>(sec.integer("buffer", 1));
    if (m.buffer < 1) fail(sec.key_path("buffer"), "must be >= 1");
    canon["mask"] = sec.finish();
}

RuleSection parse_rule(Section sec, const RunConfig& c, const std::filesystem::path& base, json& canon,
                       const std::string& name) {
    RuleSection r;
    const int n = c.grid.n;
    const double s = c.kernel.s, p = c.kernel.p;
    r.rule = sec.string("rule", "constant");
    if (r.rule == "constant") {
        r.value = sec.number("value", 1.0);
    } else if (r.rule == "affine") {
        r.amplitude = sec.number("slope", 1.0);
    } else if (r.rule == "bump") {
        r.center = sec.point("center", {1.5, 0.0}, n);
        r.radius = sec.number("radius", 0.3);
        r.amplitude = sec.number("height", 1.0);
        if (!(r.radius > 0.0)) fail(sec.key_path("radius"), "must be positive");
        for (int a = 0; a < n; ++a)
            if (r.center[a] - r.radius < c.grid.box[a].lo || r.center[a] + r.radius > c.grid.box[a].hi)
                fail(sec.key_path("radius"), "the bump support must lie inside the grid box (its far field is zero)");
    } else if (r.rule == "riesz") {
        r.amplitude = sec.number("amplitude", 1.0);
        r.exponent = sec.number("exponent", (s * p - n) / (p - 1.0));
        if (r.exponent == 0.0) fail(sec.key_path("exponent"), "must be nonzero (use the constant rule)");
        if (!((p - 1.0) * r.exponent > -n))
            fail(sec.key_path("exponent"), "|x|^exponent is not locally in L^{p-1}: requires (p-1)*exponent > -n");
    } else if (r.rule == "boundary_singular") {
        r.amplitude = sec.number("amplitude", 1.0);
        r.radius = sec.number("radius", 1.0);
        r.exponent = sec.number("exponent", s - 1.0);
        r.reflected = sec.boolean("reflected", false);
        if (!(r.radius > 0.0)) fail(sec.key_path("radius"), "must be positive");
        if (!((p - 1.0) * r.exponent > -1.0))
            fail(sec.key_path("exponent"),
                 "||x|^2 - R^2|^exponent is not locally in L^{p-1}: requires (p-1)*exponent > -1");
        if (r.reflected && n != 1)
            fail(sec.key_path("reflected"), "the reflected datum has an analytic far field only in 1D");
    } else if (r.rule == "csv") {
        const std::string path = sec.string("path", "");
        if (path.empty()) fail(sec.key_path("path"), "a CSV path is required");
        r.path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base / path;
        if (const json* f = sec.raw("far")) {
            r.far = far_from_json(*f, sec.key_path("far"));
            sec.record("far", far_to_json(*r.far));
        } else {
            std::ifstream side(r.path.string() + ".json");
            if (!side) fail(sec.key_path("far"), "required when '" + r.path.string() + ".json' (sidecar) is absent");
            json j;
            try {
                j = json::parse(side);
            } catch (const json::exception& e) {
                fail(sec.key_path("path"), "unreadable sidecar: " + std::string(e.what()));
            }
            if (!j.contains("far")) fail(sec.key_path("path"), "sidecar has no 'far' entry");
            r.far = far_from_json(j["far"], r.path.string() + ".json:far");
        }
    } else {
        fail(sec.key_path("rule"),
             "unknown rule '" + r.rule + "' (constant, affine, bump, riesz, boundary_singular, csv)");
    }
    // Tail-space membership of the far field.
    const FarFieldModel far = rule_far(r, c.kernel, n);
    if (!far.admissible(s, p)) {
        std::ostringstream os;
        os << "far field " << far.describe() << " is not in the tail space L^{p-1}_{sp}: requires (p-1)*gamma < s*p, got "
           << (p - 1.0) * far.growth() << " >= " << s * p;
        fail(name, os.str());
    }
    canon[name] = sec.finish();
    return r;
}

void parse_solver(Section sec, RunConfig& c, json& canon) {
    SolverConfig& s = c.solver;
    s.residual_tol = sec.number("residual_tol", s.residual_tol);
    s.max_iterations = static_cast<std::size_t>(std::max<long long>(0, sec.integer("max_iterations", 100000)));
    s.smoothing_start = sec.number("smoothing_start", s.smoothing_start);
    s.smoothing_ratio = sec.number("smoothing_ratio", s.smoothing_ratio);
    s.smoothing_floor = sec.number("smoothing_floor", s.smoothing_floor);
    s.contraction = sec.number("contraction", s.contraction);
    const std::string init = sec.string("init", "data_mean");
    if (init == "data_mean") {
        s.init = InitMode::DataMean;
    } else if (init == "zero") {
        s.init = InitMode::Zero;
    } else {
        fail(sec.key_path("init"), "unknown mode '" + init + "' (data_mean, zero)");
    }
    try {
        s.validate();
    } catch (const ConfigError& e) {
        fail("solver", e.what());
    }
    canon["solver"] = sec.finish();
}

bool in_box(const GridSection& g, const Point& x) {
    for (int a = 0; a < g.n; ++a)
        if (x[a] < g.box[a].lo || x[a] > g.box[a].hi) return false;
    return true;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string what = e.what();
        // Drop the library prefix; line and column are recomputed above.
        if (const auto pos = what.find("parse error"); pos != std::string::npos) {
            const auto colon = what.find(": ", pos);
            what = colon == std::string::npos ? what.substr(pos) : what.substr(colon + 2);
        }
        throw ConfigError("config: parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + what);
    }
    Section top(&doc, "");
    RunConfig c;
    json canon = json::object();
    parse_grid(top.child("grid"), c, canon);
    parse_kernel(top.child("kernel"), c, canon);
    parse_mask(top.child("mask"), c, canon);
    if (top.has("data")) c.data = parse_rule(top.child("data"), c, base, canon, "data");
    else top.raw("data");
    if (top.has("obstacle")) c.obstacle = parse_rule(top.child("obstacle"), c, base, canon, "obstacle");
    else top.raw("obstacle");
    parse_solver(top.child("solver"), c, canon);

    {
        Section sec = top.child("tail");
        c.tail.center = sec.point("center", {0.0, 0.0}, c.grid.n);
        c.tail.radius = sec.number("radius", 1.0);
        if (!(c.tail.radius > 0.0)) fail(sec.key_path("radius"), "must be positive");
        if (!in_box(c.grid, c.tail.center)) fail(sec.key_path("center"), "must lie inside the grid box");
        canon["tail"] = sec.finish();
    }
    {
        Section sec = top.child("perron");
        PerronOptions& o = c.perron.options;
        o.schedule = sec.numbers("schedule", o.schedule);
        if (o.schedule.empty() || o.schedule.back() != 1.0)
            fail(sec.key_path("schedule"), "the exhaustion must end at 1 (the whole domain)");
        for (std::size_t k = 0; k < o.schedule.size(); ++k)
            if (!(o.schedule[k] > 0.0) || (k > 0 && !(o.schedule[k] > o.schedule[k - 1])))
                fail(sec.key_path("schedule"), "fractions must increase within (0, 1]");
        o.max_sweeps = static_cast<std::size_t>(std::max<long long>(1, sec.integer("max_sweeps", 50)));
        o.sweep_tol = sec.number("sweep_tol", o.sweep_tol);
        o.divergence_factor = sec.number("divergence_factor", o.divergence_factor);
        o.divergence_window = static_cast<std::size_t>(std::max<long long>(1, sec.integer("divergence_window", 10)));
        c.perron.tol = sec.number("tol", 1e-6);
        c.perron.probe = sec.boolean("probe", true);
        canon["perron"] = sec.finish();
    }
    {
        Section sec = top.child("check");
        CheckSection& k = c.check;
        k.property = sec.string("property", k.property);
        if (k.property != "supersolution" && k.property != "superharmonic" && k.property != "summability")
            fail(sec.key_path("property"), "unknown property '" + k.property + "' (supersolution, superharmonic, summability)");
        k.field = sec.string("field", k.field);
        if (k.field != "solution" && k.field != "data") fail(sec.key_path("field"), "expected 'solution' or 'data'");
        k.tol = sec.number("tol", k.tol);
        k.trials = static_cast<std::size_t>(std::max<long long>(1, sec.integer("trials", 32)));
        k.seed = static_cast<std::uint64_t>(sec.integer("seed", 1));
        k.ball.center = sec.point("center", {0.0, 0.0}, c.grid.n);
        k.ball.radius = sec.number("radius", 0.5);
        if (!(k.ball.radius > 0.0)) fail(sec.key_path("radius"), "must be positive");
        canon["check"] = sec.finish();
    }
    {
        Section sec = top.child("verify");
        VerifySection& v = c.verify;
        v.suite = sec.string("suite", v.suite);
        try {
            parse_suite(v.suite);
        } catch (const ConfigError& e) {
            fail(sec.key_path("suite"), e.what());
        }
        v.resolution = static_cast<int>(sec.integer("resolution", v.resolution));
        if (v.resolution < 16) fail(sec.key_path("resolution"), "must be >= 16");
        v.poisson_resolutions = sec.integers("poisson_resolutions", v.poisson_resolutions);
        if (v.poisson_resolutions.size() < 2) fail(sec.key_path("poisson_resolutions"), "needs at least two resolutions");
        v.negative_controls = sec.boolean("negative_controls", false);
        canon["verify"] = sec.finish();
    }
    {
        Section sec = top.child("poisson");
        c.poisson.compare = sec.boolean("compare", true);
        c.poisson.resolutions = sec.integers("resolutions", {});
        canon["poisson"] = sec.finish();
    }
    const long long threads = top.integer("threads", 1);
    if (threads < 1) fail("threads", "must be >= 1");
    c.threads = static_cast<unsigned>(threads);
    canon["threads"] = threads;
    top.finish();

    // Cross-section checks that need the lattice.
    const GridPtr grid = make_grid(c);
    try {
        make_region(c, grid);
    } catch (const ConfigError& e) {
        fail("mask", e.what());
    }
    c.canonical = std::move(canon);
    return c;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.canonical.dump())));
    return buf;
}

json far_to_json(const FarFieldModel& far) {
    json j;
    switch (far.kind()) {
        case FarFieldModel::Kind::Zero:
            j["kind"] = "zero";
            break;
        case FarFieldModel::Kind::Constant:
            j["kind"] = "constant";
            break;
        case FarFieldModel::Kind::PowerDecay:
            j["kind"] = "power_decay";
            break;
        case FarFieldModel::Kind::Power:
            j["kind"] = "power";
            break;
    }
    j["amplitude"] = far.amplitude();
    j["exponent"] = far.exponent();
    j["parity"] = far.parity() == FarFieldModel::Parity::Odd ? "odd" : "even";
    j["floor"] = std::isfinite(far.floor()) ? json(far.floor()) : json(nullptr);
    j["cap"] = std::isfinite(far.cap()) ? json(far.cap()) : json(nullptr);
    return j;
}

FarFieldModel far_from_json(const json& j, const std::string& path) {
    Section sec(&j, path);
    const std::string kind = sec.string("kind", "zero");
    const double a = sec.number("amplitude", kind == "zero" ? 0.0 : 1.0);
    const double e = sec.number("exponent", 0.0);
    const std::string parity = sec.string("parity", "even");
    if (parity != "even" && parity != "odd") fail(sec.key_path("parity"), "expected 'even' or 'odd'");
    const auto par = parity == "odd" ? FarFieldModel::Parity::Odd : FarFieldModel::Parity::Even;
    FarFieldModel m = FarFieldModel::zero();
    try {
        if (kind == "zero") {
            m = FarFieldModel::zero();
        } else if (kind == "constant") {
            m = FarFieldModel::constant(a);
        } else if (kind == "power_decay") {
            m = FarFieldModel::power_decay(a, e, par);
        } else if (kind == "power") {
            m = FarFieldModel::power(a, e, par);
        } else {
            fail(sec.key_path("kind"), "unknown kind '" + kind + "' (zero, constant, power_decay, power)");
        }
    } catch (const ConfigError& err) {
        if (std::string(err.what()).rfind("config:", 0) == 0) throw;
        fail(path, err.what());
    }
    const json* floor = sec.raw("floor");
    const json* cap = sec.raw("cap");
    if (floor) {
        if (!floor->is_number()) fail(sec.key_path("floor"), "expected a number or null");
        m = m.floored_below(floor->get<double>());
    }
    if (cap) {
        if (!cap->is_number()) fail(sec.key_path("cap"), "expected a number or null");
        m = m.capped_above(cap->get<double>());
    }
    sec.finish();
    return m;
}

GridPtr make_grid(const RunConfig& config) { return build_grid(config.grid.box, config.grid.resolution); }

KernelSpec make_kernel(const RunConfig& config, const Grid& grid) {
    const KernelSection& k = config.kernel;
    const int n = config.grid.n;
    if (k.coefficient == "hashed") {
        const Point origin{grid.bounds(0).lo, n == 2 ? grid.bounds(1).lo : 0.0};
        const double cell = k.scale > 0.0 ? k.scale : grid.spacing();
        return KernelSpec(n, k.s, k.p, k.lambda, CoefficientRule::hashed(k.seed, k.lambda, origin, cell));
    }
    if (k.coefficient == "checkerboard")
        return KernelSpec(n, k.s, k.p, k.lambda, CoefficientRule::checkerboard(k.scale, k.lambda));
    return KernelSpec(n, k.s, k.p, k.lambda, CoefficientRule::constant(1.0));
}

RegionMask make_region(const RunConfig& config, const GridPtr& grid) {
    const MaskSection m = config.mask;
    const int n = config.grid.n;
    if (m.shape == "ball") {
        return make_mask(grid, [m](const Point& x) { return distance(x, m.center) < m.radius; }, m.buffer);
    }
    return make_mask(
        grid,
        [m, n](const Point& x) {
            for (int a = 0; a < n; ++a)
                if (x[a] <= m.lo[a] || x[a] >= m.hi[a]) return false;
            return true;
        },
        m.buffer);
}

ValueRule make_rule(const RuleSection& r) {
    if (r.rule == "constant") {
        const double v = r.value;
        return [v](const Point&) { return v; };
    }
    if (r.rule == "affine") {
        const double a = r.amplitude;
        return [a](const Point& x) { return a * x[0]; };
    }
    if (r.rule == "bump") {
        const Point c = r.center;
        const double rad = r.radius, h = r.amplitude;
        return [c, rad, h](const Point& x) {
            const double t = distance(x, c) / rad;
            return t < 1.0 ? h * std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
        };
    }
    if (r.rule == "riesz") {
        const double a = r.amplitude, e = r.exponent;
        return [a, e](const Point& x) { return a * std::pow(norm(x), e); };
    }
    if (r.rule == "boundary_singular") {
        const double a = r.amplitude, e = r.exponent, R2 = r.radius * r.radius;
        const bool reflected = r.reflected;
        return [a, e, R2, reflected](const Point& x) {
            const double v = a * std::pow(std::abs((x[0] * x[0] + x[1] * x[1]) / R2 - 1.0), e);
            if (!reflected) return v;
            return x[0] > 0.0 ? v : x[0] < 0.0 ? -v : 0.0;
        };
    }
    throw ConfigError("data: rule '" + r.rule + "' has no point-wise formula");
}

FarFieldModel rule_far(const RuleSection& r, const KernelSection& k, int n) {
    (void)k;
    (void)n;
    if (r.rule == "constant") return FarFieldModel::constant(r.value);
    if (r.rule == "affine") return FarFieldModel::power(r.amplitude, 1.0, FarFieldModel::Parity::Odd);
    if (r.rule == "bump") return FarFieldModel::zero();
    if (r.rule == "riesz")
        return r.exponent < 0.0 ? FarFieldModel::power_decay(r.amplitude, -r.exponent)
                                : FarFieldModel::power(r.amplitude, r.exponent);
    if (r.rule == "boundary_singular") {
        // ||y|^2/R^2 - 1|^e is not a pure power; the far model keeps the leading term.
        const double e = r.exponent;
        const auto par = r.reflected ? FarFieldModel::Parity::Odd : FarFieldModel::Parity::Even;
        const double a = r.amplitude * std::pow(r.radius, -2.0 * e);
        if (e == 0.0) return FarFieldModel::constant(r.amplitude);
        return e < 0.0 ? FarFieldModel::power_decay(a, -2.0 * e, par) : FarFieldModel::power(a, 2.0 * e, par);
    }
    return *r.far;
}

FieldFunction make_field(const RuleSection& r, const RunConfig& config, const GridPtr& grid) {
    const FarFieldModel far = rule_far(r, config.kernel, config.grid.n);
    if (r.rule == "csv") {
        std::ifstream in(r.path);
        if (!in) throw ConfigError("config: cannot open '" + r.path.string() + "'");
        return FieldFunction(grid, read_field_csv(in, *grid), far);
    }
    return sample_field(grid, make_rule(r), far);
}

}  // namespace nlpt::cli
