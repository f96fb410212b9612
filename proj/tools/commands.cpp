#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "nlpt/error.hpp"
#include "nlpt/obstacle.hpp"
#include "nlpt/operator.hpp"
#include "nlpt/perron.hpp"
#include "nlpt/superharmonic.hpp"
#include "nlpt/verify.hpp"

namespace nlpt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json point_json(const Point& x, int n) { return n == 1 ? json::array({x[0]}) : json::array({x[0], x[1]}); }

/// Output directory plus the bookkeeping every artifact needs.
class Artifacts {
public:
    Artifacts(fs::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
        fs::create_directories(dir_);
    }

    const std::string& hash() const { return hash_; }
    const std::vector<std::string>& files() const { return files_; }

    /// Field CSV plus a JSON sidecar with the far model, grid and config hash.
    void csv(const std::string& name, const Grid& grid, std::span<const double> values, const FarFieldModel& far,
             const std::string& column = "value") {
        {
            std::ofstream out(dir_ / name, std::ios::binary);
            write_values_csv(out, grid, values, column);
            if (!out) throw NumericalError("cannot write '" + (dir_ / name).string() + "'");
        }
        json side;
        side["config_hash"] = hash_;
        side["far"] = far_to_json(far);
        side["dim"] = grid.dim();
        json box = json::array(), res = json::array();
        for (int a = 0; a < grid.dim(); ++a) {
            box.push_back({grid.bounds(a).lo, grid.bounds(a).hi});
            res.push_back(grid.resolution(a));
        }
        side["box"] = box;
        side["resolution"] = res;
        side["columns"] = grid.dim() == 1 ? json::array({"x", column}) : json::array({"x", "y", column});
        write_json(name + ".json", side, false);
        files_.push_back(name);
    }

    void field(const std::string& name, const FieldFunction& f) { csv(name, f.grid(), f.values(), f.far()); }

    /// JSON report; objects get a config_hash member.
    void json_file(const std::string& name, json j) {
        if (j.is_object()) j["config_hash"] = hash_;
        write_json(name, j, true);
    }

    void write_json(const std::string& name, const json& j, bool record) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << j.dump(2) << '\n';
        if (!out) throw NumericalError("cannot write '" + (dir_ / name).string() + "'");
        if (record) files_.push_back(name);
    }

private:
    fs::path dir_;
    std::string hash_;
    std::vector<std::string> files_;
};

struct Context {
    const RunConfig& config;
    const RunOptions& options;
    Artifacts& out;
    std::ostream& err;
    GridPtr grid;
    RegionMask mask;
    KernelSpec spec;
};

RuleSection csv_rule(const fs::path& path, const std::optional<RuleSection>& fallback, const std::string& what) {
    RuleSection r;
    r.rule = "csv";
    r.path = path;
    std::ifstream side(path.string() + ".json");
    if (side) {
        json j;
        try {
            j = json::parse(side);
        } catch (const json::exception& e) {
            throw ConfigError(what + ": unreadable sidecar '" + path.string() + ".json': " + e.what());
        }
        if (!j.contains("far")) throw ConfigError(what + ": sidecar '" + path.string() + ".json' has no 'far' entry");
        r.far = far_from_json(j["far"], path.string() + ".json:far");
    } else if (fallback) {
        r.far = rule_far(*fallback, KernelSection{}, 1);
    } else {
        throw ConfigError(what + ": '" + path.string() + "' has no sidecar and the config gives no far model");
    }
    return r;
}

void require_admissible(const FarFieldModel& far, const KernelSpec& spec, const std::string& what) {
    try {
        far.require_admissible(spec.s(), spec.p());
    } catch (const ConfigError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

FieldFunction data_field(const Context& ctx) {
    if (ctx.options.field_csv) {
        const RuleSection r = csv_rule(*ctx.options.field_csv, ctx.config.data, "--field");
        require_admissible(*r.far, ctx.spec, "--field");
        return make_field(r, ctx.config, ctx.grid);
    }
    if (!ctx.config.data) throw ConfigError("config: data: section required by '" + ctx.options.command + "'");
    return make_field(*ctx.config.data, ctx.config, ctx.grid);
}

json solve_json(const SolveReport& r) {
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"final_residual", r.final_residual},
            {"energy", r.energy},
            {"stages", r.stages}};
}

int cmd_solve(Context& ctx) {
    const FieldFunction g = data_field(ctx);
    const SolveReport r = solve_dirichlet(g, ctx.mask, ctx.spec, ctx.config.solver);
    ctx.out.field("solution.csv", r.solution);
    ctx.out.json_file("report.json", solve_json(r));
    if (!r.converged) {
        ctx.err << "solve: no convergence after " << r.iterations << " iterations (residual "
                << format_double(r.final_residual) << ")\n";
        return static_cast<int>(ErrorKind::NonConvergence);
    }
    return 0;
}

int cmd_obstacle(Context& ctx) {
    const FieldFunction g = data_field(ctx);
    std::optional<FieldFunction> h;
    if (!ctx.options.no_obstacle) {
        if (ctx.options.obstacle_csv) {
            const RuleSection r = csv_rule(*ctx.options.obstacle_csv, ctx.config.obstacle, "--obstacle");
            h = make_field(r, ctx.config, ctx.grid);
        } else if (ctx.config.obstacle) {
            h = make_field(*ctx.config.obstacle, ctx.config, ctx.grid);
        } else {
            throw ConfigError("config: obstacle: section required (or pass --no-obstacle)");
        }
    }
    std::size_t clipped = 0;
    FieldFunction datum = g;
    if (h) {
        datum = clip_datum(g, *h, ctx.mask);
        for (std::size_t c = 0; c < g.size(); ++c) clipped += datum[c] != g[c];
    }
    const ObstacleProblem problem{datum, h, ctx.mask};
    const ObstacleReport r = solve_obstacle(problem, ctx.spec, ctx.config.solver);
    const ComplementarityReport cr = complementarity_check(r.solve.solution, problem, ctx.spec, 1e-8);
    ctx.out.field("solution.csv", r.solve.solution);
    std::vector<double> active(r.active.begin(), r.active.end());
    ctx.out.csv("active.csv", ctx.mask.grid(), active, FarFieldModel::zero(), "active");
    json j = solve_json(r.solve);
    j["obstacle"] = h.has_value();
    j["clipped_cells"] = clipped;
    j["active_count"] = r.active_count;
    j["variational_margin"] = r.variational_margin;
    j["complementarity"] = {{"pass", cr.pass},
                            {"feasibility", cr.feasibility},
                            {"detached", cr.detached},
                            {"supersolution", cr.supersolution},
                            {"detached_count", cr.detached_count},
                            {"witness", cr.witness},
                            {"tol", 1e-8}};
    ctx.out.json_file("report.json", j);
    if (!r.solve.converged) {
        ctx.err << "obstacle: no convergence (residual " << format_double(r.solve.final_residual) << ")\n";
        return static_cast<int>(ErrorKind::NonConvergence);
    }
    if (!cr.pass) {
        ctx.err << "obstacle: complementarity check failed at cell " << cr.witness << "\n";
        return 1;
    }
    return 0;
}

int cmd_tail(Context& ctx) {
    const FieldFunction f = data_field(ctx);
    const Point z = ctx.options.center.value_or(ctx.config.tail.center);
    const double r = ctx.options.radius.value_or(ctx.config.tail.radius);
    if (!(r > 0.0)) throw ConfigError("tail: radius must be positive");
    const TailEstimate t = tail(f, z, r, ctx.spec);
    ctx.out.json_file("tail.json", {{"value", t.value},
                                    {"resolved", t.resolved},
                                    {"farfield", t.farfield},
                                    {"remainder_bound", t.remainder_bound},
                                    {"center", point_json(z, ctx.grid->dim())},
                                    {"radius", r}});
    return 0;
}

json envelope_json(const PerronEnvelope& e) {
    return {{"classification", to_string(e.classification)},
            {"converged", e.converged},
            {"sweeps", e.sweeps},
            {"trace", e.trace},
            {"increases", e.increases}};
}

struct Probe {
    json report;
    bool diverged = false;
    Classification upper = Classification::Undetermined;
    Classification lower = Classification::Undetermined;
};

/// Poisson-formula integrability test of the datum on the ball (p = 2, a == 1).
Probe perron_probe(const Context& ctx, const FieldFunction& envelope) {
    Probe pr;
    const RunConfig& c = ctx.config;
    std::string reason;
    if (!c.perron.probe) reason = "disabled";
    else if (!(ctx.spec.p() == 2.0 && ctx.spec.is_gagliardo())) reason = "needs p = 2 and the gagliardo kernel";
    else if (c.mask.shape != "ball") reason = "needs a ball domain";
    else if (ctx.options.field_csv || !c.data || c.data->rule == "csv") reason = "needs an analytic value rule";
    if (!reason.empty()) {
        pr.report = {{"available", false}, {"reason", reason}};
        return pr;
    }
    const ValueRule g = make_rule(*c.data);
    const Point c0 = c.mask.center;
    const double R = c.mask.radius;
    const ValueRule plus = [&](const Point& y) { return std::max(g(c0 + R * y), 0.0); };
    const ValueRule minus = [&](const Point& y) { return std::max(-g(c0 + R * y), 0.0); };
    const PoissonOracle oracle = calibrate_poisson(c.grid.n, ctx.spec.s());
    const PoissonValue vp = poisson_formula(oracle, plus, Point{0.0, 0.0});
    const PoissonValue vm = poisson_formula(oracle, minus, Point{0.0, 0.0});
    pr.report = {{"available", true},
                 {"constant", oracle.constant},
                 {"positive_part", {{"divergent", vp.divergent}, {"where", vp.where}, {"shells", vp.shells}}},
                 {"negative_part", {{"divergent", vm.divergent}, {"where", vm.where}, {"shells", vm.shells}}}};
    if (vp.divergent || vm.divergent) {
        pr.diverged = true;
        // Infinite positive mass forces every upper function to +inf, and
        // with finite negative mass the lower envelope follows (and vice versa).
        pr.upper = vp.divergent ? Classification::PlusInfinity : Classification::MinusInfinity;
        pr.lower = vm.divergent ? Classification::MinusInfinity : Classification::PlusInfinity;
        return pr;
    }
    const double value = vp.value - vm.value;
    const auto near = cells_in_ball(*ctx.grid, Ball{c0, 0.5 * ctx.grid->spacing() + 1e-12});
    pr.report["value_at_center"] = value;
    if (!near.empty()) pr.report["envelope_at_center"] = envelope[near.front()];
    return pr;
}

int cmd_perron(Context& ctx) {
    const FieldFunction g = data_field(ctx);
    const PerronReport rep = perron(g, ctx.mask, ctx.spec, ctx.config.perron.tol, ctx.config.solver, ctx.config.perron.options);
    ctx.out.field("upper.csv", rep.upper.field);
    ctx.out.field("lower.csv", rep.lower.field);
    Probe probe = perron_probe(ctx, rep.upper.field);
    Classification cls = rep.classification;
    Classification up = rep.upper.classification, low = rep.lower.classification;
    if (probe.diverged) {
        up = probe.upper;
        low = probe.lower;
        cls = up == low ? up : Classification::Undetermined;
    }
    json j = {{"classification", to_string(cls)},
              {"upper", envelope_json(rep.upper)},
              {"lower", envelope_json(rep.lower)},
              {"upper_classification", to_string(up)},
              {"lower_classification", to_string(low)},
              {"gap", rep.gap},
              {"tol", ctx.config.perron.tol},
              {"probe", probe.report}};
    if (probe.diverged) j["note"] = "the Poisson integral of the datum diverges; the CSV envelopes are those of the grid-truncated datum";
    ctx.out.json_file("perron.json", j);
    const bool diverged = probe.diverged || up == Classification::PlusInfinity || up == Classification::MinusInfinity ||
                          low == Classification::PlusInfinity || low == Classification::MinusInfinity;
    if (diverged) {
        ctx.err << "perron: divergence detected (upper " << to_string(up) << ", lower " << to_string(low) << ")\n";
        return static_cast<int>(ErrorKind::Divergence);
    }
    if (cls != Classification::Harmonic) {
        ctx.err << "perron: envelopes did not settle to a common solution (gap " << format_double(rep.gap) << ")\n";
        return static_cast<int>(ErrorKind::NonConvergence);
    }
    return 0;
}

int cmd_check(Context& ctx) {
    const CheckSection& k = ctx.config.check;
    const std::string property = ctx.options.property.value_or(k.property);
    FieldFunction u = data_field(ctx);
    json j = {{"property", property}, {"field", k.field}, {"tol", k.tol}};
    if (k.field == "solution") {
        const SolveReport r = solve_dirichlet(u, ctx.mask, ctx.spec, ctx.config.solver);
        j["solve"] = solve_json(r);
        if (!r.converged) {
            ctx.out.json_file("check.json", j);
            ctx.err << "check: the Dirichlet solve did not converge\n";
            return static_cast<int>(ErrorKind::NonConvergence);
        }
        u = r.solution;
    }
    bool pass = false, inconclusive = false;
    if (property == "supersolution") {
        const SupersolutionReport r = supersolution_check(u, Assembly(ctx.mask, ctx.spec, u.far()), k.tol);
        pass = r.pass;
        j["worst"] = r.worst;
        j["witness"] = r.witness;
        j["witness_point"] = point_json(ctx.grid->center(r.witness), ctx.grid->dim());
    } else if (property == "superharmonic") {
        SuperharmonicOptions opt;
        opt.trial_count = k.trials;
        opt.tol = k.tol;
        opt.seed = k.seed;
        opt.solver = ctx.config.solver;
        const SuperharmonicReport r = superharmonic_check(u, ctx.mask, ctx.spec, opt);
        pass = r.pass;
        inconclusive = r.inconclusive;
        j["inconclusive"] = r.inconclusive;
        j["trials"] = r.trials;
        j["margin"] = r.margin;
        j["witness_cell"] = r.witness_cell;
        j["witness_domain"] = r.witness_domain;
        j["lsc_defect"] = r.lsc_defect;
    } else if (property == "summability") {
        const SummabilityReport r = summability_report(u, k.ball, ctx.spec);
        pass = !r.divergent;
        j["ball"] = {{"center", point_json(k.ball.center, ctx.grid->dim())}, {"radius", k.ball.radius}};
        j["t_bar"] = std::isfinite(r.bars.t_bar) ? json(r.bars.t_bar) : json("inf");
        j["q_bar"] = r.bars.q_bar;
        j["M"] = r.M;
        j["divergent"] = r.divergent;
        json entries = json::array();
        for (const SummabilityEntry& e : r.entries)
            entries.push_back({{"h", e.h}, {"q", e.q}, {"t", e.t}, {"seminorm", e.seminorm}, {"lt_norm", e.lt_norm}, {"ratio", e.ratio}});
        j["entries"] = entries;
    } else {
        throw ConfigError("check: unknown property '" + property + "' (supersolution, superharmonic, summability)");
    }
    j["pass"] = pass;
    ctx.out.json_file("check.json", j);
    if (inconclusive) return static_cast<int>(ErrorKind::NonConvergence);
    return pass ? 0 : 1;
}

json report_json(const InequalityReport& r, const std::string& hash) {
    json details = json::object();
    for (const auto& [name, value] : r.details) details[name] = value;
    return {{"name", r.name},
            {"estimate", r.estimate},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"constant", r.constant},
            {"resolutions", r.resolutions},
            {"constants", r.constants},
            {"cap", r.cap},
            {"stability_factor", r.stability_factor},
            {"vacuous", r.vacuous},
            {"precondition", r.precondition},
            {"pass", r.pass},
            {"note", r.note},
            {"details", details},
            {"config_hash", hash}};
}

int cmd_verify(Context& ctx) {
    const VerifySection& v = ctx.config.verify;
    const Suite suite = parse_suite(ctx.options.suite.value_or(v.suite));
    SuiteOptions o;
    o.spec = ctx.spec;
    o.resolution = v.resolution;
    o.poisson_resolutions = v.poisson_resolutions;
    o.solver = ctx.config.solver;
    o.threads = resolve_threads(ctx.config, ctx.options);
    if (o.spec.dim() == 2 && (2 * o.resolution > 64 || o.poisson_resolutions.back() > 64))
        throw ConfigError("config: verify.resolution: 2D suites are limited to 64 cells per axis at the finest level");
    const std::vector<InequalityReport> reports = run_suite(suite, o);
    json arr = json::array();
    bool ok = true;
    for (const InequalityReport& r : reports) {
        arr.push_back(report_json(r, ctx.out.hash()));
        ok = ok && r.pass;
        ctx.err << (r.pass ? "PASS " : "FAIL ") << r.name << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
    }
    ctx.out.write_json("verify.json", arr, true);
    if (v.negative_controls) {
        json ctl = json::array();
        for (const InequalityReport& r : negative_controls(o)) {
            ctl.push_back(report_json(r, ctx.out.hash()));
            ok = ok && !r.pass;
            ctx.err << (r.pass ? "CONTROL PASSED (unexpected) " : "control fails as expected: ") << r.name << "\n";
        }
        ctx.out.write_json("controls.json", ctl, true);
    }
    return ok ? 0 : 1;
}

int cmd_poisson(Context& ctx) {
    const RunConfig& c = ctx.config;
    if (!(ctx.spec.p() == 2.0 && ctx.spec.is_gagliardo()))
        throw ConfigError("config: kernel: the Poisson formula needs p = 2 and the gagliardo kernel");
    if (c.mask.shape != "ball") throw ConfigError("config: mask.shape: the Poisson formula needs a ball domain");
    if (!c.data || c.data->rule == "csv" || ctx.options.field_csv)
        throw ConfigError("config: data: the Poisson formula needs an analytic value rule");
    const ValueRule rule = make_rule(*c.data);
    const FieldFunction g = make_field(*c.data, c, ctx.grid);
    const Point c0 = c.mask.center;
    const double R = c.mask.radius;
    const ValueRule unit = [&](const Point& y) { return rule(c0 + R * y); };
    const PoissonOracle oracle = calibrate_poisson(c.grid.n, ctx.spec.s());

    json j = {{"constant", oracle.constant}, {"calibration_residual", oracle.calibration_residual}};
    std::vector<double> values(g.values().begin(), g.values().end());
    for (std::size_t cell : ctx.mask.interior()) {
        const Point x = (1.0 / R) * (ctx.grid->center(cell) - c0);
        const PoissonValue v = poisson_formula(oracle, unit, x);
        if (v.divergent) {
            j["divergent"] = true;
            j["where"] = v.where;
            j["cell"] = cell;
            ctx.out.json_file("poisson.json", j);
            ctx.err << "poisson: the integral diverges (" << v.where << ")\n";
            return static_cast<int>(ErrorKind::Divergence);
        }
        values[cell] = v.value;
    }
    j["divergent"] = false;
    ctx.out.csv("poisson.csv", *ctx.grid, values, g.far());

    int code = 0;
    if (c.poisson.compare) {
        const SolveReport r = solve_dirichlet(g, ctx.mask, ctx.spec, c.solver);
        double scale = 0.0, worst = 0.0;
        for (std::size_t cell = 0; cell < g.size(); ++cell)
            if (!ctx.mask.is_interior(cell)) scale = std::max(scale, std::abs(g[cell]));
        for (std::size_t cell : ctx.mask.interior()) worst = std::max(worst, std::abs(r.solution[cell] - values[cell]));
        j["solve"] = solve_json(r);
        j["data_scale"] = scale;
        j["discrepancy"] = scale > 0.0 ? worst / scale : worst;
        if (!r.converged) code = static_cast<int>(ErrorKind::NonConvergence);
    }
    if (!c.poisson.resolutions.empty()) {
        const double hw = c.grid.box[0].hi;
        bool unit_setup = R == 1.0 && norm(c0) == 0.0;
        for (const Interval& iv : c.grid.box) unit_setup = unit_setup && iv.lo == -hw && iv.hi == hw;
        if (!unit_setup)
            throw ConfigError("config: poisson.resolutions: the refinement study needs the unit ball in a box [-a, a]^n");
        const PoissonComparison cmp = poisson_vs_solver(rule, g.far(), c.grid.n, ctx.spec.s(), c.poisson.resolutions, hw, c.solver);
        j["study"] = {{"resolutions", cmp.resolutions},
                      {"discrepancies", cmp.discrepancies},
                      {"data_scale", cmp.data_scale},
                      {"decreasing", cmp.decreasing},
                      {"pass", cmp.pass}};
        if (!cmp.pass && code == 0) code = 1;
    }
    ctx.out.json_file("poisson.json", j);
    return code;
}

std::string run_hash(const RunConfig& config, const RunOptions& o) {
    json j;
    j["config"] = config.canonical;
    j["command"] = o.command;
    if (o.suite) j["suite"] = *o.suite;
    if (o.property) j["property"] = *o.property;
    if (o.no_obstacle) j["no_obstacle"] = true;
    if (o.center) j["center"] = {(*o.center)[0], (*o.center)[1]};
    if (o.radius) j["radius"] = *o.radius;
    // Imported fields enter through their bytes, not their paths.
    auto digest = [](const fs::path& p) {
        std::string bytes = file_bytes(p);
        std::ifstream side(p.string() + ".json", std::ios::binary);
        if (side) bytes += file_bytes(p.string() + ".json");
        return hex(fnv1a(bytes));
    };
    if (o.field_csv) j["field"] = digest(*o.field_csv);
    if (o.obstacle_csv) j["obstacle_csv"] = digest(*o.obstacle_csv);
    if (config.data && config.data->rule == "csv") j["data_csv"] = digest(config.data->path);
    if (config.obstacle && config.obstacle->rule == "csv") j["obstacle_data_csv"] = digest(config.obstacle->path);
    return hex(fnv1a(j.dump()));
}

}  // namespace

unsigned resolve_threads(const RunConfig& config, const RunOptions& options) {
    if (options.threads) return std::max(1u, *options.threads);
    if (const char* env = std::getenv("NLPT_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) throw ConfigError("NLPT_THREADS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<unsigned>(v);
    }
    return config.threads;
}

int run(const RunConfig& config, const RunOptions& options, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    std::string error;
    std::optional<Artifacts> out;
    unsigned threads = 1;
    try {
        threads = resolve_threads(config, options);
        out.emplace(options.output_dir, run_hash(config, options));
        const GridPtr grid = make_grid(config);
        Context ctx{config, options, *out, err, grid, make_region(config, grid), make_kernel(config, *grid)};
        const std::string& cmd = options.command;
        if (cmd == "solve") code = cmd_solve(ctx);
        else if (cmd == "obstacle") code = cmd_obstacle(ctx);
        else if (cmd == "tail") code = cmd_tail(ctx);
        else if (cmd == "perron") code = cmd_perron(ctx);
        else if (cmd == "check") code = cmd_check(ctx);
        else if (cmd == "verify") code = cmd_verify(ctx);
        else if (cmd == "poisson") code = cmd_poisson(ctx);
        else throw ConfigError("unknown command '" + cmd + "'");
    } catch (const Error& e) {
        error = e.what();
        code = e.exit_code();
    } catch (const fs::filesystem_error& e) {
        error = e.what();
        code = static_cast<int>(ErrorKind::Config);
    }
    if (!error.empty()) err << "error: " << error << "\n";
    if (!out) return code;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"tool", "nlpt"},
                     {"version", kVersion},
                     {"compiler", __VERSION__},
                     {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"command", options.command},
                     {"config_hash", out->hash()},
                     {"config", config.canonical},
                     {"threads", threads},
                     {"wall_time_seconds", wall},
                     {"exit_code", code},
                     {"artifacts", out->files()}};
    if (!error.empty()) manifest["error"] = error;
    try {
        out->write_json("manifest.json", manifest, false);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    }
    return code;
}

}  // namespace nlpt::cli
