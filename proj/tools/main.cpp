#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "nlpt/error.hpp"

namespace {

nlpt::Point parse_point(const std::vector<double>& v) {
    if (v.empty() || v.size() > 2) throw nlpt::ConfigError("--center needs one or two coordinates");
    return {v[0], v.size() == 2 ? v[1] : 0.0};
}

}  // namespace

int main(int argc, char** argv) {
    using namespace nlpt::cli;
    CLI::App app{"Nonlocal (s,p)-potential theory on uniform grids"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir = ".";
    unsigned threads = 0;
    app.add_option("-c,--config", config_path, "JSON run configuration (defaults when omitted)");
    app.add_option("-o,--output-dir", output_dir, "Directory for CSV/JSON artifacts")->capture_default_str();
    app.add_option("-j,--threads", threads, "Worker threads (overrides NLPT_THREADS and the config)");

    RunOptions opt;
    std::string field, obstacle, suite, property;
    std::vector<double> center;
    double radius = 0.0;

    auto* solve = app.add_subcommand("solve", "Dirichlet problem");
    solve->add_option("--data", field, "Datum CSV replacing the data section");

    auto* obst = app.add_subcommand("obstacle", "Obstacle problem");
    obst->add_option("--data", field, "Datum CSV replacing the data section");
    obst->add_option("--obstacle", obstacle, "Obstacle CSV replacing the obstacle section");
    obst->add_flag("--no-obstacle", opt.no_obstacle, "Solve without an obstacle");

    auto* tail = app.add_subcommand("tail", "Nonlocal tail of a field");
    tail->add_option("--field", field, "Field CSV replacing the data section");
    tail->add_option("--center", center, "Centre z")->expected(1, 2);
    tail->add_option("--radius", radius, "Radius r");

    auto* perron = app.add_subcommand("perron", "Upper and lower Perron envelopes");
    perron->add_option("--data", field, "Datum CSV replacing the data section");

    auto* check = app.add_subcommand("check", "Property checks on a field");
    check->add_option("--property", property, "supersolution | superharmonic | summability")
        ->check(CLI::IsMember({"supersolution", "superharmonic", "summability"}));
    check->add_option("--field", field, "Field CSV replacing the data section");

    auto* verify = app.add_subcommand("verify", "Empirical inequality suites");
    verify->add_option("--suite", suite, "algebraic | caccioppoli | harnack | holder | poisson | blowup | all");

    app.add_subcommand("poisson", "Poisson formula on a ball (p = 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(nlpt::ErrorKind::Config);
    }

    opt.command = app.get_subcommands().front()->get_name();
    opt.output_dir = output_dir;
    if (threads > 0) opt.threads = threads;
    if (!field.empty()) opt.field_csv = field;
    if (!obstacle.empty()) opt.obstacle_csv = obstacle;
    if (!suite.empty()) opt.suite = suite;
    if (!property.empty()) opt.property = property;
    if (tail->count("--radius")) opt.radius = radius;

    try {
        if (!center.empty()) opt.center = parse_point(center);
        std::string text = "{}";
        std::filesystem::path base = std::filesystem::current_path();
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw nlpt::ConfigError("cannot open config '" + config_path + "'");
            std::ostringstream os;
            os << in.rdbuf();
            text = os.str();
            base = std::filesystem::absolute(config_path).parent_path();
        }
        const RunConfig config = parse_config(text, base);
        if (opt.suite) nlpt::parse_suite(*opt.suite);
        return run(config, opt, std::cerr);
    } catch (const nlpt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    }
}
