#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlpt/domain.hpp"
#include "nlpt/kernel.hpp"
#include "nlpt/perron.hpp"
#include "nlpt/solver.hpp"
#include "nlpt/verify.hpp"

namespace nlpt::cli {

struct GridSection {
    int n = 1;
    std::vector<Interval> box{{-2.0, 2.0}};
    std::vector<int> resolution{128};
};

struct KernelSection {
    double s = 0.5;
    double p = 2.0;
    double lambda = 1.0;
    /// "gagliardo", "hashed" or "checkerboard".
    std::string coefficient = "gagliardo";
    std::uint64_t seed = 0;
    /// Checkerboard side, or hashing cell size (0 = grid spacing).
    double scale = 0.0;
};

struct MaskSection {
    /// "ball" or "box".
    std::string shape = "ball";
    Point center{0.0, 0.0};
    double radius = 1.0;
    Point lo{-1.0, -1.0};
    Point hi{1.0, 1.0};
    int buffer = 1;
};

/// A named value rule, or a CSV import.
struct RuleSection {
    std::string rule = "constant";
    double value = 1.0;
    double amplitude = 1.0;
    Point center{0.0, 0.0};
    double radius = 1.0;
    double exponent = 0.0;
    bool reflected = false;
    std::filesystem::path path;
    std::optional<FarFieldModel> far;
};

struct TailSection {
    Point center{0.0, 0.0};
    double radius = 1.0;
};

struct PerronSection {
    PerronOptions options;
    /// Agreement tolerance between the envelopes.
    double tol = 1e-6;
    bool probe = true;
};

struct CheckSection {
    std::string property = "supersolution";
    /// "solution" solves the Dirichlet problem first; "data" checks the datum itself.
    std::string field = "solution";
    double tol = 1e-8;
    std::size_t trials = 32;
    std::uint64_t seed = 1;
    Ball ball{{0.0, 0.0}, 0.5};
};

struct VerifySection {
    std::string suite = "all";
    int resolution = 128;
    std::vector<int> poisson_resolutions{128, 256, 512};
    bool negative_controls = false;
};

struct PoissonSection {
    bool compare = true;
    std::vector<int> resolutions;
};

struct RunConfig {
    GridSection grid;
    KernelSection kernel;
    MaskSection mask;
    std::optional<RuleSection> data;
    std::optional<RuleSection> obstacle;
    SolverConfig solver;
    TailSection tail;
    PerronSection perron;
    CheckSection check;
    VerifySection verify;
    PoissonSection poisson;
    unsigned threads = 1;
    /// The validated document with every default filled in, keys sorted.
    nlohmann::json canonical;
};

/// Parses and validates a JSON run configuration. Relative CSV paths resolve
/// against `base`. Parse errors report line and column; validation errors name
/// the key path and the violated constraint.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base = {});

/// 64-bit FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const RunConfig& config);
std::uint64_t fnv1a(const std::string& bytes);

nlohmann::json far_to_json(const FarFieldModel& far);
FarFieldModel far_from_json(const nlohmann::json& j, const std::string& path = "far");

GridPtr make_grid(const RunConfig& config);
KernelSpec make_kernel(const RunConfig& config, const Grid& grid);
RegionMask make_region(const RunConfig& config, const GridPtr& grid);

/// Point-wise value rule (not available for CSV imports).
ValueRule make_rule(const RuleSection& rule);
/// Far model implied by a rule (explicit for CSV imports).
FarFieldModel rule_far(const RuleSection& rule, const KernelSection& kernel, int n);
FieldFunction make_field(const RuleSection& rule, const RunConfig& config, const GridPtr& grid);

}  // namespace nlpt::cli
