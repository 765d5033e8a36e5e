#pragma once

#include <string>
#include <vector>

#include "msgfem/coefficient_field.hpp"

namespace msgfem {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario configuration, a flat [section] key = value text format.
/// Serialization writes every key with 17 significant digits; parse of a
/// serialized config reproduces the struct exactly.
struct ScenarioConfig {
    // [scenario]
    std::string kind = "validate"; // study | nwidth | homog | validate | solve
    std::uint64_t seed = 1;
    int workers = 0; // 0: hardware concurrency
    std::string out = "out";

    // [domain]
    Rect domain{-0.5, -0.5, 1.0, 1.0};
    int resolution = 256; // coefficient cells per unit length

    // [field]
    std::string field_kind = "constant"; // constant | periodic | inclusions
    SymMat2 matrix_value = SymMat2::identity();
    bool inclusion_hole = true;
    SymMat2 inclusion_value = SymMat2::identity();
    std::vector<Disk> disks;      // explicit layout; empty: random layout below
    std::string disks_csv;        // optional CSV of cx,cy,r rows
    int disk_count = 60;          // random layout
    double radius_min = 0.012;
    double radius_max = 0.025;
    double disk_margin = 0.03;    // clearance from dOmega and between disks
    double epsilon = 0.25;        // periodic tiling period
    std::string cell = "laminate"; // laminate | checkerboard
    double cell_a = 1.0;
    double cell_b = 4.0;
    int cell_resolution = 2;

    // [cover]
    int m = 16;
    int star_cells = 6;

    // [basis]
    std::string family = "optimal"; // optimal | polynomial
    int k_min = 1;
    int k_max = 5;
    int n = 6;
    int snapshots = 0; // 0: max(3n, n+10)
    double rank_threshold = 1e-12;

    // [problem]
    double f_const = 0.0;
    double g0 = 0.0, gx = 2.0, gy = -1.0; // g = g0 + gx x + gy y on dOmega
    int overkill_refine = 2;

    // [nwidth]
    std::string geometry = "disks"; // disks | squares
    double r = 0.5;
    double r_star = 1.0;
    double omega_fraction = 0.5; // squares: omega side as a fraction of omega*
    std::string trace = "dirichlet"; // homogenized-trace data: dirichlet | neumann

    // [homog]
    std::vector<double> eps_list{0.25, 0.125, 0.0625};
    int sweep_n = 4;
    int sweep_snapshots = 24;

    bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

/// Build the coefficient field described by the config (seed drives the
/// random inclusion layout).
CoefficientField build_field(const ScenarioConfig& config, std::uint64_t seed);

/// The unit-cell field for periodic scenarios.
CoefficientField build_unit_cell(const ScenarioConfig& config);

} // namespace msgfem
