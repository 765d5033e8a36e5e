#pragma once

#include "msgfem/config.hpp"
#include "msgfem/gfem.hpp"
#include "msgfem/homog.hpp"

namespace msgfem {

struct StudyRow {
    std::string family;
    int k = 0;
    int n = 0; // local dimension 2k+1
    double energy_rel = 0.0;
    double l2_rel = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of y against x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct StudyReport {
    std::vector<StudyRow> rows;
    LineFit fit_optimal;
    LineFit fit_polynomial;
    double overkill_gap = 0.0; // self-convergence guard of the reference
    int fine_nx = 0;
    std::uint64_t seed = 0;
};

struct NWidthRow {
    int j = 0;
    double lambda = 0.0;
    double sqrt_lambda = 0.0;
    double lambda_disk_reference = 0.0; // (r/r*)^(2 ceil(j/2)) pattern
};

struct NWidthReport {
    std::vector<NWidthRow> rows;
    double d_n = 1.0;
    std::uint64_t seed = 0;
};

struct HomogReport {
    SymMat2 a0;
    double cell_residual = 0.0;
    SweepTable sweep;
    struct QRow {
        double eps;
        double q;
        double sqrt_lambda_n;
        double diff;
    };
    std::vector<QRow> q_rows;
    std::uint64_t seed = 0;
};

/// Executes one scenario, writing report.csv and summary.txt (and scenario
/// extras) under out_dir. Returns the process exit status.
int run_scenario(const ScenarioConfig& config, const std::string& out_dir, int workers,
                 std::uint64_t seed);

StudyReport run_study(const ScenarioConfig& config, const std::string& out_dir, int workers,
                      std::uint64_t seed);
NWidthReport run_nwidth(const ScenarioConfig& config, const std::string& out_dir,
                        std::uint64_t seed);
HomogReport run_homog(const ScenarioConfig& config, const std::string& out_dir,
                      std::uint64_t seed);
int run_validate(const ScenarioConfig& config, const std::string& out_dir, std::uint64_t seed);
int run_solve(const ScenarioConfig& config, const std::string& out_dir, int workers,
              std::uint64_t seed);

/// Deterministic worker pool: jobs indexed 0..count-1, any scheduling, first
/// failure rethrown with its job index.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

} // namespace msgfem
