#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfsi/config.hpp"
#include "rfsi/timeloop.hpp"

namespace rfsi {

struct ProbeSample {
    double t = 0.0;
    Vec2 u_d;  // tip deformation displacement, rotation removed
};

struct RunSummary {
    long long steps = 0;
    int tip_node = -1;
    std::vector<ProbeSample> probe;
    std::vector<StepStats> stats;
    double final_min_angle = 0.0;
};

/// Structure node farthest from the rotation center on the requested arm
/// (ties break to the smallest node id).
int select_tip_node(const Mesh& mesh, int arm);

/// Tip deformation displacement u_d = R^T (u_s - u_theta) at one node.
Vec2 tip_deformation(const Mesh& mesh, const State& state, int tip_node);

/// Full run: builds the mesh, marches to t_end (or max_steps), writes
/// progress.log, probe.csv, the VTK series and a final checkpoint into outdir.
RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& outdir,
                          std::optional<long long> max_steps = std::nullopt);

struct SweepOutcome {
    std::vector<double> youngs;         // values attempted, ascending
    std::vector<bool> succeeded;
    std::vector<std::string> failures;  // diagnostics for failed runs
    std::filesystem::path csv_path;
};

/// One complete run per Young's modulus on an identical mesh/time grid;
/// failures are recorded and the sweep continues. CSV schema:
/// E,t,ud_x,ud_y,|ud| (header included).
SweepOutcome run_stiffness_sweep(const RunConfig& base, const std::vector<double>& youngs_list,
                                 const std::filesystem::path& outdir);

}  // namespace rfsi
