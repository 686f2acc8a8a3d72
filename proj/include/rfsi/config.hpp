#pragma once

#include <string>
#include <vector>

#include "rfsi/assembly.hpp"
#include "rfsi/mesh.hpp"
#include "rfsi/rotation.hpp"
#include "rfsi/timeloop.hpp"

namespace rfsi {

struct OutputConfig {
    std::string directory = "out";
    double vtk_cadence = 0.1;        // seconds between snapshots; 0 disables
    int probe_arm = 0;               // arm whose tip is probed (0..3)
    bool write_mesh_snapshots = false;  // per-step mesh VTK (mesh-motion debugging)
    bool dump_matrix = false;           // Matrix Market dump of the first assembled step
};

struct SweepConfig {
    std::vector<double> youngs_values;  // ascending; empty -> the 6-decade default
};

struct RunConfig {
    ChannelRotorGeometry geometry;
    MaterialParams materials;
    RotationSpec rotation;   // center filled from geometry
    FlowBc flow;
    double mesh_h = 0.02;
    int ring_nodes = 0;      // 0 = derive from mesh_h
    int rf_layers = 0;       // buffer layers; 0 = derive from mesh_h
    Discretization disc;
    LoopConfig loop;
    SolverConfig solver;
    OutputConfig output;
    SweepConfig sweep;

    void validate() const;  // throws ValidationError with every violation listed
};

/// Line-oriented sectioned key-value text (grammar in docs/config.md).
/// Collects every parse and validation problem before throwing.
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Canonical serialization: fixed section/key order, %.17g numbers.
/// serialize(load(text)) is idempotent.
std::string serialize_config(const RunConfig& cfg);

/// The Table-1 preset shipped as configs/table1_2d.cfg.
RunConfig default_config();

}  // namespace rfsi
