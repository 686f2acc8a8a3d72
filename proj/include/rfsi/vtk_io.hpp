#pragma once

#include <string>
#include <vector>

#include "rfsi/mesh.hpp"
#include "rfsi/timeloop.hpp"

namespace rfsi {

struct VtkSnapshot {
    std::vector<Vec2> points;
    std::vector<std::array<int, 3>> cells;
    std::vector<int> subdomain;
    std::vector<Vec2> velocity;
    std::vector<double> pressure;
    std::vector<Vec2> displacement;
};

/// Legacy ASCII VTK (DataFile Version 3.0, UNSTRUCTURED_GRID, CELL_TYPES 5)
/// with velocity, pressure and displacement point data and the subdomain tag
/// as cell data. Numbers are printed with 17 significant digits so the
/// engine's own reader round-trips them exactly.
void write_vtk_snapshot(const State& state, const Mesh& mesh, const std::string& path);

VtkSnapshot read_vtk_snapshot(const std::string& path);

}  // namespace rfsi
