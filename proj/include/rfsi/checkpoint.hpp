#pragma once

#include <string>

#include "rfsi/timeloop.hpp"

namespace rfsi {

/// Versioned checkpoint: ASCII header (magic "RFSI1") followed by raw
/// little-endian float64 arrays for v, p, u_s, A_u, w.
void write_checkpoint(const std::string& path, const State& state);

/// Reads a checkpoint written for a mesh with the same node count.
State read_checkpoint(const std::string& path, int expected_nodes);

}  // namespace rfsi
