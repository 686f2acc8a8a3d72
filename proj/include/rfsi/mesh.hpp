#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rfsi/geometry.hpp"

namespace rfsi {

enum class Subdomain : std::uint8_t { Structure = 0, RotFluid = 1, StatFluid = 2 };

enum class BoundaryTag : std::uint8_t {
    Inlet = 0,
    Outlet = 1,
    Wall = 2,
    AxisGammaIn = 3,      // rigid axis circle inside the rotor
    InterfaceGamma = 4,   // structure/rotational-fluid interface
    InterfaceGammaRs = 5  // sliding interface between fluid subdomains
};

enum class RingSide : std::uint8_t { Rotating = 0, Stationary = 1 };

// Node role bits.
enum NodeFlag : std::uint8_t {
    NodeInStructure = 1 << 0,
    NodeInRotFluid = 1 << 1,
    NodeInStatFluid = 1 << 2,
    NodeOnGamma = 1 << 3,     // structure/fluid interface
    NodeOnRingRot = 1 << 4,
    NodeOnRingStat = 1 << 5,
    NodeOnGammaIn = 1 << 6,
};

struct TaggedEdge {
    int a = 0, b = 0;
    BoundaryTag tag{};
    Subdomain side{};  // subdomain owning the referencing triangles
};

/// Channel-with-rotor geometry. The rotor is a plus-shaped cross of two
/// overlapping rectangles (full tip-to-tip length arm_length, width
/// arm_width) centered at `center`, with the rigid axis realized as a circle
/// of radius axis_radius whose interior is excluded from the structure.
struct ChannelRotorGeometry {
    double channel_length = 0.5;  // L
    double channel_width = 0.2;   // W
    double arm_length = 0.1;      // L_c, tip to tip
    double arm_width = 0.015;     // W_c
    double buffer_radius = 0.075; // r_buf
    double axis_radius = 0.005;   // r_in
    Vec2 center{0.2, 0.1};        // rotation center

    // Throws InvalidGeometry naming the violated nesting constraint.
    void validate() const;
};

/// Structured-resolution knobs; zeros mean "derive from target edge length".
struct MeshResolution {
    int n_wid = 0;       // segments across an arm (even)
    int n_len = 0;       // segments along an arm side
    int ring_nodes = 0;  // force m (multiple of 8); overrides n_wid/n_len
    int n_rf_layers = 0;
    int n_sf_layers = 0;
    int n_annulus = 0;
    // buffer-layer layout tuning
    double rf_grading = 1.0;   // radial layer growth ratio (1 = uniform)
    int rf_ang_profile = 0;    // 0 smoothstep, 1 linear, 2 fast-start
};

struct Mesh {
    std::vector<Vec2> ref;  // reference coordinates, immutable after build
    std::vector<Vec2> cur;  // current coordinates
    std::vector<std::array<int, 3>> tri;  // CCW in reference coords
    std::vector<Subdomain> tri_tag;
    std::vector<TaggedEdge> tagged_edges;
    std::vector<std::uint8_t> node_flags;

    // Gamma_rs rings, ordered counterclockwise from angle 0, equal length m.
    std::vector<int> ring_rot;
    std::vector<int> ring_stat;
    // Plus-outline (Gamma) nodes in counterclockwise walk order.
    std::vector<int> gamma_outline;
    // Current cyclic shift of the sliding interface (unreduced; index pairing
    // uses ring_shift mod m). Rotating node ring_rot[i] is merged with
    // stationary node ring_stat[(ring_shift + i) mod m].
    long long ring_shift = 0;

    // Radial layer fraction of each rotational-fluid node: 0 on Gamma, 1 on
    // the rotating ring. Used to grade the re-matching twist across the
    // buffer. Zero outside the rotational-fluid region.
    std::vector<double> rf_layer_t;

    ChannelRotorGeometry geom;
    Vec2 center;

    int n_nodes() const { return static_cast<int>(ref.size()); }
    int n_tris() const { return static_cast<int>(tri.size()); }
    int ring_m() const { return static_cast<int>(ring_rot.size()); }
    bool flag(int node, NodeFlag f) const { return (node_flags[node] & f) != 0; }
    int stat_of_rot(int ring_index) const {
        const int m = ring_m();
        const int k = static_cast<int>(((ring_shift % m) + m) % m);
        return ring_stat[(k + ring_index) % m];
    }
    double diameter() const;

    double tri_area_ref(int t) const;
    double tri_area_cur(int t) const;
};

struct QualityReport {
    double min_angle_deg = 0.0;
    double min_area = 0.0;
    double max_area = 0.0;
    double area_ratio = 0.0;   // min/max signed area
    double max_aspect = 0.0;   // longest edge * perimeter / (4 * area)
    int nonpositive_count = 0; // triangles with signed area <= 0 (flagged, not thrown)
};

struct ConformityDefect {
    std::string kind;
    std::string detail;
};

struct InterfaceRing {
    std::vector<int> nodes;       // ordered CCW about the rotation center
    std::vector<Vec2> positions;  // current coordinates snapshot
    std::vector<double> angles;   // in [0, 2*pi), strictly increasing mod 2*pi
    RingSide side{};
    Vec2 center;

    int size() const { return static_cast<int>(nodes.size()); }
};

Mesh build_rotor_channel_mesh(const ChannelRotorGeometry& geom, double h,
                              const MeshResolution& res = {});

InterfaceRing extract_ring(const Mesh& mesh, BoundaryTag tag, RingSide side);

QualityReport mesh_quality(const Mesh& mesh, bool current_coords = true);

std::vector<ConformityDefect> validate_conformity(const Mesh& mesh);

// Legacy ASCII VTK export of the mesh with subdomain tags as cell data.
void write_mesh_vtk(const Mesh& mesh, const std::string& path);

}  // namespace rfsi
