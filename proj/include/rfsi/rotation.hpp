#pragma once

#include <vector>

#include "rfsi/geometry.hpp"

namespace rfsi {

/// Prescribed rotation of the rotor axis: a piecewise-constant angular
/// velocity schedule about a fixed center. The accumulated angle is kept
/// unreduced (no mod 2*pi) so multi-revolution runs do not drift; reduction
/// happens only where the sliding-interface matching needs it.
struct RotationSpec {
    Vec2 center;
    double theta0 = 0.0;
    std::vector<double> times;   // ascending breakpoints, times[0] == 0
    std::vector<double> omegas;  // omegas[i] active on [times[i], times[i+1])

    static RotationSpec constant(Vec2 center, double omega, double theta0 = 0.0) {
        return RotationSpec{center, theta0, {0.0}, {omega}};
    }

    // Exact integral of the piecewise-constant schedule up to time t.
    double angle(double t) const;

    // Right-continuous value: at a breakpoint the new interval's omega.
    double omega_at(double t) const;

    bool valid() const;
};

Mat2 rotation_matrix(double theta);

// d/dtheta of the rotation matrix.
Mat2 rotation_matrix_derivative(double theta);

// u_theta = (R(theta) - I)(x - center): rigid rotational displacement.
Vec2 rotational_displacement(const Vec2& x_ref, const RotationSpec& spec, double t);
Vec2 rotational_displacement(const Vec2& x_ref, const Vec2& center, double theta);

// u_d = R^T (u_s - u_theta): remove the rigid rotation from a nodal field.
std::vector<Vec2> decompose_displacement(const std::vector<Vec2>& u_s,
                                         const std::vector<Vec2>& x_ref,
                                         const RotationSpec& spec, double t);

// Inverse of decompose_displacement: u_s = u_theta + R u_d.
std::vector<Vec2> recompose_displacement(const std::vector<Vec2>& u_d,
                                         const std::vector<Vec2>& x_ref,
                                         const RotationSpec& spec, double t);

// Prescribed velocity of the rotation boundary: d/dt (R(theta(t)) - I)(x - c)
// = omega * R'(theta) (x - c). Tangential, magnitude |omega| * radius.
Vec2 axis_velocity(const Vec2& x_ref, const RotationSpec& spec, double t);

}  // namespace rfsi
