#include "rfsi/rotation.hpp"

#include <cmath>

namespace rfsi {

bool RotationSpec::valid() const {
    if (times.empty() || times.size() != omegas.size()) return false;
    if (times.front() != 0.0) return false;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) return false;
    return true;
}

double RotationSpec::angle(double t) const {
    double theta = theta0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t_begin = times[i];
        if (t <= t_begin) break;
        const double t_end = (i + 1 < times.size()) ? std::min(times[i + 1], t) : t;
        theta += omegas[i] * (t_end - t_begin);
    }
    return theta;
}

double RotationSpec::omega_at(double t) const {
    double w = omegas.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (t >= times[i]) w = omegas[i];
        else break;
    }
    return w;
}

Mat2 rotation_matrix(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat2 r;
    r.m = {{{c, -s}, {s, c}}};
    return r;
}

Mat2 rotation_matrix_derivative(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Mat2 r;
    r.m = {{{-s, -c}, {c, -s}}};
    return r;
}

Vec2 rotational_displacement(const Vec2& x_ref, const Vec2& center, double theta) {
    const Vec2 d = x_ref - center;
    return rotation_matrix(theta) * d - d;
}

Vec2 rotational_displacement(const Vec2& x_ref, const RotationSpec& spec, double t) {
    return rotational_displacement(x_ref, spec.center, spec.angle(t));
}

std::vector<Vec2> decompose_displacement(const std::vector<Vec2>& u_s,
                                         const std::vector<Vec2>& x_ref,
                                         const RotationSpec& spec, double t) {
    const double theta = spec.angle(t);
    const Mat2 rt = rotation_matrix(theta).transposed();
    std::vector<Vec2> u_d(u_s.size());
    for (std::size_t i = 0; i < u_s.size(); ++i) {
        const Vec2 u_theta = rotational_displacement(x_ref[i], spec.center, theta);
        u_d[i] = rt * (u_s[i] - u_theta);
    }
    return u_d;
}

std::vector<Vec2> recompose_displacement(const std::vector<Vec2>& u_d,
                                         const std::vector<Vec2>& x_ref,
                                         const RotationSpec& spec, double t) {
    const double theta = spec.angle(t);
    const Mat2 r = rotation_matrix(theta);
    std::vector<Vec2> u_s(u_d.size());
    for (std::size_t i = 0; i < u_d.size(); ++i) {
        const Vec2 u_theta = rotational_displacement(x_ref[i], spec.center, theta);
        u_s[i] = u_theta + r * u_d[i];
    }
    return u_s;
}

Vec2 axis_velocity(const Vec2& x_ref, const RotationSpec& spec, double t) {
    const double omega = spec.omega_at(t);
    const double theta = spec.angle(t);
    return (rotation_matrix_derivative(theta) * (x_ref - spec.center)) * omega;
}

}  // namespace rfsi
