#include "rfsi/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "rfsi/errors.hpp"

namespace rfsi {

namespace {

void write_vec2s(std::ofstream& os, const std::vector<Vec2>& v) {
    for (const Vec2& u : v) {
        os.write(reinterpret_cast<const char*>(&u.x), sizeof(double));
        os.write(reinterpret_cast<const char*>(&u.y), sizeof(double));
    }
}

void read_vec2s(std::ifstream& is, std::vector<Vec2>& v) {
    for (Vec2& u : v) {
        is.read(reinterpret_cast<char*>(&u.x), sizeof(double));
        is.read(reinterpret_cast<char*>(&u.y), sizeof(double));
    }
}

}  // namespace

void write_checkpoint(const std::string& path, const State& state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "RFSI1\nversion 1\nnodes %d\nstep %lld\ntime %.17g\ntheta %.17g\n"
                  "theta_mesh %.17g\nshift %lld\nEND_HEADER\n",
                  static_cast<int>(state.v.size()), state.step, state.t, state.theta,
                  state.ale.theta_mesh, state.ale.shift);
    os << buf;
    write_vec2s(os, state.v);
    for (double p : state.p) os.write(reinterpret_cast<const char*>(&p), sizeof(double));
    write_vec2s(os, state.u_s);
    write_vec2s(os, state.ale.A_u);
    write_vec2s(os, state.ale.A_D);
    write_vec2s(os, state.ale.u_theta);
    write_vec2s(os, state.ale.w);
    write_vec2s(os, state.ale.u_m);
    if (!os) throw IoError("write failed: " + path);
}

State read_checkpoint(const std::string& path, int expected_nodes) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    std::string line;
    auto next = [&]() {
        if (!std::getline(is, line)) throw ParseError("checkpoint header truncated");
        return line;
    };
    if (next() != "RFSI1") throw ParseError("not an RFSI1 checkpoint");
    int version = 0, nodes = 0;
    long long step = 0, shift = 0;
    double t = 0, theta = 0, theta_mesh = 0;
    if (std::sscanf(next().c_str(), "version %d", &version) != 1 || version != 1)
        throw ParseError("unsupported checkpoint version");
    if (std::sscanf(next().c_str(), "nodes %d", &nodes) != 1)
        throw ParseError("checkpoint missing node count");
    if (std::sscanf(next().c_str(), "step %lld", &step) != 1)
        throw ParseError("checkpoint missing step");
    if (std::sscanf(next().c_str(), "time %lg", &t) != 1)
        throw ParseError("checkpoint missing time");
    if (std::sscanf(next().c_str(), "theta %lg", &theta) != 1)
        throw ParseError("checkpoint missing theta");
    if (std::sscanf(next().c_str(), "theta_mesh %lg", &theta_mesh) != 1)
        throw ParseError("checkpoint missing theta_mesh");
    if (std::sscanf(next().c_str(), "shift %lld", &shift) != 1)
        throw ParseError("checkpoint missing shift");
    if (next() != "END_HEADER") throw ParseError("checkpoint header not terminated");
    if (nodes != expected_nodes)
        throw ParseError("checkpoint node count " + std::to_string(nodes) +
                         " does not match mesh (" + std::to_string(expected_nodes) + ")");

    State s;
    s.step = step;
    s.t = t;
    s.theta = theta;
    s.v.resize(nodes);
    s.p.resize(nodes);
    s.u_s.resize(nodes);
    s.ale = AleState::zero(nodes);
    s.ale.theta_mesh = theta_mesh;
    s.ale.shift = shift;
    read_vec2s(is, s.v);
    for (double& p : s.p) is.read(reinterpret_cast<char*>(&p), sizeof(double));
    read_vec2s(is, s.u_s);
    read_vec2s(is, s.ale.A_u);
    read_vec2s(is, s.ale.A_D);
    read_vec2s(is, s.ale.u_theta);
    read_vec2s(is, s.ale.w);
    read_vec2s(is, s.ale.u_m);
    if (!is) throw ParseError("checkpoint data truncated");
    return s;
}

}  // namespace rfsi
