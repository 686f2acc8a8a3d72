#include "rfsi/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rfsi/errors.hpp"

namespace rfsi {

void write_vtk_snapshot(const State& state, const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    char buf[160];
    const int n = mesh.n_nodes();
    os << "# vtk DataFile Version 3.0\n";
    os << "rotor channel state t=";
    std::snprintf(buf, sizeof buf, "%.17g", state.t);
    os << buf << "\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << n << " double\n";
    for (const Vec2& p : mesh.cur) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
        os << buf;
    }
    os << "CELLS " << mesh.n_tris() << " " << 4 * mesh.n_tris() << "\n";
    for (const auto& t : mesh.tri) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << mesh.n_tris() << "\n";
    for (int t = 0; t < mesh.n_tris(); ++t) os << "5\n";
    os << "CELL_DATA " << mesh.n_tris() << "\n";
    os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (Subdomain s : mesh.tri_tag) os << static_cast<int>(s) << "\n";
    os << "POINT_DATA " << n << "\n";
    os << "VECTORS velocity double\n";
    for (const Vec2& v : state.v) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", v.x, v.y);
        os << buf;
    }
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double p : state.p) {
        std::snprintf(buf, sizeof buf, "%.17g\n", p);
        os << buf;
    }
    os << "VECTORS displacement double\n";
    for (const Vec2& u : state.u_s) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", u.x, u.y);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

namespace {

std::string next_token(std::istream& is) {
    std::string t;
    is >> t;
    return t;
}

void expect(bool cond, const std::string& what) {
    if (!cond) throw ParseError("VTK reader: " + what);
}

}  // namespace

VtkSnapshot read_vtk_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    std::string line;
    expect(static_cast<bool>(std::getline(is, line)), "empty file");
    expect(line.rfind("# vtk DataFile Version 3.0", 0) == 0, "bad header: " + line);
    std::getline(is, line);  // title
    std::getline(is, line);
    expect(line == "ASCII", "only ASCII supported");
    std::getline(is, line);
    expect(line == "DATASET UNSTRUCTURED_GRID", "only UNSTRUCTURED_GRID supported");

    VtkSnapshot snap;
    std::string tok;
    while (is >> tok) {
        if (tok == "POINTS") {
            int n = 0;
            is >> n >> tok;  // count, type
            snap.points.resize(n);
            for (int i = 0; i < n; ++i) {
                double z;
                is >> snap.points[i].x >> snap.points[i].y >> z;
            }
        } else if (tok == "CELLS") {
            int n = 0, total = 0;
            is >> n >> total;
            snap.cells.resize(n);
            for (int i = 0; i < n; ++i) {
                int k;
                is >> k;
                expect(k == 3, "only triangles supported");
                is >> snap.cells[i][0] >> snap.cells[i][1] >> snap.cells[i][2];
            }
        } else if (tok == "CELL_TYPES") {
            int n = 0;
            is >> n;
            for (int i = 0; i < n; ++i) {
                int t;
                is >> t;
                expect(t == 5, "only VTK_TRIANGLE (5) supported");
            }
        } else if (tok == "CELL_DATA" || tok == "POINT_DATA") {
            int n = 0;
            is >> n;
        } else if (tok == "SCALARS") {
            std::string name, type;
            is >> name >> type;
            int comps = 1;
            if (is.peek() != '\n') {
                std::string maybe = next_token(is);
                if (maybe == "1") comps = 1;
                else expect(maybe == "LOOKUP_TABLE", "unexpected token after SCALARS");
            }
            (void)comps;
            std::string lut;
            is >> lut;  // LOOKUP_TABLE keyword already consumed or "default"
            if (lut == "LOOKUP_TABLE") is >> lut;
            if (name == "subdomain") {
                snap.subdomain.resize(snap.cells.size());
                for (auto& v : snap.subdomain) is >> v;
            } else if (name == "pressure") {
                snap.pressure.resize(snap.points.size());
                for (auto& v : snap.pressure) is >> v;
            } else {
                throw ParseError("VTK reader: unknown scalar field " + name);
            }
        } else if (tok == "VECTORS") {
            std::string name, type;
            is >> name >> type;
            std::vector<Vec2>* target = nullptr;
            if (name == "velocity") target = &snap.velocity;
            else if (name == "displacement") target = &snap.displacement;
            else throw ParseError("VTK reader: unknown vector field " + name);
            target->resize(snap.points.size());
            for (auto& v : *target) {
                double z;
                is >> v.x >> v.y >> z;
            }
        } else {
            throw ParseError("VTK reader: unexpected token " + tok);
        }
    }
    return snap;
}

}  // namespace rfsi
