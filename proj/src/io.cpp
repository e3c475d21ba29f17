#include "dln/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dln {

namespace {
std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}
}  // namespace

std::string format_sci(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", digits, v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto out = open_or_throw(path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << (i + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    auto out = open_or_throw(path);
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
}

void write_vtk_2d(const std::string& path, const FeSpace& space, const FieldVector& u,
                  const std::string& field_name) {
    const Mesh& mesh = space.mesh();
    if (mesh.dimension != 2) throw std::invalid_argument("write_vtk_2d: 2D meshes only");
    auto out = open_or_throw(path);

    out << "# vtk DataFile Version 3.0\n";
    out << "dlnac field snapshot\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices) out << v.x << " " << v.y << " 0\n";

    out << "CELLS " << mesh.triangles.size() << " " << 4 * mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << mesh.triangles.size() << "\n";
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";

    // vertex dofs sit at the even lattice points
    const int n = mesh.n_per_side;
    out << "POINT_DATA " << mesh.vertices.size() << "\n";
    out << "SCALARS " << field_name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            out << u[space.lattice_dof(2 * i, 2 * j)] << "\n";
        }
    }
}

void write_profile_csv(const std::string& path, const FeSpace& space, const FieldVector& u) {
    if (space.mesh().dimension != 1) throw std::invalid_argument("write_profile_csv: 1D only");
    auto out = open_or_throw(path);
    out << "x,u\n";
    for (int i = 0; i < space.dof_count(); ++i) {
        out << format_sci(space.dof_point(i).x) << "," << format_sci(u[i]) << "\n";
    }
}

}  // namespace dln
