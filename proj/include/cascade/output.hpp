#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascade/solver.hpp"

namespace cascade {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Legacy ASCII VTK unstructured grid: velocity as point vectors on the vertex
/// subset of the quadratic nodes, pressure as point scalars.
inline void write_vtk(const Mesh& mesh, const MixedField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << "# vtk DataFile Version 3.0\ncascade fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.n_vertices() << " double\n";
    for (const Vec2& v : mesh.vertices) os << fmt17(v.x) << ' ' << fmt17(v.y) << " 0\n";
    os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.n_triangles() << '\n';
    for (int t = 0; t < mesh.n_triangles(); ++t) os << "5\n";
    os << "POINT_DATA " << mesh.n_vertices() << '\n';
    os << "VECTORS velocity double\n";
    for (int v = 0; v < mesh.n_vertices(); ++v)
        os << fmt17(u.velocity[v].x) << ' ' << fmt17(u.velocity[v].y) << " 0\n";
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) os << fmt17(u.pressure[v]) << '\n';
}

/// Full-precision CSV of every Taylor-Hood coefficient.
inline void write_coefficients_csv(const MixedField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << "kind,index,x,y,value_x,value_y\n";
    const DofMap& dm = *u.dofs;
    for (int n = 0; n < dm.n_nodes; ++n)
        os << "v," << n << ',' << fmt17(dm.node_coords[n].x) << ',' << fmt17(dm.node_coords[n].y)
           << ',' << fmt17(u.velocity[n].x) << ',' << fmt17(u.velocity[n].y) << '\n';
    for (int v = 0; v < dm.n_vertices; ++v)
        os << "p," << v << ',' << fmt17(dm.node_coords[v].x) << ',' << fmt17(dm.node_coords[v].y)
           << ',' << fmt17(u.pressure[v]) << ",0\n";
}

/// Flat key = value report block.
inline std::string report_block(const SolveReport& rep) {
    std::ostringstream os;
    os << "flux_in = " << fmt17(rep.flux_in) << '\n';
    os << "flux_out = " << fmt17(rep.flux_out) << '\n';
    os << "mass_balance_gap = " << fmt17(std::abs(rep.flux_out - rep.flux_in)) << '\n';
    os << "pressure_constant = " << fmt17(rep.pressure_constant) << '\n';
    os << "traction_residual = " << fmt17(rep.traction_residual) << '\n';
    os << "traction_residual_minus_p = " << fmt17(rep.traction_residual_minus_p) << '\n';
    os << "periodicity_residual_p = " << fmt17(rep.periodicity_residual_p) << '\n';
    os << "normal_derivative_periodicity = " << fmt17(rep.normal_derivative_periodicity) << '\n';
    for (const auto& [r, v] : rep.velocity_w1r) os << "velocity_w1r_" << r << " = " << fmt17(v) << '\n';
    for (const auto& [r, v] : rep.pressure_lr) os << "pressure_lr_" << r << " = " << fmt17(v) << '\n';
    os << "linear_solver = " << rep.stats.method << '\n';
    os << "linear_solver_iterations = " << rep.stats.iterations << '\n';
    os << "linear_solver_residual = " << fmt17(rep.stats.residual) << '\n';
    os << "system_dim = " << rep.stats.dim << '\n';
    os << "system_nonzeros = " << rep.stats.nonzeros << '\n';
    return os.str();
}

/// One-row CSV form of the report.
inline std::string report_csv(const SolveReport& rep) {
    std::ostringstream hdr, row;
    hdr << "flux_in,flux_out,pressure_constant,traction_residual,traction_residual_minus_p,"
           "periodicity_residual_p,normal_derivative_periodicity";
    row << fmt17(rep.flux_in) << ',' << fmt17(rep.flux_out) << ',' << fmt17(rep.pressure_constant)
        << ',' << fmt17(rep.traction_residual) << ',' << fmt17(rep.traction_residual_minus_p)
        << ',' << fmt17(rep.periodicity_residual_p) << ','
        << fmt17(rep.normal_derivative_periodicity);
    for (const auto& [r, v] : rep.velocity_w1r) {
        hdr << ",velocity_w1r_" << r;
        row << ',' << fmt17(v);
    }
    for (const auto& [r, v] : rep.pressure_lr) {
        hdr << ",pressure_lr_" << r;
        row << ',' << fmt17(v);
    }
    return hdr.str() + "\n" + row.str() + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << text;
}

/// Two-column gnuplot-ready error files (h, error).
inline void write_gnuplot_columns(const std::string& path, const std::vector<double>& h,
                                  const std::vector<double>& e) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    for (size_t k = 0; k < h.size() && k < e.size(); ++k)
        os << fmt17(h[k]) << ' ' << fmt17(e[k]) << '\n';
}

}  // namespace cascade
