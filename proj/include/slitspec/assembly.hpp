#pragma once

#include "slitspec/slitmesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

namespace slitspec {

/// Symmetric bilinear form over mesh DOFs in compressed sparse row layout.
/// Assembled symmetrically, so matrix == matrix^T exactly.
struct SparseSymOperator {
    enum class Kind { Stiffness, Mass, WeightedStiffness };

    Kind kind = Kind::Stiffness;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

    int dimension() const { return static_cast<int>(matrix.rows()); }
    double quadratic_form(const Eigen::VectorXd& v) const { return v.dot(matrix * v); }
};

/// Per-DOF coefficient vector on a SlitMesh.
struct ScalarField {
    Eigen::VectorXd values;
    int mesh_dofs = 0;
    std::string boundary_condition;  // "none", "dirichlet:outer", ...
};

/// P1 stiffness with intrinsic flat-triangle gradients. Seam DOFs are
/// uncoupled across the crack, so the Neumann condition on the crack is
/// natural. Throws AssemblyError naming any degenerate element.
SparseSymOperator assemble_stiffness(const SlitMesh& mesh);

/// Consistent P1 mass (or the diagonally lumped variant). The total mass
/// equals the flat-element area of the mesh.
SparseSymOperator assemble_mass(const SlitMesh& mesh, bool lumped = false);

/// Integral of |grad field|^2 * |x|^(2-N) over a planar mesh with the
/// piecewise-constant P1 gradient. The 1/|x| weight (N = 3) is integrated by
/// recursive triangle subdivision near the origin until the weight varies by
/// less than 1e-3 relative per sub-triangle. N = 2 reduces to the plain
/// Dirichlet energy.
double assemble_weighted_energy(const SlitMesh& mesh, const ScalarField& field, int N);

/// Boundary data extracted on the circle |x| = radius of a disk mesh, split
/// into the connected components of the circle minus the crack. Means are
/// arc-length weighted.
struct BoundaryFlux {
    struct Component {
        double flux = 0.0;    // integral of (u - m) du/dnu
        double energy = 0.0;  // integral of |grad u|^2
        double l2 = 0.0;      // integral of (u - m)^2
        double length = 0.0;
        double mean = 0.0;
    };
    double radius = 0.0;
    std::vector<Component> components;

    double flux_total() const;
    double energy_total() const;
    double l2_total() const;
};

BoundaryFlux boundary_flux(const SlitMesh& mesh, const ScalarField& field, double circle_radius);

/// Restriction matrix P (full DOFs x merged DOFs) identifying the given seam
/// pairs; P^T A P poses the same form on the subspace of fields continuous
/// across those seams.
Eigen::SparseMatrix<double> merge_seam_pairs(const SlitMesh& mesh,
                                             const std::vector<std::pair<int, int>>& pairs);

/// MatrixMarket coordinate format (symmetric) for external cross-checking.
void write_matrix_market(const SparseSymOperator& op, const std::string& path);

/// Samples a callable (point, side) -> value at every DOF, one-sided on seam
/// copies.
template <typename F>
ScalarField sample_on_mesh(const SlitMesh& mesh, F&& f) {
    ScalarField out;
    out.mesh_dofs = mesh.dof_count();
    out.values.resize(mesh.dof_count());
    const auto sides = mesh.dof_sides();
    for (int i = 0; i < mesh.dof_count(); ++i)
        out.values[i] = f(mesh.vertices[i], static_cast<int>(sides[i]));
    return out;
}

} // namespace slitspec
