#pragma once

#include "slitspec/crack.hpp"

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace slitspec {

/// Triangle mesh (or 1D segment graph for Circle1) with the crack realized by
/// duplicated degrees of freedom along the seam. Crack endpoints interior to
/// the domain are tips and keep a single shared DOF. seam_pairs lists
/// (plus, minus) DOF copies at identical coordinates; "plus" is the side with
/// y > 0, matching the branch cut theta in (-pi, pi) used by the analytic
/// crack-tip fields.
///
/// Immutable after construction; safe to share read-only across threads.
struct SlitMesh {
    Domain domain = Domain::Sphere2;
    CrackSpec crack;  // normalized spec the mesh was built from

    std::vector<Eigen::Vector3d> vertices;      // DOF coordinates (z = 0 when planar)
    std::vector<std::array<int, 3>> triangles;  // empty for Circle1
    std::vector<std::array<int, 2>> segments;   // Circle1 only

    std::vector<std::pair<int, int>> seam_pairs;  // (plus_dof, minus_dof)
    std::vector<int> tip_vertices;

    std::vector<int> component_of;  // per element (triangle or segment)
    int num_components = 0;

    double h_max = 0.0;
    int generation = 0;

    int level = 0;
    double grading = 1.0;

    int dof_count() const { return static_cast<int>(vertices.size()); }
    int element_count() const {
        return static_cast<int>(domain == Domain::Circle1 ? segments.size() : triangles.size());
    }
    /// Distinct undirected DOF-index edges (seam sides count separately).
    std::int64_t edge_count() const;
    /// V - E + F over DOFs: 2 for the closed sphere, 1 for a sphere cut along
    /// one arc and for the (cut or uncut) disk.
    std::int64_t euler_characteristic() const;

    /// Per-DOF crack side: +1 plus copies, -1 minus copies, 0 elsewhere
    /// (tips included).
    std::vector<std::int8_t> dof_sides() const;
    bool is_tip(int dof) const;
};

struct ConditionT {
    bool connected = false;
    int components = 0;
};

/// Connected components of the element adjacency graph; seam sides are
/// non-adjacent because their DOFs differ.
ConditionT check_condition_T(const SlitMesh& mesh);

/// Builds a triangulation of the unit sphere aligned with the crack's great
/// circle (plane y=0) so every crack arc is a union of mesh edges. With
/// grading > 1 elements shrink toward the tips like
/// size ~ h_max * (d/D)^(1-1/grading) down to a floor of order h_max^grading.
SlitMesh build_slit_sphere(const CrackSpec& crack, int level, double grading = 2.0);

/// Planar triangulation of the unit disk with radial slits along the negative
/// x-axis duplicated; r_in = 0 puts the tip at the origin.
SlitMesh build_slit_disk(const CrackSpec& crack, int level, double grading = 2.0);

/// Uniform 1D segment graph on the unit circle; point cuts become duplicated
/// endpoints, positive-length arcs are removed from the graph.
SlitMesh build_slit_circle(const CrackSpec& crack, int segments = 512);

/// Uniform 1-to-4 split (1-to-2 for Circle1) preserving the seam structure.
/// Sphere and circle vertices are reprojected to the unit sphere/circle, disk
/// outer-boundary midpoints to the unit circle. Halves h_max within 5% and
/// preserves the Euler characteristic, component count and tip set.
SlitMesh refine(const SlitMesh& mesh);

/// Assembles a mesh directly from arrays (testing and interop); crack-free.
SlitMesh make_raw_mesh(std::vector<Eigen::Vector3d> vertices,
                       std::vector<std::array<int, 3>> triangles,
                       Domain domain = Domain::Disk2);

/// OFF-style text export (header, "V E F" counts, vertices, faces) plus a
/// JSON sidecar <path>.seams.json with seam_pairs and tip_vertices.
void export_mesh(const SlitMesh& mesh, const std::string& path);

} // namespace slitspec
