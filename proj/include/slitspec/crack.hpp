#pragma once

#include <Eigen/Core>
#include <vector>

namespace slitspec {

enum class Domain { Sphere2, Disk2, Circle1 };

/// Closed interval along the crack carrier.
///  - Sphere2: angles along the reference great circle in the plane y=0,
///    parametrized as phi -> (-cos phi, 0, sin phi), phi in (-pi, pi].
///  - Disk2:   radii (r_in, r_out) of a segment on the negative x-axis.
///  - Circle1: angles along the unit circle; start == end marks a point cut.
struct ArcInterval {
    double start = 0.0;
    double end = 0.0;
    double length() const { return end - start; }
};

/// A crack on the unit sphere, the unit disk, or the unit circle, given as a
/// union of closed arcs of the reference carrier. Sphere cracks lie in the
/// single plane y=0, so the coplanar Neumann-cone requirement holds by
/// construction.
struct CrackSpec {
    Domain domain = Domain::Sphere2;
    std::vector<ArcInterval> arcs;

    static CrackSpec sphere_empty();
    /// S_beta: the arc phi in [-beta, beta] of aperture 2*beta. beta = 0 gives
    /// the empty crack, beta = pi the full reference circle.
    static CrackSpec sphere_arc(double beta);
    static CrackSpec sphere_arcs(std::vector<ArcInterval> arcs);
    static CrackSpec sphere_full_circle();
    /// The half-equator [-pi/2, pi/2] minus the given open gaps.
    static CrackSpec half_equator_minus_gaps(const std::vector<ArcInterval>& gaps);

    static CrackSpec disk_slit(double r_in, double r_out);
    static CrackSpec disk_slits(std::vector<ArcInterval> segments);

    static CrackSpec circle_point(double angle);
    static CrackSpec circle_arc(double start, double end);

    /// Validates and canonicalizes: wraps angles, merges touching arcs,
    /// rejects overlaps and degenerate arcs (point cuts allowed on Circle1).
    /// Throws InvalidCrackError.
    CrackSpec normalized() const;

    bool empty() const { return arcs.empty(); }
    double total_length() const;
    /// Sphere2/Circle1: the arcs cover the whole reference circle.
    bool full_circle() const;

    /// Point on the crack carrier at parameter t (angle or radius).
    Eigen::Vector3d carrier_point(double t) const;
    /// True if parameter t lies inside some arc (closed arcs, tolerance eps).
    bool contains(double t, double eps = 1e-12) const;
};

} // namespace slitspec
