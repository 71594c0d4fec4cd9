#pragma once

#include "slitspec/assembly.hpp"
#include "slitspec/slitmesh.hpp"

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace slitspec {

/// alpha(N, gamma) = sqrt((N-2)^2 + 4 gamma) - (N-2); the exponent of the
/// normalized energy r^-alpha * E(r).
double alpha_of(int N, double gamma);

struct ExponentParams {
    int N;
    double gamma;
    double alpha;

    ExponentParams(int N_, double gamma_);
};

/// Closed-form field with value and gradient evaluators. The crack is the
/// half-line {y = 0, x <= 0} (2D) or the half-plane containing the z-axis
/// over it (3D); theta runs in (-pi, pi) with the branch cut on the crack.
/// Points on the cut need an explicit side flag (+1 above, -1 below).
class AnalyticField {
public:
    enum class Kind { Cracktip2D, CracktipTimesR, Constant, Custom };

    /// sqrt(2 r / pi) * sin(theta / 2), the normalized planar cracktip.
    static AnalyticField cracktip2d();
    /// Same profile extended constantly in z; crack is the half-plane.
    static AnalyticField cracktip_times_r();
    static AnalyticField constant(double c, int dim = 2);
    /// tip_coeff * cracktip + sum_k coeffs[k] * Re((x + i y)^k). The Re(z^k)
    /// family has zero normal derivative on the slit, so any combination is
    /// an admissible Neumann-harmonic field.
    static AnalyticField custom2d(double tip_coeff, std::vector<double> poly_coeffs);

    double value(const Eigen::Vector3d& p, int side = 0) const;
    Eigen::Vector3d gradient(const Eigen::Vector3d& p, int side = 0) const;

    /// x -> field(rho x) / sqrt(rho). Homogeneous cracktips are fixed points.
    AnalyticField rescaled(double rho) const;

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool z_invariant() const { return dim_ == 3; }

private:
    Kind kind_ = Kind::Constant;
    int dim_ = 2;
    double scale_ = 1.0;  // accumulated rescale factor rho
    double tip_coeff_ = 0.0;
    double const_value_ = 0.0;
    std::vector<double> poly_;

    double base_value(const Eigen::Vector3d& p, int side) const;
    Eigen::Vector3d base_gradient(const Eigen::Vector3d& p, int side) const;
};

AnalyticField rescale_field(const AnalyticField& field, double rho);

/// Sampled normalized-energy profile. E(r) is the weighted Dirichlet energy
/// over B_r, phi = E / r^alpha, dE a second-order finite difference on the
/// (possibly nonuniform) radius grid.
struct EnergyProfile {
    std::vector<double> radii;
    std::vector<double> E;
    std::vector<double> phi;
    std::vector<double> dE;
    std::vector<bool> inequality_ok;  // E <= (1/alpha) r E' + slack
    bool monotone = false;            // phi nondecreasing within slack
    double slack = 0.0;
    double alpha = 0.0;

    double phi_spread() const;  // max phi - min phi
};

/// Adaptive-quadrature profile of an analytic field (absolute tolerance
/// quad_tol per radius). N = 3 requires a z-invariant field and integrates in
/// cylindrical coordinates with the z-slab reduced in closed form.
EnergyProfile energy_profile_analytic(const AnalyticField& field, const ExponentParams& params,
                                      const std::vector<double>& radii, double quad_tol = 1e-8,
                                      double slack = 1e-6);

struct EnergyBoundCheck {
    double radius = 0.0;
    double energy = 0.0;  // unweighted Dirichlet energy over B_radius
    double bound = 0.0;   // omega_N r^(N-1), omega_3 = 4 pi
    double ratio = 0.0;
    bool pass = false;
};

/// Checks the plain energy of cracktip x R against the 4 pi r^2 competitor
/// bound; the exact ratio is 1/8 at every radius.
std::vector<EnergyBoundCheck> unweighted_energy_bound_check(const AnalyticField& field,
                                                            const std::vector<double>& radii,
                                                            double quad_tol = 1e-8);

using BoundaryData = std::function<double(const Eigen::Vector3d&, int side)>;

/// P1 Galerkin solution of the Neumann-harmonic problem on a slit disk with
/// Dirichlet data on the outer circle (both crack sides where the slit meets
/// the boundary). The crack condition is natural.
ScalarField solve_slit_disk_neumann(const SlitMesh& mesh, const BoundaryData& data);

/// Energy profile of a P1 field on a slit disk (N = 2, weight 1). Triangles
/// straddling a sampling circle are split recursively to relative tolerance
/// 1e-4. The slack is supplied by the caller, normally 5x a two-level delta.
EnergyProfile energy_profile_fem(const SlitMesh& mesh, const ScalarField& field,
                                 const ExponentParams& params, const std::vector<double>& radii,
                                 double slack);

struct BoundaryInequality {
    double radius = 0.0;
    double lhs = 0.0;  // weighted bulk energy over B_r
    double rhs = 0.0;  // boundary terms: sum_i r^(2-N) flux_i + (N-2)/(2 r^(N-1)) l2_i
    double slack = 0.0;
    bool pass = false;
};

BoundaryInequality boundary_inequality_check(const SlitMesh& mesh, const ScalarField& field,
                                             const ExponentParams& params, double radius,
                                             double slack);

/// Convenience: log-spaced radii in [lo, hi].
std::vector<double> log_spaced_radii(double lo, double hi, int count);

} // namespace slitspec
