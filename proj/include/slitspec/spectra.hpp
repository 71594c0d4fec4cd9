#pragma once

#include "slitspec/eigensolve.hpp"
#include "slitspec/slitmesh.hpp"

#include <string>
#include <vector>

namespace slitspec {

struct SweepRecord {
    std::string label;
    double param = 0.0;  // beta aperture or gap descriptor
    int level = 0;
    double lambda1 = 0.0;
    double residual = 0.0;
    double seconds = 0.0;
    int components = 1;
};

struct SphereSolve {
    SlitMesh mesh;
    SparseSymOperator stiffness;
    SparseSymOperator mass;
    EigenResult eigs;
    double seconds = 0.0;
};

/// build -> assemble -> solve for the sphere minus S_beta (beta = 0 keeps the
/// sphere uncut).
SphereSolve solve_sphere_arc(double beta, int level, double grading, int k = 8,
                             const SolveOptions& opts = {});
SphereSolve solve_sphere_crack(const CrackSpec& crack, int level, double grading, int k = 8,
                               const SolveOptions& opts = {});

double lambda1_sphere_minus_arc(double beta, int level, double grading = 2.0,
                                const SolveOptions& opts = {});

std::vector<SweepRecord> sweep_betas(const std::vector<double>& betas, int level, double grading,
                                     const SolveOptions& opts = {}, int jobs = 1);

struct LegendreFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> betas;
    std::vector<double> lambdas;
};

/// Least-squares fit of lambda against cos(beta); pure fit, testable on
/// synthetic data.
LegendreFit fit_lambda_vs_cos(const std::vector<double>& betas, const std::vector<double>& lambdas);

/// Computes lambda1 for each beta near pi/2 and fits the slope (target 2/pi)
/// and intercept (target 3/4). Needs at least 3 betas.
LegendreFit legendre_slope(const std::vector<double>& betas, int level, double grading = 2.0,
                           const SolveOptions& opts = {});

struct RigidityRecord {
    std::string label;
    double lambda_fine = 0.0;    // lambda1 at `level`
    double lambda_coarse = 0.0;  // lambda1 at `level - 1`
    double margin = 0.0;         // 3x the two-level delta
    bool exceeds = false;        // lambda_fine > 3/4 + margin
};

/// Cracks K = half-equator minus open gaps; each record tells whether lambda1
/// exceeds 3/4 beyond the discretization margin.
std::vector<RigidityRecord> rigidity_family(const std::vector<std::vector<ArcInterval>>& gap_sets,
                                            int level, double grading = 2.0,
                                            const SolveOptions& opts = {});

/// Samples sqrt(r_cyl) * sin(theta/2) at the DOFs of a slit-sphere mesh,
/// one-sided on the seam.
Eigen::VectorXd sample_cracktip_restriction(const SlitMesh& mesh);

/// M-weighted cosine similarity between an eigenvector and the cracktip
/// restriction, both mean-removed. The mesh must be the S_{pi/2} family.
double compare_to_cracktip(const Eigen::VectorXd& eigvec, const SlitMesh& mesh,
                           const SparseSymOperator& mass);

/// Closed form (pi / length)^2 for the first positive Neumann eigenvalue of
/// an interval of the given length.
double circle_arc_lambda1(double length);

/// Rate-fitted Richardson extrapolation from three levels (coarse, mid, fine).
struct Richardson {
    double value = 0.0;  // extrapolated
    double rate = 0.0;   // fitted exponent p in e ~ C h^p
};
Richardson richardson_extrapolate(double coarse, double mid, double fine);

void write_sweep_csv(const std::vector<SweepRecord>& records, const std::string& path);

} // namespace slitspec
