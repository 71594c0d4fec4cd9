#pragma once

#include "slitspec/assembly.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace slitspec {

constexpr std::uint64_t kDefaultSeed = 912837465ull;

struct SolveOptions {
    double tol = 1e-8;             // residual bound ||Ax - lambda Mx||_{M^-1}
    std::uint64_t seed = kDefaultSeed;
    int max_basis = 0;             // 0 = automatic
    bool per_component = true;     // also solve restricted to each component
};

/// Smallest eigenpairs of A x = lambda M x, zero modes first.
struct EigenResult {
    std::vector<double> eigenvalues;           // ascending
    Eigen::MatrixXd eigenvectors;              // columns, M-orthonormal
    std::vector<double> residuals;             // ||Ax - lambda Mx||_{M^-1}
    int zero_modes = 0;                        // eigenvalues below zero_threshold
    double zero_threshold = 0.0;               // max(1e-8, 1e-6 * lambda_k)
    double lambda1_global = 0.0;               // first eigenvalue above the threshold
    std::vector<double> lambda1_per_component; // first positive eigenvalue per component
};

/// Shift-invert block Lanczos with full reorthogonalization in the M-inner
/// product; per-component constant modes are deflated explicitly and reported
/// as the leading zero eigenvalues. Small problems fall back to a dense
/// generalized solve. Requires k >= components + 1.
/// Throws ConvergenceError (carrying the best residuals) on budget exhaustion.
EigenResult smallest_eigenpairs(const SparseSymOperator& A, const SparseSymOperator& M, int k,
                                const SolveOptions& opts = {});

/// Rayleigh quotient with the componentwise M-weighted mean removed.
/// Throws DegenerateInputError when v lies in the span of the constants.
double rayleigh_quotient(const SparseSymOperator& A, const SparseSymOperator& M,
                         const Eigen::VectorXd& v);

/// Conical scaling law: eigenvalue of the trace of a cone on the sphere of
/// radius r.
double eigenvalue_scaling(double lambda_unit, double r);

/// Connected components of the matrix sparsity graph, labelled in first-seen
/// row order.
std::vector<int> components_from_pattern(const SparseSymOperator& A);

} // namespace slitspec
