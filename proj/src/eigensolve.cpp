#include "slitspec/eigensolve.hpp"
#include "slitspec/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <cstdio>
#include <cstdlib>

namespace slitspec {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

std::vector<int> pattern_components(const RowMat& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> rep(n);
    std::iota(rep.begin(), rep.end(), 0);
    auto find = [&](int x) {
        while (rep[x] != x) x = rep[x] = rep[rep[x]];
        return x;
    };
    for (int i = 0; i < A.outerSize(); ++i)
        for (RowMat::InnerIterator it(A, i); it; ++it)
            rep[find(find(i))] = find(static_cast<int>(it.col()));
    std::vector<int> label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (label[r] < 0) label[r] = next++;
    }
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = label[find(i)];
    return out;
}

struct ZeroModeInfo {
    Eigen::MatrixXd C;   // M-orthonormal per-component constants, n x c
    Eigen::MatrixXd MC;  // M * C
    std::vector<int> labels;
    int count = 0;
};

ZeroModeInfo build_zero_modes(const RowMat& A, const RowMat& M) {
    ZeroModeInfo info;
    info.labels = pattern_components(A);
    info.count = info.labels.empty() ? 0 : 1 + *std::max_element(info.labels.begin(), info.labels.end());
    const int n = static_cast<int>(A.rows());
    info.C.setZero(n, info.count);
    for (int i = 0; i < n; ++i) info.C(i, info.labels[i]) = 1.0;
    info.MC.resize(n, info.count);
    for (int c = 0; c < info.count; ++c) {
        Eigen::VectorXd mc = M * info.C.col(c);
        const double nrm = std::sqrt(info.C.col(c).dot(mc));
        info.C.col(c) /= nrm;
        info.MC.col(c) = mc / nrm;
    }
    return info;
}

void finalize(EigenResult& res, int k) {
    if (static_cast<int>(res.eigenvalues.size()) > k) {
        res.eigenvalues.resize(k);
        res.residuals.resize(k);
        res.eigenvectors.conservativeResize(Eigen::NoChange, k);
    }
    const double lam_k = res.eigenvalues.empty() ? 0.0 : res.eigenvalues.back();
    res.zero_threshold = std::max(1e-8, 1e-6 * std::abs(lam_k));
    res.zero_modes = 0;
    res.lambda1_global = 0.0;
    for (double lam : res.eigenvalues) {
        if (lam < res.zero_threshold) {
            ++res.zero_modes;
        } else {
            res.lambda1_global = lam;
            break;
        }
    }
}

EigenResult dense_solve(const RowMat& A, const RowMat& M, int k) {
    Eigen::MatrixXd Ad(A), Md(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ad + Ad.transpose()),
                                                                 0.5 * (Md + Md.transpose()));
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", {});
    EigenResult res;
    const int kk = std::min<int>(k, static_cast<int>(A.rows()));
    res.eigenvectors.resize(A.rows(), kk);
    for (int i = 0; i < kk; ++i) {
        const double lam = es.eigenvalues()[i];
        Eigen::VectorXd x = es.eigenvectors().col(i);
        x /= std::sqrt(x.dot(Md * x));
        res.eigenvalues.push_back(lam);
        res.eigenvectors.col(i) = x;
        Eigen::VectorXd r = Ad * x - lam * (Md * x);
        res.residuals.push_back(std::sqrt(r.dot(Md.ldlt().solve(r))));
    }
    finalize(res, kk);
    return res;
}

SparseSymOperator slice(const RowMat& A, const std::vector<int>& idx,
                        SparseSymOperator::Kind kind) {
    std::vector<int> inv(A.rows(), -1);
    for (size_t i = 0; i < idx.size(); ++i) inv[idx[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trips;
    for (int r : idx)
        for (RowMat::InnerIterator it(A, r); it; ++it)
            if (inv[it.col()] >= 0) trips.emplace_back(inv[r], inv[it.col()], it.value());
    SparseSymOperator out;
    out.kind = kind;
    out.matrix.resize(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    out.matrix.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace

std::vector<int> components_from_pattern(const SparseSymOperator& A) {
    return pattern_components(A.matrix);
}

EigenResult smallest_eigenpairs(const SparseSymOperator& A, const SparseSymOperator& M, int k,
                                const SolveOptions& opts) {
    const int n = A.dimension();
    if (M.dimension() != n) throw InputError("operator dimensions differ");
    if (k < 1) throw InputError("k must be positive");
    if (k > n) throw InputError("k exceeds the problem size");
    if (M.matrix.rows() == 0) throw InputError("empty mass matrix");

    ZeroModeInfo zero = build_zero_modes(A.matrix, M.matrix);
    if (k < zero.count + 1)
        throw InputError("k must be at least components + 1");

    EigenResult res;
    if (n <= 400) {
        res = dense_solve(A.matrix, M.matrix, k);
    } else {
        const int kk = k - zero.count;  // interior pairs to compute

        // Shifted operator S = A + sigma*M keeps the factorization definite;
        // sigma is a solver internal (1e-3 * trace(M) / dim).
        const double sigma = std::max(1e-3 * M.matrix.diagonal().sum() / n, 1e-300);
        SpMat S = SpMat(A.matrix) + sigma * SpMat(M.matrix);
        Eigen::SimplicialLDLT<SpMat> solver;
        solver.compute(S);
        if (solver.info() != Eigen::Success)
            throw ConvergenceError("shifted operator factorization failed", {});
        SpMat Mc(M.matrix);
        Eigen::SimplicialLDLT<SpMat> msolver;
        msolver.compute(Mc);
        if (msolver.info() != Eigen::Success) throw InputError("mass matrix is not positive definite");

        const int block = std::min({std::max(4, std::min(kk + 2, 8)), n - zero.count, 32});
        const int m_max =
            opts.max_basis > 0 ? opts.max_basis : std::min(n - zero.count, std::max(8 * kk + 48, 120));

        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto random_vec = [&]() {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v[i] = gauss(rng);
            return v;
        };

        Eigen::MatrixXd Q(n, m_max), MQ(n, m_max), H = Eigen::MatrixXd::Zero(m_max, m_max);
        int m = 0;

        auto append = [&](Eigen::VectorXd z) -> bool {
            for (int attempt = 0; attempt < 3; ++attempt) {
                for (int pass = 0; pass < 2; ++pass) {
                    z.noalias() -= zero.C * (zero.MC.transpose() * z);
                    if (m > 0)
                        z.noalias() -= Q.leftCols(m) * (MQ.leftCols(m).transpose() * z);
                }
                Eigen::VectorXd mz = M.matrix * z;
                const double nrm = std::sqrt(std::max(z.dot(mz), 0.0));
                if (nrm > 1e-10) {
                    Q.col(m) = z / nrm;
                    MQ.col(m) = mz / nrm;
                    Eigen::VectorXd aq = A.matrix * Q.col(m);
                    for (int i = 0; i <= m; ++i) {
                        const double hij = Q.col(i).dot(aq);
                        H(i, m) = hij;
                        H(m, i) = hij;
                    }
                    ++m;
                    return true;
                }
                z = random_vec();
            }
            return false;  // basis exhausted
        };

        std::vector<double> best_res;
        bool converged = false;
        Eigen::VectorXd theta;
        Eigen::MatrixXd Y;

        for (int i = 0; i < block && m < m_max; ++i) append(random_vec());
        while (!converged) {
            // Ritz values/vectors from the projected pencil (Q is M-orthonormal)
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m, m));
            theta = es.eigenvalues();
            Y = es.eigenvectors();

            if (m >= kk) {
                best_res.assign(kk, std::numeric_limits<double>::infinity());
                bool all_ok = true;
                for (int i = 0; i < kk; ++i) {
                    Eigen::VectorXd x = Q.leftCols(m) * Y.col(i);
                    Eigen::VectorXd r = A.matrix * x - theta[i] * (M.matrix * x);
                    best_res[i] = std::sqrt(std::max(r.dot(msolver.solve(r)), 0.0));
                    if (!(best_res[i] <= opts.tol)) all_ok = false;
                }
                if (std::getenv("SLITSPEC_DEBUG")) {
                    std::fprintf(stderr, "[lanczos] m=%d theta:", m);
                    for (int i = 0; i < std::min(kk, 6); ++i) std::fprintf(stderr, " %.6g", theta[i]);
                    std::fprintf(stderr, " res:");
                    for (int i = 0; i < std::min(kk, 6); ++i)
                        std::fprintf(stderr, " %.2e", best_res[i]);
                    std::fprintf(stderr, "\n");
                }
                if (all_ok) {
                    converged = true;
                    break;
                }
            }
            if (m >= m_max)
                throw ConvergenceError("eigensolver reached its basis budget", best_res);

            // next Krylov block through the shift-inverted operator
            const int m0 = m;
            const int take = std::min(block, m0);
            bool appended = false;
            for (int i = 0; i < take && m < m_max; ++i) {
                Eigen::VectorXd z = solver.solve(MQ.col(m0 - take + i));
                appended = append(std::move(z)) || appended;
            }
            if (!appended)
                throw ConvergenceError("eigensolver basis exhausted before convergence", best_res);
        }

        res.eigenvectors.resize(n, zero.count + kk);
        for (int c = 0; c < zero.count; ++c) {
            const Eigen::VectorXd& x = zero.C.col(c);
            const double lam = x.dot(A.matrix * x);
            Eigen::VectorXd r = A.matrix * x - lam * (M.matrix * x);
            res.eigenvalues.push_back(lam);
            res.residuals.push_back(std::sqrt(std::max(r.dot(msolver.solve(r)), 0.0)));
            res.eigenvectors.col(c) = x;
        }
        for (int i = 0; i < kk; ++i) {
            res.eigenvalues.push_back(theta[i]);
            res.residuals.push_back(best_res[i]);
            res.eigenvectors.col(zero.count + i) = Q.leftCols(m) * Y.col(i);
        }
        finalize(res, k);
    }

    // First positive eigenvalue restricted to each component.
    if (opts.per_component) {
        res.lambda1_per_component.assign(zero.count, 0.0);
        if (zero.count == 1) {
            res.lambda1_per_component[0] = res.lambda1_global;
        } else {
            for (int c = 0; c < zero.count; ++c) {
                std::vector<int> idx;
                for (int i = 0; i < n; ++i)
                    if (zero.labels[i] == c) idx.push_back(i);
                SparseSymOperator Ac = slice(A.matrix, idx, A.kind);
                SparseSymOperator Mc = slice(M.matrix, idx, M.kind);
                SolveOptions sub = opts;
                sub.per_component = false;
                EigenResult sr = smallest_eigenpairs(Ac, Mc, std::min<int>(2, Ac.dimension()), sub);
                res.lambda1_per_component[c] = sr.lambda1_global;
            }
        }
    }
    return res;
}

double rayleigh_quotient(const SparseSymOperator& A, const SparseSymOperator& M,
                         const Eigen::VectorXd& v) {
    const int n = A.dimension();
    if (v.size() != n) throw InputError("vector length mismatch");
    ZeroModeInfo zero = build_zero_modes(A.matrix, M.matrix);
    Eigen::VectorXd vbar = v - zero.C * (zero.MC.transpose() * v);
    const double den = vbar.dot(M.matrix * vbar);
    const double vnorm = v.dot(M.matrix * v);
    if (!(den > 1e-28 * std::max(vnorm, 1.0)))
        throw DegenerateInputError("field lies in the span of the per-component constants");
    return vbar.dot(A.matrix * vbar) / den;
}

double eigenvalue_scaling(double lambda_unit, double r) {
    if (!(r > 0)) throw RangeError("radius must be positive");
    return lambda_unit / (r * r);
}

} // namespace slitspec
