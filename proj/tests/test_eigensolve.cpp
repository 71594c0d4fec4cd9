#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slitspec/eigensolve.hpp"
#include "slitspec/errors.hpp"
#include "slitspec/spectra.hpp"

#include <algorithm>
#include <random>

using namespace slitspec;

namespace {

struct Assembled {
    SlitMesh mesh;
    SparseSymOperator A, M;
};

Assembled assembled(const CrackSpec& crack, int level, double grading) {
    Assembled out;
    out.mesh = crack.domain == Domain::Sphere2 ? build_slit_sphere(crack, level, grading)
               : crack.domain == Domain::Disk2 ? build_slit_disk(crack, level, grading)
                                               : build_slit_circle(crack, 512);
    out.A = assemble_stiffness(out.mesh);
    out.M = assemble_mass(out.mesh);
    return out;
}

} // namespace

TEST_CASE("uncut sphere reproduces the spherical-harmonic spectrum") {
    Assembled a = assembled(CrackSpec::sphere_empty(), 3, 1.0);
    EigenResult e = smallest_eigenpairs(a.A, a.M, 5);
    CHECK(e.zero_modes == 1);
    // lambda_1 = 2 with multiplicity 3, next gap at 6
    for (int i = 1; i <= 3; ++i)
        CHECK(e.eigenvalues[i] ==
              doctest::Approx(oracles::sphere_harmonic_eigenvalue(1)).epsilon(0.01));
    CHECK(e.eigenvalues[4] > 5.0);
    CHECK(e.lambda1_global == doctest::Approx(2.0).epsilon(0.01));
    for (double r : e.residuals) CHECK(r <= 1e-8);
    // M-orthonormality
    Eigen::MatrixXd G = e.eigenvectors.transpose() * (a.M.matrix * e.eigenvectors);
    CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("full equator splits into two hemispheres") {
    Assembled a = assembled(CrackSpec::sphere_full_circle(), 3, 1.0);
    EigenResult e = smallest_eigenpairs(a.A, a.M, 4);
    CHECK(e.zero_modes == 2);
    REQUIRE(e.lambda1_per_component.size() == 2);
    // Neumann hemisphere lambda_1 = 2 (even spherical harmonics survive)
    for (double lam : e.lambda1_per_component)
        CHECK(lam == doctest::Approx(2.0).epsilon(0.015));
}

TEST_CASE("slit circle matches the interval closed form") {
    Assembled a = assembled(CrackSpec::circle_point(M_PI), 0, 1.0);
    EigenResult e = smallest_eigenpairs(a.A, a.M, 3);
    CHECK(e.zero_modes == 1);
    CHECK(e.lambda1_global ==
          doctest::Approx(oracles::interval_lambda1(2.0 * M_PI)).epsilon(0.005));
}

TEST_CASE("zero-mode count equals component count across meshes") {
    for (const CrackSpec& crack :
         {CrackSpec::sphere_arc(M_PI / 2), CrackSpec::sphere_empty(),
          CrackSpec::sphere_full_circle()}) {
        Assembled a = assembled(crack, 2, 1.0);
        EigenResult e = smallest_eigenpairs(a.A, a.M, a.mesh.num_components + 2);
        CHECK(e.zero_modes == a.mesh.num_components);
    }
}

TEST_CASE("Rayleigh quotient") {
    Assembled a = assembled(CrackSpec::sphere_arc(M_PI / 2), 2, 2.0);
    EigenResult e = smallest_eigenpairs(a.A, a.M, 3);

    SUBCASE("first eigenvector returns its eigenvalue") {
        const double rq = rayleigh_quotient(a.A, a.M, e.eigenvectors.col(e.zero_modes));
        CHECK(rq == doctest::Approx(e.lambda1_global).epsilon(1e-7));
    }
    SUBCASE("cracktip restriction sits near 3/4") {
        Assembled fine = assembled(CrackSpec::sphere_arc(M_PI / 2), 4, 2.0);
        Eigen::VectorXd f = sample_cracktip_restriction(fine.mesh);
        const double rq = rayleigh_quotient(fine.A, fine.M, f);
        CHECK(rq == doctest::Approx(0.75).epsilon(0.02));
    }
    SUBCASE("homogeneity is exact for power-of-two scalings") {
        Eigen::VectorXd f = sample_cracktip_restriction(a.mesh);
        const double r1 = rayleigh_quotient(a.A, a.M, f);
        for (double c : {2.0, 0.25, -8.0}) {
            const double r2 = rayleigh_quotient(a.A, a.M, (c * f).eval());
            CHECK(r1 == r2);
        }
        const double r3 = rayleigh_quotient(a.A, a.M, (3.0 * f).eval());
        CHECK(r3 == doctest::Approx(r1).epsilon(1e-14));
    }
    SUBCASE("constants are degenerate input") {
        Eigen::VectorXd c = Eigen::VectorXd::Constant(a.mesh.dof_count(), 4.2);
        CHECK_THROWS_AS(rayleigh_quotient(a.A, a.M, c), DegenerateInputError);
    }
}

TEST_CASE("conical eigenvalue scaling") {
    CHECK(eigenvalue_scaling(0.75, 1.0) == 0.75);
    CHECK(eigenvalue_scaling(0.75, 2.0) == 0.1875);
    CHECK(eigenvalue_scaling(2.0, 0.5) == 8.0);
    CHECK_THROWS_AS(eigenvalue_scaling(1.0, 0.0), RangeError);
    CHECK_THROWS_AS(eigenvalue_scaling(1.0, -1.0), RangeError);
}

TEST_CASE("discrete min-max monotonicity for nested seam sets") {
    // G carries the full half-equator seam; F identifies a subset of the
    // pairs, embedding its DOF space into G's.
    Assembled g = assembled(CrackSpec::sphere_arc(M_PI / 2), 2, 1.0);
    std::vector<std::pair<int, int>> subset(g.mesh.seam_pairs.begin(),
                                            g.mesh.seam_pairs.begin() +
                                                g.mesh.seam_pairs.size() / 2);
    Eigen::SparseMatrix<double> P = merge_seam_pairs(g.mesh, subset);
    SparseSymOperator Af, Mf;
    Af.kind = SparseSymOperator::Kind::Stiffness;
    Mf.kind = SparseSymOperator::Kind::Mass;
    Af.matrix = P.transpose() * Eigen::SparseMatrix<double>(g.A.matrix) * P;
    Mf.matrix = P.transpose() * Eigen::SparseMatrix<double>(g.M.matrix) * P;

    EigenResult eg = smallest_eigenpairs(g.A, g.M, 4);
    EigenResult ef = smallest_eigenpairs(Af, Mf, 4);
    for (int k = 0; k < 4; ++k) CHECK(eg.eigenvalues[k] <= ef.eigenvalues[k] + 1e-10);
    // and strictly for the first positive one
    CHECK(eg.eigenvalues[1] < ef.eigenvalues[1]);
}

TEST_CASE("Wirtinger inequality on eigenfunctions and random fields") {
    Assembled a = assembled(CrackSpec::sphere_arc(M_PI / 2), 2, 1.0);
    EigenResult e = smallest_eigenpairs(a.A, a.M, 3);
    const double l1 = e.lambda1_global;

    // equality for the first eigenfunction: int u^2 = (1/l1) int |grad u|^2
    Eigen::VectorXd u1 = e.eigenvectors.col(e.zero_modes);
    const double lhs = u1.dot(a.M.matrix * u1);
    const double rhs = u1.dot(a.A.matrix * u1) / l1;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));

    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd v(a.mesh.dof_count());
        for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
        CHECK(rayleigh_quotient(a.A, a.M, v) >= l1 - 1e-10);
    }
}

TEST_CASE("solve determinism and permutation invariance") {
    Assembled a = assembled(CrackSpec::sphere_arc(M_PI / 2), 2, 1.0);
    SolveOptions opts;
    EigenResult e1 = smallest_eigenpairs(a.A, a.M, 4, opts);
    EigenResult e2 = smallest_eigenpairs(a.A, a.M, 4, opts);
    for (int i = 0; i < 4; ++i) CHECK(e1.eigenvalues[i] == e2.eigenvalues[i]);

    SolveOptions other = opts;
    other.seed = opts.seed + 17;
    EigenResult e3 = smallest_eigenpairs(a.A, a.M, 4, other);
    for (int i = 0; i < 4; ++i)
        CHECK(e1.eigenvalues[i] == doctest::Approx(e3.eigenvalues[i]).epsilon(1e-7));

    // permute the DOFs; eigenvalues must not move beyond tolerance
    std::mt19937 rng(7);
    std::vector<int> perm(a.mesh.dof_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SlitMesh mp = a.mesh;
    for (int i = 0; i < a.mesh.dof_count(); ++i) mp.vertices[perm[i]] = a.mesh.vertices[i];
    for (auto& t : mp.triangles)
        for (int& x : t) x = perm[x];
    for (auto& sp : mp.seam_pairs) sp = {perm[sp.first], perm[sp.second]};
    SparseSymOperator Ap = assemble_stiffness(mp), Mp = assemble_mass(mp);
    EigenResult ep = smallest_eigenpairs(Ap, Mp, 4, opts);
    for (int i = 0; i < 4; ++i)
        CHECK(e1.eigenvalues[i] == doctest::Approx(ep.eigenvalues[i]).epsilon(1e-7));
}

TEST_CASE("solver error paths") {
    Assembled a = assembled(CrackSpec::sphere_full_circle(), 2, 1.0);
    CHECK_THROWS_AS(smallest_eigenpairs(a.A, a.M, 2), InputError);  // k < components + 1
    CHECK_THROWS_AS(smallest_eigenpairs(a.A, a.M, 0), InputError);
    CHECK_THROWS_AS(smallest_eigenpairs(a.A, a.M, a.mesh.dof_count() + 1), InputError);

    SolveOptions tiny;
    tiny.max_basis = 6;
    try {
        smallest_eigenpairs(a.A, a.M, 8, tiny);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(!e.best_residuals().empty());
    }
}
