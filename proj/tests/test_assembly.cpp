#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "slitspec/assembly.hpp"
#include "slitspec/errors.hpp"
#include "slitspec/monotonicity.hpp"

#include <fstream>
#include <random>
#include <sstream>

using namespace slitspec;

namespace {

double total_mass(const SparseSymOperator& M) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.dimension());
    return ones.dot(M.matrix * ones);
}

SlitMesh reference_triangle_mesh() {
    return make_raw_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
}

} // namespace

TEST_CASE("local stiffness matches the hand-integrated reference") {
    SlitMesh m = reference_triangle_mesh();
    SparseSymOperator A = assemble_stiffness(m);
    const Eigen::Matrix3d expected = oracles::reference_local_stiffness();
    const Eigen::Matrix3d got = Eigen::MatrixXd(A.matrix);
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("constants lie in the stiffness kernel and assembly is exactly symmetric") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(M_PI / 2), 2, 2.0);
    SparseSymOperator A = assemble_stiffness(m);
    Eigen::VectorXd c = Eigen::VectorXd::Constant(m.dof_count(), 3.7);
    CHECK((A.matrix * c).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::SparseMatrix<double, Eigen::RowMajor> diff = A.matrix;
    diff -= Eigen::SparseMatrix<double, Eigen::RowMajor>(A.matrix.transpose());
    CHECK(diff.coeffs().cwiseAbs().maxCoeff() == 0.0);

    // row sums vanish (constants in kernel, componentwise)
    Eigen::VectorXd rows = A.matrix * Eigen::VectorXd::Ones(m.dof_count());
    CHECK(rows.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("mass totals match the closed-form areas") {
    SlitMesh s3 = build_slit_sphere(CrackSpec::sphere_empty(), 3, 1.0);
    CHECK(total_mass(assemble_mass(s3)) ==
          doctest::Approx(oracles::sphere_area()).epsilon(0.005));

    SlitMesh d3 = build_slit_disk(CrackSpec{Domain::Disk2, {}}, 3, 1.0);
    CHECK(total_mass(assemble_mass(d3)) == doctest::Approx(oracles::disk_area()).epsilon(0.005));

    // lumped and consistent masses share their total
    SparseSymOperator Mc = assemble_mass(d3, false), Ml = assemble_mass(d3, true);
    CHECK(total_mass(Ml) == doctest::Approx(total_mass(Mc)).epsilon(1e-12));

    // O(h^2) convergence of the sphere area deficit
    SlitMesh s2 = build_slit_sphere(CrackSpec::sphere_empty(), 2, 1.0);
    const double d2 = oracles::sphere_area() - total_mass(assemble_mass(s2));
    const double d3v = oracles::sphere_area() - total_mass(assemble_mass(s3));
    CHECK(d2 / d3v == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("Galerkin consistency against direct integration") {
    SlitMesh m = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), 2, 1.0);
    SparseSymOperator A = assemble_stiffness(m);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(m.dof_count());
    for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
    const double via_matrix = A.quadratic_form(v);
    const double direct = oracles::direct_p1_energy(m, v);
    CHECK(via_matrix == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("weighted energy") {
    SlitMesh m = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), 2, 1.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    ScalarField v;
    v.mesh_dofs = m.dof_count();
    v.values.resize(m.dof_count());
    for (int i = 0; i < v.values.size(); ++i) v.values[i] = g(rng);

    SUBCASE("constant field gives zero") {
        ScalarField c;
        c.mesh_dofs = m.dof_count();
        c.values = Eigen::VectorXd::Constant(m.dof_count(), 2.0);
        CHECK(assemble_weighted_energy(m, c, 2) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("N = 2 equals the plain quadratic form") {
        SparseSymOperator A = assemble_stiffness(m);
        CHECK(assemble_weighted_energy(m, v, 2) ==
              doctest::Approx(A.quadratic_form(v.values)).epsilon(1e-12));
    }
    SUBCASE("N = 3 weight on the linear field integrates 1/|x|") {
        // u = x has |grad|^2 = 1, so the integral is that of 1/|x| = 2 pi
        ScalarField lin = sample_on_mesh(m, [](const Eigen::Vector3d& p, int) { return p.x(); });
        CHECK(assemble_weighted_energy(m, lin, 3) ==
              doctest::Approx(2.0 * M_PI).epsilon(0.01));
    }
    SUBCASE("N = 3 weight matches the subdivision oracle per element") {
        // triangles touching the origin, straddling it at a distance, and far
        std::vector<std::array<Eigen::Vector2d, 3>> tris = {
            {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)},
            {Eigen::Vector2d(0.05, -0.3), Eigen::Vector2d(0.8, 0.1), Eigen::Vector2d(0.2, 0.7)},
            {Eigen::Vector2d(2, 1), Eigen::Vector2d(3, 1.2), Eigen::Vector2d(2.5, 2)}};
        for (const auto& t : tris) {
            SlitMesh single = make_raw_mesh({{t[0].x(), t[0].y(), 0.0},
                                             {t[1].x(), t[1].y(), 0.0},
                                             {t[2].x(), t[2].y(), 0.0}},
                                            {{{0, 1, 2}}});
            ScalarField lin =
                sample_on_mesh(single, [](const Eigen::Vector3d& p, int) { return p.x(); });
            const double exact = assemble_weighted_energy(single, lin, 3);
            const double oracle = oracles::subdivided_weight_integral(t[0], t[1], t[2]);
            CHECK(exact == doctest::Approx(oracle).epsilon(0.02));
        }
        // the reference triangle at the origin has the known value
        CHECK(assemble_weighted_energy(
                  make_raw_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}}),
                  ScalarField{Eigen::Vector3d(0, 1, 0), 3, ""}, 3) ==
              doctest::Approx(std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0))).epsilon(1e-12));
    }
    SUBCASE("cracktip interpolant energy approximates the mesh radius") {
        const AnalyticField tip = AnalyticField::cracktip2d();
        ScalarField f = sample_on_mesh(
            m, [&](const Eigen::Vector3d& p, int side) { return tip.value(p, side); });
        CHECK(assemble_weighted_energy(m, f, 2) ==
              doctest::Approx(oracles::cracktip_energy_2d(1.0)).epsilon(0.03));
    }
    SUBCASE("non-finite field is rejected") {
        v.values[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(assemble_weighted_energy(m, v, 2), InputError);
    }
}

TEST_CASE("degenerate elements are reported by index") {
    SlitMesh bad = make_raw_mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{{0, 1, 2}}});
    CHECK_THROWS_WITH_AS(assemble_stiffness(bad), "degenerate triangle 0", AssemblyError);
    CHECK_THROWS_AS(assemble_mass(bad), AssemblyError);
}

TEST_CASE("boundary flux on the slit disk") {
    SlitMesh m = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), 3, 2.0);

    SUBCASE("constant field gives zeros") {
        ScalarField c;
        c.mesh_dofs = m.dof_count();
        c.values = Eigen::VectorXd::Constant(m.dof_count(), 5.0);
        BoundaryFlux bf = boundary_flux(m, c, 0.5);
        CHECK(bf.flux_total() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(bf.energy_total() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(bf.l2_total() == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("cracktip interpolant reproduces the closed forms at r = 0.5") {
        const AnalyticField tip = AnalyticField::cracktip2d();
        ScalarField f = sample_on_mesh(
            m, [&](const Eigen::Vector3d& p, int side) { return tip.value(p, side); });
        BoundaryFlux bf = boundary_flux(m, f, 0.5);
        // energy integral over the circle: 1/(2 pi r) * 2 pi r = 1
        CHECK(bf.energy_total() == doctest::Approx(1.0).epsilon(0.03));
        // flux integral: int u u_r = r; l2: int u^2 = 2 r^2
        CHECK(bf.flux_total() == doctest::Approx(0.5).epsilon(0.03));
        CHECK(bf.l2_total() == doctest::Approx(0.5).epsilon(0.03));
        CHECK(bf.components.size() == 1);
        CHECK(bf.components[0].length == doctest::Approx(M_PI).epsilon(1e-6));
        CHECK(std::abs(bf.components[0].mean) <= 1e-4);
    }
    SUBCASE("radius range is enforced") {
        ScalarField c;
        c.mesh_dofs = m.dof_count();
        c.values = Eigen::VectorXd::Zero(m.dof_count());
        CHECK_THROWS_AS(boundary_flux(m, c, 1.5), RangeError);
        CHECK_THROWS_AS(boundary_flux(m, c, 0.0), RangeError);
    }
}

TEST_CASE("seam identification restriction matrix") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(M_PI / 2), 1, 1.0);
    const int n = m.dof_count();
    Eigen::SparseMatrix<double> P = merge_seam_pairs(m, m.seam_pairs);
    CHECK(P.rows() == n);
    CHECK(P.cols() == n - static_cast<int>(m.seam_pairs.size()));
    // P maps the merged constants onto the full constants
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(P.cols());
    CHECK(((P * ones).array() == 1.0).all());
    CHECK_THROWS_AS(merge_seam_pairs(m, {{0, n}}), InputError);
}

TEST_CASE("MatrixMarket dump is parseable") {
    SlitMesh m = reference_triangle_mesh();
    SparseSymOperator A = assemble_stiffness(m);
    const std::string path = "op_dump_test.mtx";
    write_matrix_market(A, path);
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
    int rows = 0, cols = 0, nnz = 0;
    f >> rows >> cols >> nnz;
    CHECK(rows == 3);
    CHECK(cols == 3);
    CHECK(nnz == 6);  // lower triangle of a dense 3x3
    int count = 0;
    int i = 0, j = 0;
    double val = 0;
    while (f >> i >> j >> val) {
        CHECK(i >= j);
        ++count;
    }
    CHECK(count == nnz);
}
