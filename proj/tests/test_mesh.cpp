#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slitspec/errors.hpp"
#include "slitspec/slitmesh.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace slitspec;

namespace {

const double kHalf = M_PI / 2;

// each interior edge of a consistently oriented mesh is used once per direction
bool orientation_consistent(const SlitMesh& m) {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k)
            if (++directed[{t[k], t[(k + 1) % 3]}] > 1) return false;
    return true;
}

} // namespace

TEST_CASE("crack normalization merges touching arcs and rejects overlap") {
    CrackSpec touching = CrackSpec::sphere_arcs({{-0.5, 0.0}, {0.0, 0.5}});
    CHECK(touching.normalized().arcs.size() == 1);
    CHECK(touching.normalized().total_length() == doctest::Approx(1.0));

    CHECK_THROWS_AS(CrackSpec::sphere_arcs({{-0.5, 0.1}, {0.0, 0.5}}).normalized(),
                    InvalidCrackError);
    CHECK_THROWS_AS(CrackSpec::sphere_arcs({{0.2, 0.2}}).normalized(), InvalidCrackError);
    CHECK_THROWS_AS(CrackSpec::disk_slits({{0.1, 0.5}, {0.4, 0.8}}).normalized(),
                    InvalidCrackError);
    CHECK_THROWS_AS(CrackSpec::disk_slit(0.2, 1.2).normalized(), InvalidCrackError);
    CHECK_THROWS_AS(CrackSpec::disk_slit(0.5, 0.5).normalized(), InvalidCrackError);

    // point cuts are legal on the circle only
    CHECK(CrackSpec::circle_point(M_PI).normalized().arcs.size() == 1);

    // wrap-around merging
    CrackSpec wrap = CrackSpec::sphere_arcs({{M_PI - 0.3, M_PI}, {-M_PI, -M_PI + 0.4}});
    CHECK(wrap.normalized().arcs.size() == 1);
    CHECK(wrap.normalized().total_length() == doctest::Approx(0.7));

    CHECK(CrackSpec::sphere_full_circle().normalized().full_circle());
}

TEST_CASE("half-equator slit sphere at level 0") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(kHalf), 0, 1.0);
    CHECK(!m.seam_pairs.empty());
    CHECK(m.euler_characteristic() == 1);
    CHECK(m.num_components == 1);
    REQUIRE(m.tip_vertices.size() == 2);
    // tips are the poles (0, 0, +-1) of the crack great circle
    std::set<double> zs;
    for (int t : m.tip_vertices) {
        CHECK(m.vertices[t].x() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(m.vertices[t].y() == 0.0);
        zs.insert(m.vertices[t].z());
    }
    CHECK(*zs.begin() == doctest::Approx(-1.0));
    CHECK(*zs.rbegin() == doctest::Approx(1.0));
    // tips never appear in a seam pair
    for (const auto& [p, q] : m.seam_pairs) {
        CHECK(!m.is_tip(p));
        CHECK(!m.is_tip(q));
    }
}

TEST_CASE("uncut sphere and full equator") {
    SlitMesh uncut = build_slit_sphere(CrackSpec::sphere_empty(), 1, 1.0);
    CHECK(uncut.seam_pairs.empty());
    CHECK(uncut.euler_characteristic() == 2);
    CHECK(uncut.num_components == 1);

    SlitMesh full = build_slit_sphere(CrackSpec::sphere_full_circle(), 1, 1.0);
    CHECK(full.num_components == 2);
    CHECK(full.tip_vertices.empty());
    CHECK(full.euler_characteristic() == 2);  // two disks
    std::set<int> labels(full.component_of.begin(), full.component_of.end());
    CHECK(labels.size() == 2);
}

TEST_CASE("seam DOFs coincide and sphere vertices are unit") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(kHalf), 2, 2.0);
    for (const auto& [p, q] : m.seam_pairs) {
        CHECK(p != q);
        CHECK((m.vertices[p] - m.vertices[q]).norm() <= 1e-12);
    }
    for (const auto& v : m.vertices) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    CHECK(orientation_consistent(m));
}

TEST_CASE("condition T") {
    CHECK(check_condition_T(build_slit_sphere(CrackSpec::sphere_arc(kHalf), 1, 1.0)).connected);
    CHECK(check_condition_T(build_slit_sphere(CrackSpec::sphere_full_circle(), 1, 1.0)).components ==
          2);
    CHECK(check_condition_T(build_slit_sphere(CrackSpec::sphere_empty(), 1, 1.0)).components == 1);
}

TEST_CASE("slit disk structure") {
    SlitMesh full = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), 3, 1.0);
    CHECK(full.num_components == 1);
    CHECK(full.euler_characteristic() == 1);
    REQUIRE(full.tip_vertices.size() == 1);
    CHECK(full.vertices[full.tip_vertices[0]].norm() == doctest::Approx(0.0).epsilon(1e-14));

    SlitMesh none = build_slit_disk(CrackSpec{Domain::Disk2, {}}, 2, 1.0);
    CHECK(none.euler_characteristic() == 1);
    CHECK(none.seam_pairs.empty());

    // outer end on the boundary is duplicated but not a tip
    SlitMesh half = build_slit_disk(CrackSpec::disk_slit(0.5, 1.0), 2, 1.0);
    REQUIRE(half.tip_vertices.size() == 1);
    CHECK(half.vertices[half.tip_vertices[0]].x() == doctest::Approx(-0.5));
    bool mouth_duplicated = false;
    for (const auto& [p, q] : half.seam_pairs)
        if (std::abs(half.vertices[p].norm() - 1.0) < 1e-12) mouth_duplicated = true;
    CHECK(mouth_duplicated);
    CHECK(orientation_consistent(half));

    // interior slit: annulus topology
    SlitMesh inner = build_slit_disk(CrackSpec::disk_slit(0.3, 0.7), 2, 1.0);
    CHECK(inner.tip_vertices.size() == 2);
    CHECK(inner.euler_characteristic() == 0);
}

TEST_CASE("slit circle graphs") {
    SlitMesh cut = build_slit_circle(CrackSpec::circle_point(M_PI), 64);
    CHECK(cut.num_components == 1);
    CHECK(cut.dof_count() == cut.element_count() + 1);  // path graph
    CHECK(cut.seam_pairs.size() == 1);
    CHECK(cut.euler_characteristic() == 1);

    SlitMesh ring = build_slit_circle(CrackSpec{Domain::Circle1, {}}, 64);
    CHECK(ring.num_components == 1);
    CHECK(ring.euler_characteristic() == 0);

    SlitMesh two = build_slit_circle(
        CrackSpec{Domain::Circle1, {{0.0, 0.0}, {M_PI, M_PI}}}, 64);
    CHECK(two.num_components == 2);

    // removed open arc leaves a path on the complement
    SlitMesh arc = build_slit_circle(CrackSpec::circle_arc(0.0, M_PI / 2), 64);
    CHECK(arc.num_components == 1);
    CHECK(arc.euler_characteristic() == 1);
}

TEST_CASE("uniform refinement invariants") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(kHalf), 1, 1.0);
    SlitMesh r = refine(m);
    CHECK(r.element_count() == 4 * m.element_count());
    CHECK(r.euler_characteristic() == m.euler_characteristic());
    CHECK(r.num_components == m.num_components);
    CHECK(r.tip_vertices == m.tip_vertices);
    CHECK(r.generation == m.generation + 1);
    // h_max halves within 5%
    CHECK(r.h_max <= 0.5 * m.h_max * 1.05);
    CHECK(r.h_max >= 0.5 * m.h_max * 0.80);
    // all new vertices reprojected to the sphere
    for (const auto& v : r.vertices) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    // seam pairs grow by the number of seam edges (pairs + 1 per arc with two
    // tips: edges = pairs + tips/..., here one arc with both endpoints tips)
    CHECK(r.seam_pairs.size() == 2 * m.seam_pairs.size() + 1);
    for (const auto& [p, q] : r.seam_pairs)
        CHECK((r.vertices[p] - r.vertices[q]).norm() == 0.0);
    CHECK(orientation_consistent(r));

    SlitMesh d = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), 1, 1.0);
    SlitMesh rd = refine(d);
    CHECK(rd.element_count() == 4 * d.element_count());
    CHECK(rd.euler_characteristic() == 1);
    // boundary midpoints stay on the unit circle
    int rim = 0;
    for (const auto& v : rd.vertices)
        if (std::abs(v.norm() - 1.0) < 1e-12) ++rim;
    CHECK(rim > d.dof_count() / 8);

    SlitMesh c = build_slit_circle(CrackSpec::circle_point(M_PI), 32);
    SlitMesh rc = refine(c);
    CHECK(rc.element_count() == 2 * c.element_count());
    CHECK(rc.num_components == 1);
}

TEST_CASE("grading shrinks elements toward the tips") {
    const int level = 2;
    const double grading = 2.0;
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(kHalf), level, grading);
    const double h = 2.0 * M_PI / (8 << level);
    const double region = 0.5;
    const double floor_size = region * std::pow(h / region, grading);
    double tip_min = 1e300;
    for (const auto& tri : m.triangles) {
        double d = 1e300;
        for (int t : m.tip_vertices)
            for (int k = 0; k < 3; ++k)
                d = std::min(d, (m.vertices[tri[k]] - m.vertices[t]).norm());
        double size = 0.0;
        for (int k = 0; k < 3; ++k)
            size = std::max(size, (m.vertices[tri[k]] - m.vertices[tri[(k + 1) % 3]]).norm());
        const double dd = std::max(d, floor_size);
        const double target =
            dd >= region ? h : h * std::pow(dd / region, 1.0 - 1.0 / grading);
        CHECK(size <= 1.0001 * target);
        if (d == 0.0) tip_min = std::min(tip_min, size);
    }
    // tip-adjacent elements sit near the grading floor
    CHECK(tip_min <= 4.0 * floor_size);
    CHECK(m.h_max <= 1.5 * h);
}

TEST_CASE("builder guards") {
    CHECK_THROWS_AS(build_slit_sphere(CrackSpec::sphere_arc(kHalf), -1, 1.0), InputError);
    CHECK_THROWS_AS(build_slit_sphere(CrackSpec::sphere_arc(kHalf), 2, 0.5), InputError);
    CHECK_THROWS_AS(build_slit_sphere(CrackSpec::sphere_arc(kHalf), 13, 1.0), ResourceError);
    CHECK_THROWS_AS(build_slit_disk(CrackSpec::sphere_arc(kHalf), 2, 1.0), InputError);
    CHECK_THROWS_AS(build_slit_circle(CrackSpec::circle_point(0.0), 2), InputError);
}

TEST_CASE("export writes OFF plus seam sidecar") {
    SlitMesh m = build_slit_sphere(CrackSpec::sphere_arc(kHalf), 0, 1.0);
    const std::string path = "mesh_export_test.off";
    export_mesh(m, path);

    std::ifstream off(path);
    REQUIRE(off.good());
    std::string header;
    std::getline(off, header);
    CHECK(header == "OFF");
    std::int64_t v = 0, e = 0, f = 0;
    off >> v >> e >> f;
    CHECK(v == m.dof_count());
    CHECK(e == m.edge_count());
    CHECK(f == m.element_count());
    CHECK(v - e + f == 1);

    std::ifstream side(path + ".seams.json");
    REQUIRE(side.good());
    nlohmann::json j;
    side >> j;
    CHECK(j["seam_pairs"].size() == m.seam_pairs.size());
    CHECK(j["tip_vertices"].size() == 2);
}
