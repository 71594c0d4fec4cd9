#include "slitspec/assembly.hpp"
#include "slitspec/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace slitspec {

namespace {

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Local P1 stiffness from edge vectors: K_ab = (e_a . e_b) / (4 A), where e_a
// is the edge opposite vertex a.
void local_stiffness(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                     const Eigen::Vector3d& p2, double K[3][3], double& area) {
    const Eigen::Vector3d e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
    area = triangle_area(p0, p1, p2);
    const Eigen::Vector3d e[3] = {e0, e1, e2};
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) K[a][b] = K[b][a] = e[a].dot(e[b]) / (4.0 * area);
}

// Constant gradient of the P1 interpolant on one triangle.
Eigen::Vector3d p1_gradient(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                            const Eigen::Vector3d& p2, double u0, double u1, double u2) {
    const Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
    const double two_area = n.norm();
    const Eigen::Vector3d nn = n / two_area;
    // gradient of the hat function at vertex a: rotate the opposite edge into
    // the triangle plane and scale by 1/(2A)
    const Eigen::Vector3d g0 = nn.cross(p2 - p1) / two_area;
    const Eigen::Vector3d g1 = nn.cross(p0 - p2) / two_area;
    const Eigen::Vector3d g2 = nn.cross(p1 - p0) / two_area;
    return u0 * g0 + u1 * g1 + u2 * g2;
}

void check_field(const SlitMesh& mesh, const ScalarField& field) {
    if (field.values.size() != mesh.dof_count())
        throw InputError("field length does not match mesh DOF count");
    if (!field.values.allFinite()) throw InputError("non-finite field values");
}

// Integral of |x|^(2-N) over one planar triangle. The 1/|x| weight (N = 3)
// integrates exactly by fanning the triangle from the origin: each edge wedge
// contributes h * (asinh(sB/|h|) - asinh(sA/|h|)) with h the signed distance
// from the origin to the edge line and sA, sB the endpoint offsets along it.
// Edges collinear with the origin contribute nothing, so the singularity
// needs no special casing.
double weight_integral(const Eigen::Vector3d& a3, const Eigen::Vector3d& b3,
                       const Eigen::Vector3d& c3, int N) {
    if (N == 2) return triangle_area(a3, b3, c3);
    const Eigen::Vector2d pts[3] = {a3.head<2>(), b3.head<2>(), c3.head<2>()};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d A = pts[k], B = pts[(k + 1) % 3];
        const double L = (B - A).norm();
        if (L == 0.0) continue;
        const double z = A.x() * B.y() - A.y() * B.x();  // 2x signed area of (0, A, B)
        const double h = z / L;
        if (std::abs(h) < 1e-300) continue;
        const Eigen::Vector2d u = (B - A) / L;
        const double sA = A.dot(u), sB = B.dot(u);
        total += h * (std::asinh(sB / std::abs(h)) - std::asinh(sA / std::abs(h)));
    }
    return std::abs(total);
}

} // namespace

SparseSymOperator assemble_stiffness(const SlitMesh& mesh) {
    SparseSymOperator op;
    op.kind = SparseSymOperator::Kind::Stiffness;
    const int n = mesh.dof_count();
    std::vector<Eigen::Triplet<double>> trips;

    if (mesh.domain == Domain::Circle1) {
        trips.reserve(mesh.segments.size() * 4);
        for (size_t s = 0; s < mesh.segments.size(); ++s) {
            const auto& seg = mesh.segments[s];
            const double len = (mesh.vertices[seg[0]] - mesh.vertices[seg[1]]).norm();
            if (len <= 0)
                throw AssemblyError("degenerate segment " + std::to_string(s));
            const double k = 1.0 / len;
            trips.emplace_back(seg[0], seg[0], k);
            trips.emplace_back(seg[1], seg[1], k);
            trips.emplace_back(seg[0], seg[1], -k);
            trips.emplace_back(seg[1], seg[0], -k);
        }
    } else {
        trips.reserve(mesh.triangles.size() * 9);
        double K[3][3];
        double area;
        for (size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            local_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], K,
                            area);
            if (!(area > 1e-30))
                throw AssemblyError("degenerate triangle " + std::to_string(t));
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) trips.emplace_back(tri[a], tri[b], K[a][b]);
        }
    }
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

SparseSymOperator assemble_mass(const SlitMesh& mesh, bool lumped) {
    SparseSymOperator op;
    op.kind = SparseSymOperator::Kind::Mass;
    const int n = mesh.dof_count();
    std::vector<Eigen::Triplet<double>> trips;

    if (mesh.domain == Domain::Circle1) {
        for (size_t s = 0; s < mesh.segments.size(); ++s) {
            const auto& seg = mesh.segments[s];
            const double len = (mesh.vertices[seg[0]] - mesh.vertices[seg[1]]).norm();
            if (len <= 0) throw AssemblyError("degenerate segment " + std::to_string(s));
            if (lumped) {
                trips.emplace_back(seg[0], seg[0], len / 2);
                trips.emplace_back(seg[1], seg[1], len / 2);
            } else {
                trips.emplace_back(seg[0], seg[0], len / 3);
                trips.emplace_back(seg[1], seg[1], len / 3);
                trips.emplace_back(seg[0], seg[1], len / 6);
                trips.emplace_back(seg[1], seg[0], len / 6);
            }
        }
    } else {
        for (size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            const double area = triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                              mesh.vertices[tri[2]]);
            if (!(area > 1e-30)) throw AssemblyError("degenerate triangle " + std::to_string(t));
            for (int a = 0; a < 3; ++a) {
                if (lumped) {
                    trips.emplace_back(tri[a], tri[a], area / 3.0);
                    continue;
                }
                for (int b = 0; b < 3; ++b)
                    trips.emplace_back(tri[a], tri[b], (a == b ? area / 6.0 : area / 12.0));
            }
        }
    }
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.matrix.makeCompressed();
    return op;
}

double assemble_weighted_energy(const SlitMesh& mesh, const ScalarField& field, int N) {
    if (mesh.domain == Domain::Circle1) throw InputError("weighted energy needs a 2D mesh");
    if (N != 2 && N != 3) throw InputError("weighted energy supports N in {2, 3}");
    check_field(mesh, field);
    double total = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
                              &c = mesh.vertices[tri[2]];
        const Eigen::Vector3d g =
            p1_gradient(a, b, c, field.values[tri[0]], field.values[tri[1]], field.values[tri[2]]);
        total += g.squaredNorm() * weight_integral(a, b, c, N);
    }
    return total;
}

double BoundaryFlux::flux_total() const {
    double s = 0.0;
    for (const auto& c : components) s += c.flux;
    return s;
}
double BoundaryFlux::energy_total() const {
    double s = 0.0;
    for (const auto& c : components) s += c.energy;
    return s;
}
double BoundaryFlux::l2_total() const {
    double s = 0.0;
    for (const auto& c : components) s += c.l2;
    return s;
}

namespace {

bool point_in_triangle_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                          const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double d = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const double la = ((b - p).x() * (c - p).y() - (b - p).y() * (c - p).x()) / d;
    const double lb = ((c - p).x() * (a - p).y() - (c - p).y() * (a - p).x()) / d;
    const double lc = 1.0 - la - lb;
    const double tol = -1e-12;
    return la >= tol && lb >= tol && lc >= tol;
}

// Gauss-Legendre 10 on [0,1]; nodes via the quadrature module would pull a
// dependency cycle, so use an embedded fixed rule.
struct Gauss10 {
    double x[10], w[10];
    Gauss10() {
        // Newton iteration on P_10, same construction as quadrature.cpp
        const int n = 10;
        for (int i = 0; i < n; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-16) break;
            }
            x[i] = 0.5 * (t + 1.0);
            w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const Gauss10& gauss10() {
    static const Gauss10 g;
    return g;
}

} // namespace

BoundaryFlux boundary_flux(const SlitMesh& mesh, const ScalarField& field, double circle_radius) {
    if (mesh.domain != Domain::Disk2) throw InputError("boundary_flux expects a disk mesh");
    check_field(mesh, field);
    if (!(circle_radius > 0.0 && circle_radius < 1.0))
        throw RangeError("circle radius must lie strictly inside (0, 1)");

    // Trace taken from just inside the circle; the tiny inward nudge keeps the
    // classification unambiguous when the radius coincides with a mesh ring.
    const double r = circle_radius * (1.0 - 1e-9);

    struct Piece {
        int tri;
        double th0, th1;
    };
    std::vector<Piece> pieces;

    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector2d a = mesh.vertices[tri[0]].head<2>(), b = mesh.vertices[tri[1]].head<2>(),
                              c = mesh.vertices[tri[2]].head<2>();
        const double rmax = std::sqrt(std::max({a.squaredNorm(), b.squaredNorm(), c.squaredNorm()}));
        if (rmax <= r) continue;
        // collect edge crossings
        std::vector<double> cross;
        const Eigen::Vector2d pts[3] = {a, b, c};
        double rmin_vertex = std::min({a.norm(), b.norm(), c.norm()});
        for (int k = 0; k < 3; ++k) {
            const Eigen::Vector2d p = pts[k], q = pts[(k + 1) % 3];
            const Eigen::Vector2d d = q - p;
            const double qa = d.squaredNorm();
            const double qb = 2.0 * p.dot(d);
            const double qc = p.squaredNorm() - r * r;
            const double disc = qb * qb - 4 * qa * qc;
            if (disc <= 0 || qa == 0) continue;
            const double sq = std::sqrt(disc);
            for (double tt : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)}) {
                if (tt < 0.0 || tt > 1.0) continue;
                const Eigen::Vector2d x = p + tt * d;
                cross.push_back(std::atan2(x.y(), x.x()));
            }
        }
        if (cross.empty()) {
            if (rmin_vertex >= r) continue;
            // circle entirely inside this triangle (can only happen for
            // coarse meshes); take the full circle
            if (point_in_triangle_2d(Eigen::Vector2d(r, 0), a, b, c))
                pieces.push_back({t, -M_PI, M_PI});
            continue;
        }
        std::sort(cross.begin(), cross.end());
        const size_t nc = cross.size();
        for (size_t k = 0; k < nc; ++k) {
            const double th0 = cross[k];
            const double th1 = (k + 1 < nc) ? cross[k + 1] : cross[0] + 2 * M_PI;
            if (th1 - th0 < 1e-12) continue;
            const double mid = 0.5 * (th0 + th1);
            const Eigen::Vector2d pm(r * std::cos(mid), r * std::sin(mid));
            if (point_in_triangle_2d(pm, a, b, c)) pieces.push_back({t, th0, th1});
        }
    }

    const auto& g = gauss10();
    auto interp = [&](int t, double th, Eigen::Vector3d& grad) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d &A = mesh.vertices[tri[0]], &B = mesh.vertices[tri[1]],
                              &C = mesh.vertices[tri[2]];
        const double u0 = field.values[tri[0]], u1 = field.values[tri[1]], u2 = field.values[tri[2]];
        grad = p1_gradient(A, B, C, u0, u1, u2);
        const Eigen::Vector2d p(r * std::cos(th), r * std::sin(th));
        // barycentric interpolation in the plane
        const Eigen::Vector2d a = A.head<2>(), b = B.head<2>(), c = C.head<2>();
        const double d = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        const double la = ((b - p).x() * (c - p).y() - (b - p).y() * (c - p).x()) / d;
        const double lb = ((c - p).x() * (a - p).y() - (c - p).y() * (a - p).x()) / d;
        return la * u0 + lb * u1 + (1.0 - la - lb) * u2;
    };

    // The circle minus the crack is connected for radial cracks, so a single
    // component carries all pieces.
    BoundaryFlux out;
    out.radius = circle_radius;
    BoundaryFlux::Component comp;
    double integral_u = 0.0;
    Eigen::Vector3d grad;
    for (const Piece& p : pieces) {
        const double len = (p.th1 - p.th0) * r;
        comp.length += len;
        for (int i = 0; i < 10; ++i) {
            const double th = p.th0 + (p.th1 - p.th0) * g.x[i];
            const double u = interp(p.tri, th, grad);
            integral_u += g.w[i] * len * u;
        }
    }
    if (comp.length <= 0) throw RangeError("circle not covered by the mesh");
    comp.mean = integral_u / comp.length;

    for (const Piece& p : pieces) {
        const double len = (p.th1 - p.th0) * r;
        for (int i = 0; i < 10; ++i) {
            const double th = p.th0 + (p.th1 - p.th0) * g.x[i];
            const double u = interp(p.tri, th, grad);
            const Eigen::Vector2d nu(std::cos(th), std::sin(th));
            const double dnu = grad.x() * nu.x() + grad.y() * nu.y();
            comp.flux += g.w[i] * len * (u - comp.mean) * dnu;
            comp.energy += g.w[i] * len * grad.squaredNorm();
            comp.l2 += g.w[i] * len * (u - comp.mean) * (u - comp.mean);
        }
    }
    out.components.push_back(comp);
    return out;
}

Eigen::SparseMatrix<double> merge_seam_pairs(const SlitMesh& mesh,
                                             const std::vector<std::pair<int, int>>& pairs) {
    const int n = mesh.dof_count();
    std::vector<int> rep(n);
    for (int i = 0; i < n; ++i) rep[i] = i;
    auto find = [&](int x) {
        while (rep[x] != x) x = rep[x] = rep[rep[x]];
        return x;
    };
    for (const auto& [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= n || b >= n) throw InputError("seam pair out of range");
        rep[find(std::max(a, b))] = find(std::min(a, b));
    }
    std::vector<int> newid(n, -1);
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (find(i) == i) newid[i] = m++;
    Eigen::SparseMatrix<double> P(n, m);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n);
    for (int i = 0; i < n; ++i) trips.emplace_back(i, newid[find(i)], 1.0);
    P.setFromTriplets(trips.begin(), trips.end());
    return P;
}

void write_matrix_market(const SparseSymOperator& op, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot open " + path);
    const auto& A = op.matrix;
    std::int64_t nnz_lower = 0;
    for (int i = 0; i < A.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, i); it; ++it)
            if (it.col() <= it.row()) ++nnz_lower;
    f << "%%MatrixMarket matrix coordinate real symmetric\n";
    f << A.rows() << ' ' << A.cols() << ' ' << nnz_lower << '\n';
    f.precision(17);
    for (int i = 0; i < A.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, i); it; ++it)
            if (it.col() <= it.row()) f << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

} // namespace slitspec
