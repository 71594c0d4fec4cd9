#include "slitspec/slitmesh.hpp"
#include "slitspec/errors.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace slitspec {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kSnapTol = 1e-14;
constexpr double kAngleTol = 1e-12;

using EdgeKey = std::uint64_t;

EdgeKey edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::pair<int, int> edge_vertices(EdgeKey k) {
    return {static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu)};
}

Eigen::Vector3d snap_tiny(Eigen::Vector3d p) {
    for (int i = 0; i < 3; ++i)
        if (std::abs(p[i]) < kSnapTol) p[i] = 0.0;
    return p;
}

// ---------------------------------------------------------------------------
// Uncut working mesh with crack edges marked; cut into a SlitMesh afterwards.
// ---------------------------------------------------------------------------

struct WorkMesh {
    std::vector<Eigen::Vector3d> V;
    std::vector<std::array<int, 3>> T;
    std::unordered_set<EdgeKey> crack_edges;
    std::vector<int> tips;
    bool spherical = false;  // reproject all new vertices to the unit sphere

    std::unordered_map<EdgeKey, std::array<int, 2>> adj;  // edge -> adjacent triangles (-1 empty)

    void add_triangle_adj(int t) {
        const auto& tri = T[t];
        for (int k = 0; k < 3; ++k) {
            EdgeKey e = edge_key(tri[k], tri[(k + 1) % 3]);
            auto [it, fresh] = adj.try_emplace(e, std::array<int, 2>{-1, -1});
            auto& slots = it->second;
            if (slots[0] == t || slots[1] == t) continue;
            if (slots[0] == -1) slots[0] = t;
            else if (slots[1] == -1) slots[1] = t;
            else throw AssemblyError("non-manifold edge while refining");
        }
    }

    void remove_triangle_adj(int t) {
        const auto& tri = T[t];
        for (int k = 0; k < 3; ++k) {
            EdgeKey e = edge_key(tri[k], tri[(k + 1) % 3]);
            auto it = adj.find(e);
            if (it == adj.end()) continue;
            auto& slots = it->second;
            if (slots[0] == t) {
                slots[0] = slots[1];
                slots[1] = -1;
            } else if (slots[1] == t) {
                slots[1] = -1;
            }
            if (slots[0] == -1) adj.erase(it);
        }
    }

    void build_adjacency() {
        adj.clear();
        adj.reserve(T.size() * 2);
        for (int t = 0; t < static_cast<int>(T.size()); ++t) add_triangle_adj(t);
    }

    double edge_len2(EdgeKey e) const {
        auto [a, b] = edge_vertices(e);
        return (V[a] - V[b]).squaredNorm();
    }

    // Longest edge with a deterministic tie-break (structured grids tie often).
    EdgeKey longest_edge(int t) const {
        const auto& tri = T[t];
        EdgeKey best = 0;
        double best_l = -1.0;
        for (int k = 0; k < 3; ++k) {
            EdgeKey e = edge_key(tri[k], tri[(k + 1) % 3]);
            double l = edge_len2(e);
            if (l > best_l || (l == best_l && e > best)) {
                best = e;
                best_l = l;
            }
        }
        return best;
    }

    int make_midpoint(EdgeKey e) {
        auto [a, b] = edge_vertices(e);
        Eigen::Vector3d m = 0.5 * (V[a] + V[b]);
        m = snap_tiny(m);
        if (spherical) {
            m.normalize();
            m = snap_tiny(m);
        } else {
            // keep the disk rim round: boundary edges have a single adjacent
            // triangle and both endpoints on the unit circle
            auto it = adj.find(e);
            const bool boundary = it != adj.end() && it->second[1] == -1;
            if (boundary && std::abs(V[a].norm() - 1.0) < 1e-9 &&
                std::abs(V[b].norm() - 1.0) < 1e-9) {
                m.head<2>().normalize();
                m = snap_tiny(m);
            }
        }
        V.push_back(m);
        return static_cast<int>(V.size()) - 1;
    }

    // Rivara longest-edge bisection with neighbor propagation.
    void bisect_edge(EdgeKey e, int depth = 0) {
        if (depth > 512) throw ResourceError("mesh grading recursion exceeded its depth cap");
        for (;;) {
            auto it = adj.find(e);
            if (it == adj.end()) return;  // already split along the way
            bool compatible = true;
            for (int s = 0; s < 2; ++s) {
                int t = it->second[s];
                if (t < 0) continue;
                EdgeKey le = longest_edge(t);
                if (le != e) {
                    bisect_edge(le, depth + 1);
                    compatible = false;
                    break;
                }
            }
            if (compatible) break;
        }

        auto it = adj.find(e);
        if (it == adj.end()) return;
        const std::array<int, 2> tris = it->second;
        const int m = make_midpoint(e);
        auto [a, b] = edge_vertices(e);

        const bool on_crack = crack_edges.erase(e) > 0;
        if (on_crack) {
            crack_edges.insert(edge_key(a, m));
            crack_edges.insert(edge_key(m, b));
        }

        for (int s = 0; s < 2; ++s) {
            int t = tris[s];
            if (t < 0) continue;
            std::array<int, 3> tri = T[t];
            int i = 0;
            while (!((tri[i] == a && tri[(i + 1) % 3] == b) ||
                     (tri[i] == b && tri[(i + 1) % 3] == a)))
                ++i;
            const int p = tri[i], q = tri[(i + 1) % 3], c = tri[(i + 2) % 3];
            remove_triangle_adj(t);
            T[t] = {p, m, c};
            add_triangle_adj(t);
            T.push_back({m, q, c});
            add_triangle_adj(static_cast<int>(T.size()) - 1);
        }
    }
};

std::vector<double> fill_between(double a, double b, double target_h, int min_n) {
    const int n = std::max(min_n, static_cast<int>(std::lround(std::max(1.0, (b - a) / target_h))));
    std::vector<double> out;
    out.reserve(n);
    for (int i = 1; i < n; ++i) out.push_back(a + (b - a) * i / n);
    return out;
}

struct AngularGrid {
    std::vector<double> angles;               // sorted, cyclic over a 2*pi window
    std::unordered_map<int, int> required_ix; // index into `angles` of each required angle
};

// Cyclic grid on the circle containing every required angle exactly. Spans
// that coincide with whole crack arcs are forced to at least two edges so an
// arc always has an interior seam vertex.
std::vector<double> build_cyclic_grid(std::vector<double> required, double target_h,
                                      const std::vector<ArcInterval>& whole_arcs) {
    std::sort(required.begin(), required.end());
    required.erase(std::unique(required.begin(), required.end(),
                               [](double x, double y) { return std::abs(x - y) < kAngleTol; }),
                   required.end());
    std::vector<double> out;
    if (required.empty()) {
        const int n = std::max(4, static_cast<int>(std::lround(kTwoPi / target_h)));
        for (int i = 0; i < n; ++i) out.push_back(-M_PI + kTwoPi * i / n);
        return out;
    }
    auto is_whole_arc = [&](double s, double e) {
        for (const ArcInterval& a : whole_arcs) {
            double s0 = a.start, e0 = a.end;
            if (std::abs(s - s0) < kAngleTol && std::abs(e - e0) < kAngleTol) return true;
            // arcs may be stored with end > pi while grid angles are wrapped
            if (std::abs(s - (s0 - kTwoPi)) < kAngleTol && std::abs(e - (e0 - kTwoPi)) < kAngleTol)
                return true;
        }
        return false;
    };
    const size_t nreq = required.size();
    for (size_t i = 0; i < nreq; ++i) {
        const double a = required[i];
        const double b = (i + 1 < nreq) ? required[i + 1] : required[0] + kTwoPi;
        out.push_back(a);
        const int min_n = is_whole_arc(a, b) ? 2 : 1;
        for (double v : fill_between(a, b, target_h, min_n)) out.push_back(v);
    }
    return out;
}

struct GridIndex {
    // wrapped angle -> position in the cyclic grid
    std::vector<double> angles;
    int find(double a) const {
        for (int j = 0; j < static_cast<int>(angles.size()); ++j) {
            double d = std::remainder(angles[j] - a, kTwoPi);
            if (std::abs(d) < 1e-9) return j;
        }
        throw InputError("required angle missing from grid");
    }
};

double grading_target(double d, double h, double grading, double region) {
    if (grading <= 1.0) return h;
    const double floor_size = region * std::pow(h / region, grading);
    const double dd = std::max(d, floor_size);
    if (dd >= region) return h;
    return h * std::pow(dd / region, 1.0 - 1.0 / grading);
}

void grade_toward_tips(WorkMesh& wm, double h, double grading, double region = 0.5) {
    if (grading <= 1.0 || wm.tips.empty()) return;
    std::vector<Eigen::Vector3d> tip_pts;
    for (int t : wm.tips) tip_pts.push_back(wm.V[t]);
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (int t = 0; t < static_cast<int>(wm.T.size()); ++t) {
            const auto& tri = wm.T[t];
            double d = std::numeric_limits<double>::max();
            for (const auto& tp : tip_pts)
                for (int k = 0; k < 3; ++k) d = std::min(d, (wm.V[tri[k]] - tp).norm());
            const EdgeKey le = wm.longest_edge(t);
            const double size = std::sqrt(wm.edge_len2(le));
            if (size > 1.0001 * grading_target(d, h, grading, region)) {
                wm.bisect_edge(le);
                changed = true;
            }
        }
        if (!changed) return;
    }
    throw ResourceError("tip grading did not settle");
}

void orient_triangles(WorkMesh& wm, bool spherical) {
    for (auto& tri : wm.T) {
        const Eigen::Vector3d &a = wm.V[tri[0]], &b = wm.V[tri[1]], &c = wm.V[tri[2]];
        const Eigen::Vector3d n = (b - a).cross(c - a);
        const double s = spherical ? n.dot((a + b + c) / 3.0) : n.z();
        if (s < 0) std::swap(tri[1], tri[2]);
    }
}

// ---------------------------------------------------------------------------
// Component labelling, h_max, finalization shared by all builders.
// ---------------------------------------------------------------------------

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

void label_components(SlitMesh& mesh) {
    const int ne = mesh.element_count();
    UnionFind uf(ne);
    if (mesh.domain == Domain::Circle1) {
        std::unordered_map<int, int> first_seg;
        for (int s = 0; s < ne; ++s)
            for (int v : mesh.segments[s]) {
                auto [it, fresh] = first_seg.try_emplace(v, s);
                if (!fresh) uf.unite(s, it->second);
            }
    } else {
        std::unordered_map<EdgeKey, int> first_tri;
        first_tri.reserve(ne * 2);
        for (int t = 0; t < ne; ++t) {
            const auto& tri = mesh.triangles[t];
            for (int k = 0; k < 3; ++k) {
                EdgeKey e = edge_key(tri[k], tri[(k + 1) % 3]);
                auto [it, fresh] = first_tri.try_emplace(e, t);
                if (!fresh) uf.unite(t, it->second);
            }
        }
    }
    mesh.component_of.assign(ne, -1);
    std::unordered_map<int, int> label;
    for (int t = 0; t < ne; ++t) {
        int root = uf.find(t);
        auto [it, fresh] = label.try_emplace(root, static_cast<int>(label.size()));
        mesh.component_of[t] = it->second;
    }
    mesh.num_components = static_cast<int>(label.size());
}

double compute_h_max(const SlitMesh& mesh) {
    double h2 = 0.0;
    if (mesh.domain == Domain::Circle1) {
        for (const auto& s : mesh.segments)
            h2 = std::max(h2, (mesh.vertices[s[0]] - mesh.vertices[s[1]]).squaredNorm());
    } else {
        for (const auto& tri : mesh.triangles)
            for (int k = 0; k < 3; ++k)
                h2 = std::max(h2,
                              (mesh.vertices[tri[k]] - mesh.vertices[tri[(k + 1) % 3]]).squaredNorm());
    }
    return std::sqrt(h2);
}

// Duplicates interior crack vertices; tips keep a single DOF. The plus side
// is y > 0 (both crack carriers lie in the plane y = 0).
SlitMesh cut_along_crack(WorkMesh&& wm, Domain domain, CrackSpec crack, int level, double grading) {
    SlitMesh mesh;
    mesh.domain = domain;
    mesh.crack = std::move(crack);
    mesh.vertices = std::move(wm.V);
    mesh.triangles = std::move(wm.T);
    mesh.tip_vertices = wm.tips;
    mesh.level = level;
    mesh.grading = grading;

    std::unordered_set<int> tip_set(wm.tips.begin(), wm.tips.end());
    std::vector<int> crack_vertices;
    {
        std::unordered_set<int> seen;
        for (EdgeKey e : wm.crack_edges) {
            auto [a, b] = edge_vertices(e);
            if (seen.insert(a).second) crack_vertices.push_back(a);
            if (seen.insert(b).second) crack_vertices.push_back(b);
        }
    }
    std::sort(crack_vertices.begin(), crack_vertices.end());

    std::vector<std::vector<int>> incident(mesh.vertices.size());
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        for (int v : mesh.triangles[t]) incident[v].push_back(t);

    for (int v : crack_vertices) {
        if (tip_set.count(v)) continue;
        int minus_dof = -1;
        int plus_count = 0, minus_count = 0;
        for (int t : incident[v]) {
            auto& tri = mesh.triangles[t];
            const double yc =
                (mesh.vertices[tri[0]].y() + mesh.vertices[tri[1]].y() + mesh.vertices[tri[2]].y()) / 3.0;
            if (yc > 0) {
                ++plus_count;
                continue;
            }
            if (yc == 0.0) throw AssemblyError("ambiguous crack side at vertex " + std::to_string(v));
            ++minus_count;
            if (minus_dof < 0) {
                mesh.vertices.push_back(mesh.vertices[v]);
                minus_dof = static_cast<int>(mesh.vertices.size()) - 1;
            }
            for (int& idx : tri)
                if (idx == v) idx = minus_dof;
        }
        if (minus_dof < 0 || plus_count == 0 || minus_count == 0)
            throw AssemblyError("crack vertex " + std::to_string(v) + " is one-sided");
        mesh.seam_pairs.emplace_back(v, minus_dof);
    }

    label_components(mesh);
    mesh.h_max = compute_h_max(mesh);
    return mesh;
}

int estimate_and_guard(int level, double grading, std::int64_t base_count) {
    if (level < 0) throw InputError("refinement level must be nonnegative");
    if (grading < 1.0) throw InputError("grading must be >= 1");
    if (level > 12 || base_count > 20'000'000)
        throw ResourceError("refinement level beyond the memory budget");
    return level;
}

} // namespace

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

SlitMesh build_slit_sphere(const CrackSpec& crack_in, int level, double grading) {
    CrackSpec crack = crack_in.normalized();
    if (crack.domain != Domain::Sphere2) throw InputError("build_slit_sphere expects a Sphere2 crack");

    const int n_az_base = 8 << level;
    const int n_ps_base = 4 << level;
    estimate_and_guard(level, grading, static_cast<std::int64_t>(n_az_base) * n_ps_base);

    // Azimuth grid around the crack great circle; arcs become unions of
    // equator edges, arc endpoints are grid vertices.
    std::vector<double> required;
    const bool full = crack.full_circle();
    if (!full)
        for (const ArcInterval& a : crack.arcs) {
            required.push_back(std::remainder(a.start, kTwoPi));
            required.push_back(std::remainder(a.end, kTwoPi));
        }
    std::vector<double> az = build_cyclic_grid(required, kTwoPi / n_az_base, crack.arcs);
    const int n_az = static_cast<int>(az.size());

    // Colatitude from the +y pole; the crack circle is the equator psi = pi/2.
    std::vector<double> ps{0.0};
    for (double v : fill_between(0.0, M_PI / 2, M_PI / n_ps_base, 1)) ps.push_back(v);
    ps.push_back(M_PI / 2);
    for (double v : fill_between(M_PI / 2, M_PI, M_PI / n_ps_base, 1)) ps.push_back(v);
    ps.push_back(M_PI);
    const int n_ps = static_cast<int>(ps.size());

    WorkMesh wm;
    wm.spherical = true;
    auto point = [](double psi, double chi) {
        return snap_tiny(Eigen::Vector3d(-std::cos(chi) * std::sin(psi), std::cos(psi),
                                         std::sin(chi) * std::sin(psi)))
            .normalized();
    };

    const int pole_n = 0, pole_s = 1;
    wm.V.push_back(snap_tiny(Eigen::Vector3d(0, 1, 0)));
    wm.V.push_back(snap_tiny(Eigen::Vector3d(0, -1, 0)));
    std::vector<int> ring_id(static_cast<size_t>(n_ps) * n_az, -1);
    auto vid = [&](int i, int j) -> int& { return ring_id[static_cast<size_t>(i) * n_az + ((j % n_az + n_az) % n_az)]; };
    for (int i = 1; i < n_ps - 1; ++i)
        for (int j = 0; j < n_az; ++j) {
            wm.V.push_back(point(ps[i], az[j]));
            vid(i, j) = static_cast<int>(wm.V.size()) - 1;
        }

    for (int j = 0; j < n_az; ++j) {
        wm.T.push_back({pole_n, vid(1, j), vid(1, j + 1)});
        wm.T.push_back({pole_s, vid(n_ps - 2, j + 1), vid(n_ps - 2, j)});
    }
    for (int i = 1; i + 2 < n_ps; ++i)
        for (int j = 0; j < n_az; ++j) {
            wm.T.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            wm.T.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    orient_triangles(wm, true);

    // Crack edges along the equator ring, tips at arc endpoints.
    const int i_eq = static_cast<int>(std::find_if(ps.begin(), ps.end(), [](double v) {
                                          return std::abs(v - M_PI / 2) < 1e-15;
                                      }) -
                                      ps.begin());
    GridIndex gi{az};
    for (int j = 0; j < n_az; ++j) {
        const double a0 = az[j];
        const double a1 = (j + 1 < n_az) ? az[j + 1] : az[0] + kTwoPi;
        if (crack.contains(0.5 * (a0 + a1), 1e-9) && !crack.empty())
            wm.crack_edges.insert(edge_key(vid(i_eq, j), vid(i_eq, j + 1)));
    }
    if (!full)
        for (const ArcInterval& a : crack.arcs) {
            wm.tips.push_back(vid(i_eq, gi.find(a.start)));
            wm.tips.push_back(vid(i_eq, gi.find(a.end)));
        }
    std::sort(wm.tips.begin(), wm.tips.end());
    wm.tips.erase(std::unique(wm.tips.begin(), wm.tips.end()), wm.tips.end());

    wm.build_adjacency();
    grade_toward_tips(wm, kTwoPi / n_az_base, grading);

    return cut_along_crack(std::move(wm), Domain::Sphere2, std::move(crack), level, grading);
}

SlitMesh build_slit_disk(const CrackSpec& crack_in, int level, double grading) {
    CrackSpec crack = crack_in.normalized();
    if (crack.domain != Domain::Disk2) throw InputError("build_slit_disk expects a Disk2 crack");

    const int n_th = 16 << level;
    const int n_r_base = 4 << level;
    estimate_and_guard(level, grading, static_cast<std::int64_t>(n_th) * n_r_base);

    // Radial grid containing every slit endpoint; two edges minimum per slit.
    std::vector<double> rq{0.0, 1.0};
    for (const ArcInterval& a : crack.arcs) {
        rq.push_back(a.start);
        rq.push_back(a.end);
    }
    std::sort(rq.begin(), rq.end());
    rq.erase(std::unique(rq.begin(), rq.end(),
                         [](double x, double y) { return std::abs(x - y) < kAngleTol; }),
             rq.end());
    std::vector<double> rs;
    for (size_t i = 0; i + 1 < rq.size(); ++i) {
        rs.push_back(rq[i]);
        int min_n = 1;
        for (const ArcInterval& a : crack.arcs)
            if (std::abs(a.start - rq[i]) < kAngleTol && std::abs(a.end - rq[i + 1]) < kAngleTol)
                min_n = 2;
        for (double v : fill_between(rq[i], rq[i + 1], 1.0 / n_r_base, min_n)) rs.push_back(v);
    }
    rs.push_back(1.0);
    const int n_r = static_cast<int>(rs.size());  // rs[0] == 0 is the origin

    WorkMesh wm;
    wm.spherical = false;
    const int origin = 0;
    wm.V.push_back(Eigen::Vector3d::Zero());
    std::vector<int> ring_id(static_cast<size_t>(n_r) * n_th, -1);
    auto vid = [&](int i, int j) -> int& { return ring_id[static_cast<size_t>(i) * n_th + ((j % n_th + n_th) % n_th)]; };
    std::vector<double> th(n_th);
    for (int j = 0; j < n_th; ++j) th[j] = -M_PI + kTwoPi * (j + 1) / n_th;  // includes pi exactly
    for (int i = 1; i < n_r; ++i)
        for (int j = 0; j < n_th; ++j) {
            wm.V.push_back(snap_tiny(Eigen::Vector3d(rs[i] * std::cos(th[j]), rs[i] * std::sin(th[j]), 0.0)));
            vid(i, j) = static_cast<int>(wm.V.size()) - 1;
        }

    for (int j = 0; j < n_th; ++j) wm.T.push_back({origin, vid(1, j), vid(1, j + 1)});
    for (int i = 1; i + 1 < n_r; ++i)
        for (int j = 0; j < n_th; ++j) {
            wm.T.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            wm.T.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    orient_triangles(wm, false);

    // Crack edges run along theta = pi (the negative x-axis).
    const int j_pi = n_th - 1;
    auto radial_vertex = [&](int i) { return i == 0 ? origin : vid(i, j_pi); };
    for (int i = 0; i + 1 < n_r; ++i) {
        const double mid = 0.5 * (rs[i] + rs[i + 1]);
        if (crack.contains(mid, 1e-12))
            wm.crack_edges.insert(edge_key(radial_vertex(i), radial_vertex(i + 1)));
    }
    auto radius_index = [&](double r) {
        for (int i = 0; i < n_r; ++i)
            if (std::abs(rs[i] - r) < 1e-9) return i;
        throw InputError("slit endpoint missing from radial grid");
    };
    for (const ArcInterval& a : crack.arcs) {
        if (a.start > kAngleTol) wm.tips.push_back(radial_vertex(radius_index(a.start)));
        else wm.tips.push_back(origin);  // slit reaching the center: origin is the tip
        if (a.end < 1.0 - kAngleTol) wm.tips.push_back(radial_vertex(radius_index(a.end)));
        // endpoint on the outer boundary is duplicated but is not a tip
    }
    std::sort(wm.tips.begin(), wm.tips.end());
    wm.tips.erase(std::unique(wm.tips.begin(), wm.tips.end()), wm.tips.end());

    wm.build_adjacency();
    grade_toward_tips(wm, kTwoPi / n_th, grading);

    return cut_along_crack(std::move(wm), Domain::Disk2, std::move(crack), level, grading);
}

SlitMesh build_slit_circle(const CrackSpec& crack_in, int segments) {
    CrackSpec crack = crack_in.normalized();
    if (crack.domain != Domain::Circle1) throw InputError("build_slit_circle expects a Circle1 crack");
    if (segments < 3) throw InputError("need at least 3 segments");
    if (segments > 50'000'000) throw ResourceError("segment count beyond the memory budget");

    std::vector<double> required;
    for (const ArcInterval& a : crack.arcs) {
        required.push_back(std::remainder(a.start, kTwoPi));
        required.push_back(std::remainder(a.end, kTwoPi));
    }
    std::vector<double> angles = build_cyclic_grid(required, kTwoPi / segments, {});
    const int n = static_cast<int>(angles.size());

    SlitMesh mesh;
    mesh.domain = Domain::Circle1;
    mesh.crack = crack;
    mesh.level = 0;

    // One vertex per grid angle; point cuts get a second copy, removed arcs
    // drop their interior vertices and segments.
    auto inside_removed = [&](double a) {
        for (const ArcInterval& arc : crack.arcs)
            if (arc.length() > kAngleTol) {
                double rel = a - arc.start;
                rel -= kTwoPi * std::floor(rel / kTwoPi);
                if (rel > kAngleTol && rel < arc.length() - kAngleTol) return true;
            }
        return false;
    };
    auto is_point_cut = [&](double a) {
        for (const ArcInterval& arc : crack.arcs)
            if (arc.length() <= kAngleTol &&
                std::abs(std::remainder(a - arc.start, kTwoPi)) < 1e-9)
                return true;
        return false;
    };

    std::vector<int> id_ccw(n, -1), id_cw(n, -1);  // vertex used by the segment leaving / arriving
    for (int j = 0; j < n; ++j) {
        if (inside_removed(angles[j])) continue;
        Eigen::Vector3d p = snap_tiny(Eigen::Vector3d(std::cos(angles[j]), std::sin(angles[j]), 0.0));
        mesh.vertices.push_back(p);
        id_ccw[j] = id_cw[j] = static_cast<int>(mesh.vertices.size()) - 1;
        if (is_point_cut(angles[j])) {
            mesh.vertices.push_back(p);
            id_cw[j] = static_cast<int>(mesh.vertices.size()) - 1;
            mesh.seam_pairs.emplace_back(id_ccw[j], id_cw[j]);
        }
    }
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        const double mid = angles[j] + 0.5 * (((jn == 0) ? angles[0] + kTwoPi : angles[jn]) - angles[j]);
        if (inside_removed(mid)) continue;
        if (id_ccw[j] < 0 || id_cw[jn] < 0) continue;
        mesh.segments.push_back({id_ccw[j], id_cw[jn]});
    }

    label_components(mesh);
    mesh.h_max = compute_h_max(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------
// Uniform refinement of a cut mesh
// ---------------------------------------------------------------------------

SlitMesh refine(const SlitMesh& mesh) {
    SlitMesh out;
    out.domain = mesh.domain;
    out.crack = mesh.crack;
    out.vertices = mesh.vertices;
    out.tip_vertices = mesh.tip_vertices;
    out.seam_pairs = mesh.seam_pairs;
    out.generation = mesh.generation + 1;
    out.level = mesh.level;
    out.grading = mesh.grading;

    if (mesh.domain == Domain::Circle1) {
        for (const auto& s : mesh.segments) {
            Eigen::Vector3d m = 0.5 * (mesh.vertices[s[0]] + mesh.vertices[s[1]]);
            m.head<2>().normalize();
            out.vertices.push_back(snap_tiny(m));
            const int mid = static_cast<int>(out.vertices.size()) - 1;
            out.segments.push_back({s[0], mid});
            out.segments.push_back({mid, s[1]});
        }
        label_components(out);
        out.h_max = compute_h_max(out);
        return out;
    }

    std::unordered_map<int, int> partner;
    for (const auto& [p, m] : mesh.seam_pairs) {
        partner[p] = m;
        partner[m] = p;
    }
    for (int t : mesh.tip_vertices) partner[t] = t;
    std::unordered_set<int> minus_set;
    for (const auto& [p, m] : mesh.seam_pairs) minus_set.insert(m);

    std::unordered_map<EdgeKey, int> edge_tris;  // adjacency count per edge
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) edge_tris[edge_key(tri[k], tri[(k + 1) % 3])]++;

    const bool spherical = mesh.domain == Domain::Sphere2;
    std::unordered_map<EdgeKey, int> midpoint;
    auto mid_of = [&](int a, int b) {
        const EdgeKey e = edge_key(a, b);
        auto it = midpoint.find(e);
        if (it != midpoint.end()) return it->second;
        Eigen::Vector3d m = 0.5 * (out.vertices[a] + out.vertices[b]);
        m = snap_tiny(m);
        if (spherical) {
            m.normalize();
            m = snap_tiny(m);
        } else if (edge_tris[e] == 1 && std::abs(out.vertices[a].norm() - 1.0) < 1e-9 &&
                   std::abs(out.vertices[b].norm() - 1.0) < 1e-9) {
            m.head<2>().normalize();
            m = snap_tiny(m);
        }
        out.vertices.push_back(m);
        const int id = static_cast<int>(out.vertices.size()) - 1;
        midpoint.emplace(e, id);
        return id;
    };

    for (const auto& tri : mesh.triangles) {
        const int a = tri[0], b = tri[1], c = tri[2];
        const int ab = mid_of(a, b), bc = mid_of(b, c), ca = mid_of(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({ab, b, bc});
        out.triangles.push_back({ca, bc, c});
        out.triangles.push_back({ab, bc, ca});
    }

    // New seam pairs: midpoints of paired seam edges. A seam edge has both
    // endpoints on the crack (paired or tip) and a distinct partner edge.
    for (const auto& [e, mid_id] : midpoint) {
        auto [a, b] = edge_vertices(e);
        auto pa = partner.find(a), pb = partner.find(b);
        if (pa == partner.end() || pb == partner.end()) continue;
        const EdgeKey pe = edge_key(pa->second, pb->second);
        if (pe == e) continue;
        auto pit = midpoint.find(pe);
        if (pit == midpoint.end()) continue;
        const bool is_minus = minus_set.count(a) || minus_set.count(b);
        if (is_minus) continue;  // handled from the plus side
        out.seam_pairs.emplace_back(mid_id, pit->second);
    }
    std::sort(out.seam_pairs.begin(), out.seam_pairs.end());

    label_components(out);
    out.h_max = compute_h_max(out);
    return out;
}

SlitMesh make_raw_mesh(std::vector<Eigen::Vector3d> vertices,
                       std::vector<std::array<int, 3>> triangles, Domain domain) {
    SlitMesh mesh;
    mesh.domain = domain;
    mesh.crack.domain = domain;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    label_components(mesh);
    mesh.h_max = compute_h_max(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------
// Queries and export
// ---------------------------------------------------------------------------

std::int64_t SlitMesh::edge_count() const {
    std::unordered_set<EdgeKey> edges;
    if (domain == Domain::Circle1) {
        for (const auto& s : segments) edges.insert(edge_key(s[0], s[1]));
    } else {
        edges.reserve(triangles.size() * 2);
        for (const auto& tri : triangles)
            for (int k = 0; k < 3; ++k) edges.insert(edge_key(tri[k], tri[(k + 1) % 3]));
    }
    return static_cast<std::int64_t>(edges.size());
}

std::int64_t SlitMesh::euler_characteristic() const {
    const std::int64_t v = dof_count();
    const std::int64_t e = edge_count();
    if (domain == Domain::Circle1) return v - e;
    return v - e + element_count();
}

std::vector<std::int8_t> SlitMesh::dof_sides() const {
    std::vector<std::int8_t> sides(vertices.size(), 0);
    for (const auto& [p, m] : seam_pairs) {
        sides[p] = +1;
        sides[m] = -1;
    }
    return sides;
}

bool SlitMesh::is_tip(int dof) const {
    return std::find(tip_vertices.begin(), tip_vertices.end(), dof) != tip_vertices.end();
}

ConditionT check_condition_T(const SlitMesh& mesh) {
    return {mesh.num_components == 1, mesh.num_components};
}

void export_mesh(const SlitMesh& mesh, const std::string& path) {
    std::ofstream off(path);
    if (!off) throw InputError("cannot open " + path);
    off << "OFF\n";
    off << mesh.dof_count() << ' ' << mesh.edge_count() << ' ' << mesh.element_count() << '\n';
    off.precision(17);
    for (const auto& v : mesh.vertices) off << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    if (mesh.domain == Domain::Circle1)
        for (const auto& s : mesh.segments) off << "2 " << s[0] << ' ' << s[1] << '\n';
    else
        for (const auto& t : mesh.triangles)
            off << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';

    nlohmann::json j;
    j["seam_pairs"] = nlohmann::json::array();
    for (const auto& [p, m] : mesh.seam_pairs) j["seam_pairs"].push_back({p, m});
    j["tip_vertices"] = mesh.tip_vertices;
    j["components"] = mesh.num_components;
    j["h_max"] = mesh.h_max;
    std::ofstream side(path + ".seams.json");
    side << j.dump(2) << '\n';
}

} // namespace slitspec
