#include "slitspec/monotonicity.hpp"
#include "slitspec/errors.hpp"
#include "slitspec/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace slitspec {

double alpha_of(int N, double gamma) {
    if (N < 2) throw InputError("dimension must be at least 2");
    if (gamma < 0) throw InputError("gamma must be nonnegative");
    const double m = N - 2;
    return std::sqrt(m * m + 4.0 * gamma) - m;
}

ExponentParams::ExponentParams(int N_, double gamma_) : N(N_), gamma(gamma_) {
    if (!(gamma_ > 0)) throw InputError("gamma must be positive");
    alpha = alpha_of(N_, gamma_);
    const double check = alpha * alpha + 2.0 * (N - 2) * alpha - 4.0 * gamma;
    if (std::abs(check) > 1e-10 * std::max(1.0, 4.0 * gamma))
        throw InputError("exponent identity failed on construction");
}

// ---------------------------------------------------------------------------
// AnalyticField
// ---------------------------------------------------------------------------

AnalyticField AnalyticField::cracktip2d() {
    AnalyticField f;
    f.kind_ = Kind::Cracktip2D;
    f.dim_ = 2;
    f.tip_coeff_ = 1.0;
    return f;
}

AnalyticField AnalyticField::cracktip_times_r() {
    AnalyticField f;
    f.kind_ = Kind::CracktipTimesR;
    f.dim_ = 3;
    f.tip_coeff_ = 1.0;
    return f;
}

AnalyticField AnalyticField::constant(double c, int dim) {
    AnalyticField f;
    f.kind_ = Kind::Constant;
    f.dim_ = dim;
    f.const_value_ = c;
    return f;
}

AnalyticField AnalyticField::custom2d(double tip_coeff, std::vector<double> poly_coeffs) {
    AnalyticField f;
    f.kind_ = Kind::Custom;
    f.dim_ = 2;
    f.tip_coeff_ = tip_coeff;
    f.poly_ = std::move(poly_coeffs);
    return f;
}

namespace {

struct PolarPoint {
    double r, theta;
};

// Branch cut on {y = 0, x <= 0}; side +1 gives theta -> pi, side -1 -> -pi.
PolarPoint crack_polar(const Eigen::Vector3d& p, int side) {
    const double r = std::hypot(p.x(), p.y());
    if (r == 0.0) return {0.0, 0.0};
    double theta;
    if (p.y() == 0.0 && p.x() < 0.0) {
        if (side == 0)
            throw BranchError("evaluation on the crack needs a side flag");
        theta = side > 0 ? M_PI : -M_PI;
    } else {
        theta = std::atan2(p.y(), p.x());
    }
    return {r, theta};
}

} // namespace

double AnalyticField::base_value(const Eigen::Vector3d& p, int side) const {
    switch (kind_) {
    case Kind::Constant:
        return const_value_;
    case Kind::Cracktip2D:
    case Kind::CracktipTimesR: {
        const PolarPoint pp = crack_polar(p, side);
        return tip_coeff_ * std::sqrt(2.0 * pp.r / M_PI) * std::sin(0.5 * pp.theta);
    }
    case Kind::Custom: {
        const PolarPoint pp = crack_polar(p, side);
        double v = tip_coeff_ * std::sqrt(2.0 * pp.r / M_PI) * std::sin(0.5 * pp.theta);
        // Re((x+iy)^k) via de Moivre in polar form
        for (size_t k = 0; k < poly_.size(); ++k)
            v += poly_[k] * std::pow(pp.r, static_cast<double>(k)) * std::cos(k * pp.theta);
        return v;
    }
    }
    return 0.0;
}

Eigen::Vector3d AnalyticField::base_gradient(const Eigen::Vector3d& p, int side) const {
    switch (kind_) {
    case Kind::Constant:
        return Eigen::Vector3d::Zero();
    case Kind::Cracktip2D:
    case Kind::CracktipTimesR:
    case Kind::Custom: {
        const PolarPoint pp = crack_polar(p, side);
        if (pp.r == 0.0) throw BranchError("gradient at the crack tip");
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        if (tip_coeff_ != 0.0) {
            const double amp = 0.5 * tip_coeff_ * std::sqrt(2.0 / (M_PI * pp.r));
            g.x() += -amp * std::sin(0.5 * pp.theta);
            g.y() += amp * std::cos(0.5 * pp.theta);
        }
        // d/dz (z^k) = k z^(k-1): grad Re(z^k) = k (Re(z^(k-1)), -Im(z^(k-1)))
        for (size_t k = 1; k < poly_.size(); ++k) {
            const double rk = std::pow(pp.r, static_cast<double>(k - 1));
            g.x() += poly_[k] * k * rk * std::cos((k - 1) * pp.theta);
            g.y() -= poly_[k] * k * rk * std::sin((k - 1) * pp.theta);
        }
        return g;
    }
    }
    return Eigen::Vector3d::Zero();
}

double AnalyticField::value(const Eigen::Vector3d& p, int side) const {
    if (scale_ == 1.0) return base_value(p, side);
    return base_value(scale_ * p, side) / std::sqrt(scale_);
}

Eigen::Vector3d AnalyticField::gradient(const Eigen::Vector3d& p, int side) const {
    if (scale_ == 1.0) return base_gradient(p, side);
    return std::sqrt(scale_) * base_gradient(scale_ * p, side);
}

AnalyticField AnalyticField::rescaled(double rho) const {
    if (!(rho > 0)) throw RangeError("rescale factor must be positive");
    AnalyticField f = *this;
    f.scale_ *= rho;
    return f;
}

AnalyticField rescale_field(const AnalyticField& field, double rho) { return field.rescaled(rho); }

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

double EnergyProfile::phi_spread() const {
    if (phi.empty()) return 0.0;
    auto [mn, mx] = std::minmax_element(phi.begin(), phi.end());
    return *mx - *mn;
}

namespace {

void finite_differences(EnergyProfile& prof) {
    const auto& r = prof.radii;
    const auto& E = prof.E;
    const size_t n = r.size();
    prof.dE.assign(n, 0.0);
    if (n < 2) return;
    for (size_t i = 0; i < n; ++i) {
        if (i == 0) {
            prof.dE[i] = (E[1] - E[0]) / (r[1] - r[0]);
        } else if (i + 1 == n) {
            prof.dE[i] = (E[n - 1] - E[n - 2]) / (r[n - 1] - r[n - 2]);
        } else {
            // second-order central difference on a nonuniform grid
            const double hp = r[i + 1] - r[i], hm = r[i] - r[i - 1];
            prof.dE[i] =
                (E[i + 1] * hm * hm - E[i - 1] * hp * hp + E[i] * (hp * hp - hm * hm)) /
                (hp * hm * (hp + hm));
        }
    }
}

void finalize_profile(EnergyProfile& prof, const ExponentParams& params, double slack) {
    prof.alpha = params.alpha;
    prof.slack = slack;
    const size_t n = prof.radii.size();
    for (size_t i = 1; i < n; ++i)
        if (!(prof.radii[i] > prof.radii[i - 1]))
            throw InputError("radii must be strictly increasing");
    for (size_t i = 1; i < n; ++i)
        if (prof.E[i] < prof.E[i - 1] - 1e-12 * std::max(1.0, prof.E[i]))
            throw Error(Error::Code::Numeric, "E(r) must be nondecreasing");

    prof.phi.resize(n);
    for (size_t i = 0; i < n; ++i)
        prof.phi[i] = prof.E[i] / std::pow(prof.radii[i], params.alpha);

    finite_differences(prof);

    prof.monotone = true;
    for (size_t i = 1; i < n; ++i)
        if (prof.phi[i] < prof.phi[i - 1] - slack) prof.monotone = false;

    prof.inequality_ok.assign(n, true);
    for (size_t i = 0; i < n; ++i) {
        const double rhs = prof.radii[i] * prof.dE[i] / params.alpha;
        prof.inequality_ok[i] = prof.E[i] <= rhs + slack;
    }
}

// E(r) for an analytic field: weighted energy over B_r with weight
// |x|^(weight_power). Radial substitution rho = s^2 smooths the sqrt terms.
double analytic_ball_energy(const AnalyticField& field, int N, double weight_power, double r,
                            double tol) {
    if (N == 2) {
        auto integrand = [&](double s, double th) {
            const double rho = s * s;
            Eigen::Vector3d p(rho * std::cos(th), rho * std::sin(th), 0.0);
            const double g2 = field.gradient(p).squaredNorm();
            return g2 * std::pow(rho, weight_power) * rho * 2.0 * s;
        };
        return quad::integrate2d(integrand, 0.0, std::sqrt(r), -M_PI, M_PI, tol);
    }
    if (!field.z_invariant()) throw InputError("3D profiles need a z-invariant field");
    // cylindrical coordinates; the z-slab of the ball integrates in closed form:
    //   w(rc) = integral over |z| <= sqrt(r^2-rc^2) of (rc^2+z^2)^(p/2) dz
    // for p = -1 (weighted) and p = 0 (plain energy).
    auto slab = [&](double rc) {
        const double half = std::sqrt(std::max(r * r - rc * rc, 0.0));
        if (weight_power == 0.0) return 2.0 * half;
        return 2.0 * std::asinh(half / std::max(rc, 1e-300));
    };
    auto integrand = [&](double s, double th) {
        const double rho = s * s;
        Eigen::Vector3d p(rho * std::cos(th), rho * std::sin(th), 0.0);
        const double g2 = field.gradient(p).squaredNorm();
        return g2 * slab(rho) * rho * 2.0 * s;
    };
    return quad::integrate2d(integrand, 0.0, std::sqrt(r), -M_PI, M_PI, tol);
}

} // namespace

EnergyProfile energy_profile_analytic(const AnalyticField& field, const ExponentParams& params,
                                      const std::vector<double>& radii, double quad_tol,
                                      double slack) {
    if (params.N != field.dim())
        throw InputError("field dimension does not match the exponent parameters");
    EnergyProfile prof;
    prof.radii = radii;
    for (double r : radii)
        if (!(r > 0)) throw RangeError("radii must be positive");
    const double power = params.N == 2 ? 0.0 : -1.0;
    for (double r : radii)
        prof.E.push_back(analytic_ball_energy(field, params.N, power, r, quad_tol));
    finalize_profile(prof, params, slack);
    return prof;
}

std::vector<EnergyBoundCheck> unweighted_energy_bound_check(const AnalyticField& field,
                                                            const std::vector<double>& radii,
                                                            double quad_tol) {
    if (field.kind() != AnalyticField::Kind::CracktipTimesR &&
        field.kind() != AnalyticField::Kind::Constant)
        throw InputError("bound check expects the cracktip x R field");
    std::vector<EnergyBoundCheck> out;
    for (double r : radii) {
        EnergyBoundCheck c;
        c.radius = r;
        c.energy = field.kind() == AnalyticField::Kind::Constant
                       ? 0.0
                       : analytic_ball_energy(field, 3, 0.0, r, quad_tol);
        c.bound = 4.0 * M_PI * r * r;
        c.ratio = c.energy / c.bound;
        c.pass = c.energy <= c.bound + quad_tol;
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// FEM side
// ---------------------------------------------------------------------------

ScalarField solve_slit_disk_neumann(const SlitMesh& mesh, const BoundaryData& data) {
    if (mesh.domain != Domain::Disk2) throw InputError("expected a slit disk mesh");
    SparseSymOperator A = assemble_stiffness(mesh);
    const int n = mesh.dof_count();

    std::vector<bool> fixed(n, false);
    const auto sides = mesh.dof_sides();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    int nfixed = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(mesh.vertices[i].norm() - 1.0) < 1e-9) {
            fixed[i] = true;
            u[i] = data(mesh.vertices[i], sides[i]);
            ++nfixed;
        }
    }
    if (nfixed == 0) throw InputError("no Dirichlet data: reduced system is singular");

    std::vector<int> free_ix;
    free_ix.reserve(n - nfixed);
    for (int i = 0; i < n; ++i)
        if (!fixed[i]) free_ix.push_back(i);
    std::vector<int> inv(n, -1);
    for (size_t i = 0; i < free_ix.size(); ++i) inv[free_ix[i]] = static_cast<int>(i);

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_ix.size());
    for (int r = 0; r < A.matrix.outerSize(); ++r) {
        if (fixed[r]) continue;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A.matrix, r); it; ++it) {
            if (fixed[it.col()])
                rhs[inv[r]] -= it.value() * u[it.col()];
            else
                trips.emplace_back(inv[r], inv[it.col()], it.value());
        }
    }
    Eigen::SparseMatrix<double> Aff(static_cast<int>(free_ix.size()), static_cast<int>(free_ix.size()));
    Aff.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Aff);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("reduced stiffness factorization failed", {});
    Eigen::VectorXd uf = solver.solve(rhs);
    const double rel = (Aff * uf - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (rel > 1e-10)
        throw ConvergenceError("reduced system residual above 1e-10", {rel});
    for (size_t i = 0; i < free_ix.size(); ++i) u[free_ix[i]] = uf[i];

    ScalarField out;
    out.values = std::move(u);
    out.mesh_dofs = n;
    out.boundary_condition = "dirichlet:outer";
    return out;
}

namespace {

double dist_origin_to_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d d = b - a;
    const double t = std::clamp(-a.dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (a + t * d).norm();
}

double origin_triangle_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c) {
    auto cross2 = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
        return u.x() * v.y() - u.y() * v.x();
    };
    const double d1 = cross2(b - a, -a), d2 = cross2(c - b, -b), d3 = cross2(a - c, -c);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    if (!(has_neg && has_pos)) return 0.0;  // origin inside
    return std::min({dist_origin_to_segment(a, b), dist_origin_to_segment(b, c),
                     dist_origin_to_segment(c, a)});
}

double area2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

// Subdivide until the leaf area is <= budget; the centroid rule on the
// ambiguous leaves keeps the net error around 1e-4 of the triangle area.
double area_inside_circle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                          const Eigen::Vector2d& c, double r, double tol_area) {
    const double A = area2d(a, b, c);
    if (A <= 0) return 0.0;
    const double rmax = std::sqrt(std::max({a.squaredNorm(), b.squaredNorm(), c.squaredNorm()}));
    if (rmax <= r) return A;
    if (origin_triangle_distance(a, b, c) >= r) return 0.0;
    if (A <= tol_area) {
        const Eigen::Vector2d centroid = (a + b + c) / 3.0;
        return centroid.norm() <= r ? A : 0.0;
    }
    const Eigen::Vector2d ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return area_inside_circle(a, ab, ca, r, tol_area) + area_inside_circle(ab, b, bc, r, tol_area) +
           area_inside_circle(ca, bc, c, r, tol_area) + area_inside_circle(ab, bc, ca, r, tol_area);
}

Eigen::Vector2d p1_gradient_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                               const Eigen::Vector2d& c, double u0, double u1, double u2) {
    auto perp = [](const Eigen::Vector2d& v) { return Eigen::Vector2d(-v.y(), v.x()); };
    const double two_area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    return (u0 * perp(c - b) + u1 * perp(a - c) + u2 * perp(b - a)) / two_area;
}

double fem_ball_energy(const SlitMesh& mesh, const ScalarField& field, double r) {
    double total = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector2d a = mesh.vertices[tri[0]].head<2>(),
                              b = mesh.vertices[tri[1]].head<2>(),
                              c = mesh.vertices[tri[2]].head<2>();
        const double area = area2d(a, b, c);
        const double inside = area_inside_circle(a, b, c, r, 1e-8 * area);
        if (inside == 0.0) continue;
        const Eigen::Vector2d g = p1_gradient_2d(a, b, c, field.values[tri[0]],
                                                 field.values[tri[1]], field.values[tri[2]]);
        total += g.squaredNorm() * inside;
    }
    return total;
}

} // namespace

EnergyProfile energy_profile_fem(const SlitMesh& mesh, const ScalarField& field,
                                 const ExponentParams& params, const std::vector<double>& radii,
                                 double slack) {
    if (mesh.domain != Domain::Disk2) throw InputError("FEM profiles are defined on disk meshes");
    if (params.N != 2) throw InputError("FEM profiles use N = 2");
    if (field.values.size() != mesh.dof_count()) throw InputError("field length mismatch");
    for (double r : radii)
        if (!(r > 2.0 * mesh.h_max && r < 1.0 - 2.0 * mesh.h_max))
            throw RangeError("radius too close to the mesh scale");

    EnergyProfile prof;
    prof.radii = radii;
    for (double r : radii) prof.E.push_back(fem_ball_energy(mesh, field, r));
    finalize_profile(prof, params, slack);
    return prof;
}

BoundaryInequality boundary_inequality_check(const SlitMesh& mesh, const ScalarField& field,
                                             const ExponentParams& params, double radius,
                                             double slack) {
    if (params.N != 2) throw InputError("boundary inequality check uses N = 2");
    BoundaryInequality out;
    out.radius = radius;
    out.slack = slack;
    out.lhs = fem_ball_energy(mesh, field, radius);
    const BoundaryFlux flux = boundary_flux(mesh, field, radius);
    out.rhs = 0.0;
    for (const auto& c : flux.components) {
        out.rhs += std::pow(radius, 2.0 - params.N) * c.flux;
        if (params.N > 2)
            out.rhs += (params.N - 2.0) / (2.0 * std::pow(radius, params.N - 1.0)) * c.l2;
    }
    out.pass = out.lhs <= out.rhs + slack;
    return out;
}

std::vector<double> log_spaced_radii(double lo, double hi, int count) {
    if (!(lo > 0 && hi > lo) || count < 2) throw InputError("bad radius range");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    return out;
}

} // namespace slitspec
