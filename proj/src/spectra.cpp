#include "slitspec/spectra.hpp"
#include "slitspec/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

namespace slitspec {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

SphereSolve solve_sphere_crack(const CrackSpec& crack, int level, double grading, int k,
                               const SolveOptions& opts) {
    SphereSolve out;
    const double t0 = now_seconds();
    out.mesh = build_slit_sphere(crack, level, grading);
    out.stiffness = assemble_stiffness(out.mesh);
    out.mass = assemble_mass(out.mesh);
    const int kmin = out.mesh.num_components + 1;
    out.eigs = smallest_eigenpairs(out.stiffness, out.mass, std::max(k, kmin), opts);
    out.seconds = now_seconds() - t0;
    return out;
}

SphereSolve solve_sphere_arc(double beta, int level, double grading, int k,
                             const SolveOptions& opts) {
    return solve_sphere_crack(CrackSpec::sphere_arc(beta), level, grading, k, opts);
}

double lambda1_sphere_minus_arc(double beta, int level, double grading, const SolveOptions& opts) {
    return solve_sphere_arc(beta, level, grading, 6, opts).eigs.lambda1_global;
}

std::vector<SweepRecord> sweep_betas(const std::vector<double>& betas, int level, double grading,
                                     const SolveOptions& opts, int jobs) {
    std::vector<SweepRecord> records(betas.size());
    auto run_one = [&](size_t i) {
        const SphereSolve s = solve_sphere_arc(betas[i], level, grading, 6, opts);
        SweepRecord rec;
        rec.label = "beta=" + std::to_string(betas[i]);
        rec.param = betas[i];
        rec.level = level;
        rec.lambda1 = s.eigs.lambda1_global;
        rec.residual = s.eigs.residuals.empty() ? 0.0 : s.eigs.residuals.back();
        rec.seconds = s.seconds;
        rec.components = s.mesh.num_components;
        records[i] = rec;
    };
    if (jobs <= 1) {
        for (size_t i = 0; i < betas.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<size_t> next{0};
        const int nthreads = std::min<int>(jobs, static_cast<int>(betas.size()));
        for (int t = 0; t < nthreads; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                for (size_t i = next++; i < betas.size(); i = next++) run_one(i);
            }));
        for (auto& f : futs) f.get();
    }
    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.param < b.param; });
    return records;
}

LegendreFit fit_lambda_vs_cos(const std::vector<double>& betas,
                              const std::vector<double>& lambdas) {
    if (betas.size() != lambdas.size() || betas.size() < 3)
        throw InputError("need at least 3 (beta, lambda) samples");
    const size_t n = betas.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::cos(betas[i]);
        sx += x;
        sy += lambdas[i];
        sxx += x * x;
        sxy += x * lambdas[i];
    }
    const double denom = n * sxx - sx * sx;
    LegendreFit fit;
    fit.betas = betas;
    fit.lambdas = lambdas;
    if (std::abs(denom) < 1e-30) {
        fit.slope = 0.0;
        fit.intercept = sy / n;
        return fit;
    }
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

LegendreFit legendre_slope(const std::vector<double>& betas, int level, double grading,
                           const SolveOptions& opts) {
    for (double b : betas)
        if (std::abs(b - M_PI / 2) > 0.15 + 1e-12)
            throw InputError("legendre fit window is pi/2 +- 0.15");
    std::vector<double> lambdas;
    for (double b : betas) lambdas.push_back(lambda1_sphere_minus_arc(b, level, grading, opts));
    return fit_lambda_vs_cos(betas, lambdas);
}

std::vector<RigidityRecord> rigidity_family(const std::vector<std::vector<ArcInterval>>& gap_sets,
                                            int level, double grading, const SolveOptions& opts) {
    if (level < 1) throw InputError("rigidity margins need level >= 1");
    std::vector<RigidityRecord> out;
    for (const auto& gaps : gap_sets) {
        const CrackSpec crack = CrackSpec::half_equator_minus_gaps(gaps);
        RigidityRecord rec;
        rec.label = gaps.empty() ? "half-equator" : "gaps=" + std::to_string(gaps.size());
        rec.lambda_coarse =
            solve_sphere_crack(crack, level - 1, grading, 6, opts).eigs.lambda1_global;
        rec.lambda_fine = solve_sphere_crack(crack, level, grading, 6, opts).eigs.lambda1_global;
        rec.margin = 3.0 * std::abs(rec.lambda_fine - rec.lambda_coarse);
        rec.exceeds = rec.lambda_fine > 0.75 + rec.margin;
        out.push_back(rec);
    }
    return out;
}

Eigen::VectorXd sample_cracktip_restriction(const SlitMesh& mesh) {
    Eigen::VectorXd f(mesh.dof_count());
    const auto sides = mesh.dof_sides();
    for (int i = 0; i < mesh.dof_count(); ++i) {
        const Eigen::Vector3d& p = mesh.vertices[i];
        const double r = std::hypot(p.x(), p.y());
        double theta;
        if (p.y() == 0.0 && p.x() < 0.0)
            theta = sides[i] >= 0 ? M_PI : -M_PI;  // seam copies; tips have r = 0
        else
            theta = std::atan2(p.y(), p.x());
        f[i] = std::sqrt(r) * std::sin(0.5 * theta);
    }
    return f;
}

double compare_to_cracktip(const Eigen::VectorXd& eigvec, const SlitMesh& mesh,
                           const SparseSymOperator& mass) {
    if (mesh.domain != Domain::Sphere2) throw InputError("cracktip comparison expects a sphere mesh");
    const CrackSpec& c = mesh.crack;
    const bool is_half_equator = c.arcs.size() == 1 &&
                                 std::abs(c.arcs[0].start + M_PI / 2) < 1e-9 &&
                                 std::abs(c.arcs[0].end - M_PI / 2) < 1e-9;
    if (!is_half_equator)
        throw InputError("cracktip comparison expects the S_{pi/2} mesh family");
    if (eigvec.size() != mesh.dof_count()) throw InputError("eigenvector length mismatch");

    Eigen::VectorXd f = sample_cracktip_restriction(mesh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.dof_count());
    const double total = ones.dot(mass.matrix * ones);
    auto mean_removed = [&](const Eigen::VectorXd& v) {
        const double m = ones.dot(mass.matrix * v) / total;
        return Eigen::VectorXd(v.array() - m);
    };
    const Eigen::VectorXd a = mean_removed(eigvec), b = mean_removed(f);
    const double na = std::sqrt(a.dot(mass.matrix * a)), nb = std::sqrt(b.dot(mass.matrix * b));
    if (na == 0 || nb == 0) throw DegenerateInputError("zero field in cracktip comparison");
    return std::abs(a.dot(mass.matrix * b)) / (na * nb);
}

double circle_arc_lambda1(double length) {
    if (!(length > 0 && length <= 2 * M_PI + 1e-12))
        throw RangeError("interval length must lie in (0, 2 pi]");
    const double q = M_PI / length;
    return q * q;
}

Richardson richardson_extrapolate(double coarse, double mid, double fine) {
    Richardson out;
    const double d1 = coarse - mid, d2 = mid - fine;
    if (d2 == 0.0 || d1 * d2 <= 0.0) {
        // rate not identifiable (already converged or non-monotone deltas)
        out.value = fine;
        out.rate = 0.0;
        return out;
    }
    const double ratio = d1 / d2;
    if (ratio <= 1.0) {  // deltas not contracting
        out.value = fine;
        out.rate = 0.0;
        return out;
    }
    out.rate = std::log2(ratio);
    out.value = fine - d2 / (ratio - 1.0);
    return out;
}

void write_sweep_csv(const std::vector<SweepRecord>& records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot open " + path);
    f << "param,level,lambda1,residual,seconds\n";
    f.precision(12);
    for (const auto& r : records)
        f << r.param << ',' << r.level << ',' << r.lambda1 << ',' << r.residual << ',' << r.seconds
          << '\n';
}

} // namespace slitspec
