#include "slitspec/errors.hpp"
#include "slitspec/manifest.hpp"
#include "slitspec/monotonicity.hpp"
#include "slitspec/spectra.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

using namespace slitspec;

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

// "lo:hi:count" -> log-spaced radii
std::vector<double> parse_radii(const std::string& s) {
    std::stringstream ss(s);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c, ':');
    const double lo = std::stod(a), hi = std::stod(b);
    const int count = c.empty() ? 20 : std::stoi(c);
    return log_spaced_radii(lo, hi, count);
}

std::vector<ArcInterval> parse_gaps(const std::string& s) {
    std::vector<ArcInterval> gaps;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InputError("gap format is start:end");
        gaps.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return gaps;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
    if (const char* env = std::getenv("SLITSPEC_SEED")) return std::strtoull(env, nullptr, 10);
    return fallback;
}

RunManifest make_manifest(const std::string& command, int argc, char** argv,
                          const SolveOptions& opts) {
    RunManifest m;
    m.command = command;
    for (int i = 0; i < argc; ++i) m.argv.push_back(argv[i]);
    m.seed = opts.seed;
    m.tol = opts.tol;
    return m;
}

void write_manifest(RunManifest& m, const std::string& out_base, double seconds) {
    m.seconds = seconds;
    m.seal();
    atomic_write_file(out_base + ".manifest.json", m.to_json() + "\n");
}

void write_profile_csv(const EnergyProfile& p, const std::string& path) {
    std::ostringstream csv;
    csv << "r,E,phi,dE,ineq_ok\n";
    csv.precision(12);
    for (size_t i = 0; i < p.radii.size(); ++i)
        csv << p.radii[i] << ',' << p.E[i] << ',' << p.phi[i] << ',' << p.dE[i] << ','
            << (p.inequality_ok[i] ? 1 : 0) << '\n';
    atomic_write_file(path, csv.str());
}

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int cmd_eig_sphere(double beta, int level, double grading, int k, const std::string& out,
                   int argc, char** argv, const SolveOptions& opts) {
    const double t0 = now_s();
    SphereSolve s = solve_sphere_arc(beta, level, grading, k, opts);
    std::printf("lambda1 = %.10f\n", s.eigs.lambda1_global);
    std::printf("zero_modes = %d  components = %d  dofs = %d  h_max = %.5f\n", s.eigs.zero_modes,
                s.mesh.num_components, s.mesh.dof_count(), s.mesh.h_max);
    for (size_t i = 0; i < s.eigs.eigenvalues.size(); ++i)
        std::printf("eig[%zu] = %.10f  (residual %.3e)\n", i, s.eigs.eigenvalues[i],
                    s.eigs.residuals[i]);
    if (std::abs(beta - M_PI / 2) < 1e-6) {
        const double sim =
            compare_to_cracktip(s.eigs.eigenvectors.col(s.eigs.zero_modes), s.mesh, s.mass);
        std::printf("cracktip_similarity = %.6f\n", sim);
    }
    if (!out.empty()) {
        std::ostringstream csv;
        csv << "index,eigenvalue,residual\n";
        csv.precision(12);
        for (size_t i = 0; i < s.eigs.eigenvalues.size(); ++i)
            csv << i << ',' << s.eigs.eigenvalues[i] << ',' << s.eigs.residuals[i] << '\n';
        atomic_write_file(out + ".csv", csv.str());
        RunManifest m = make_manifest("eig-sphere", argc, argv, opts);
        m.parameters = {{"beta", std::to_string(beta)},
                        {"level", std::to_string(level)},
                        {"grading", std::to_string(grading)},
                        {"k", std::to_string(k)}};
        m.outputs = {out + ".csv"};
        m.add_mesh("sphere", s.mesh);
        write_manifest(m, out, now_s() - t0);
    }
    return 0;
}

int cmd_monotonicity(const std::string& data, const std::string& radii_spec, int level,
                     const std::string& out, int argc, char** argv, const SolveOptions& opts) {
    const double t0 = now_s();
    EnergyProfile profile;
    if (data == "cracktip" || data == "constant") {
        const std::vector<double> radii =
            radii_spec.empty() ? log_spaced_radii(0.05, 1.0, 31) : parse_radii(radii_spec);
        const AnalyticField field =
            data == "cracktip" ? AnalyticField::cracktip2d() : AnalyticField::constant(1.0, 2);
        ExponentParams p2(2, 0.25);
        profile = energy_profile_analytic(field, p2, radii);
        std::printf("analytic 2D profile (%s): phi in [%.9f, %.9f], monotone=%d\n", data.c_str(),
                    *std::min_element(profile.phi.begin(), profile.phi.end()),
                    *std::max_element(profile.phi.begin(), profile.phi.end()),
                    profile.monotone ? 1 : 0);
        if (data == "cracktip") {
            ExponentParams p3(3, 0.75);
            EnergyProfile pr3 = energy_profile_analytic(AnalyticField::cracktip_times_r(), p3, radii);
            std::printf("analytic 3D profile: phi in [%.9f, %.9f] (pi = %.9f), monotone=%d\n",
                        *std::min_element(pr3.phi.begin(), pr3.phi.end()),
                        *std::max_element(pr3.phi.begin(), pr3.phi.end()), M_PI,
                        pr3.monotone ? 1 : 0);
        }
    } else if (data == "perturbed") {
        const std::vector<double> radii =
            radii_spec.empty() ? log_spaced_radii(0.15, 0.8, 20) : parse_radii(radii_spec);
        const AnalyticField tip = AnalyticField::custom2d(1.0, {0.0, 0.3});
        BoundaryData bd = [&](const Eigen::Vector3d& p, int side) { return tip.value(p, side); };
        ExponentParams p2(2, 0.25);
        // slack from a two-level delta
        SlitMesh coarse = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), level, 2.0);
        SlitMesh fine = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), level + 1, 2.0);
        EnergyProfile pc =
            energy_profile_fem(coarse, solve_slit_disk_neumann(coarse, bd), p2, radii, 1.0);
        ScalarField uf = solve_slit_disk_neumann(fine, bd);
        EnergyProfile pf = energy_profile_fem(fine, uf, p2, radii, 1.0);
        double delta = 0.0;
        for (size_t i = 0; i < radii.size(); ++i)
            delta = std::max(delta, std::abs(pc.phi[i] - pf.phi[i]));
        const double slack = 5.0 * delta + 1e-9;
        profile = energy_profile_fem(fine, uf, p2, radii, slack);
        std::printf("fem profile (cracktip + 0.3 x): slack=%.3e monotone=%d\n", slack,
                    profile.monotone ? 1 : 0);
    } else {
        throw InputError("--data must be cracktip, perturbed or constant");
    }
    if (!out.empty()) {
        write_profile_csv(profile, out);
        RunManifest m = make_manifest("monotonicity", argc, argv, opts);
        m.parameters = {{"data", data}, {"level", std::to_string(level)}};
        m.outputs = {out};
        write_manifest(m, out, now_s() - t0);
    }
    return profile.monotone ? 0 : 1;
}

int cmd_convergence(const std::string& levels_spec, const std::string& target, double grading,
                    const SolveOptions& opts) {
    const auto colon = levels_spec.find(':');
    if (colon == std::string::npos) throw InputError("--levels format is lo:hi");
    const int lo = std::stoi(levels_spec.substr(0, colon));
    const int hi = std::stoi(levels_spec.substr(colon + 1));
    if (hi <= lo) throw InputError("need at least two levels");

    std::vector<double> values;
    std::printf("level,value,delta,seconds\n");
    for (int lvl = lo; lvl <= hi; ++lvl) {
        const double t0 = now_s();
        double value = 0.0;
        if (target == "lambda1_half_equator") {
            value = lambda1_sphere_minus_arc(M_PI / 2, lvl, grading, opts);
        } else if (target == "phi_cracktip") {
            SlitMesh disk = build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), lvl, grading);
            const AnalyticField tip = AnalyticField::cracktip2d();
            ScalarField u = solve_slit_disk_neumann(
                disk, [&](const Eigen::Vector3d& p, int side) { return tip.value(p, side); });
            ExponentParams p2(2, 0.25);
            const auto radii = log_spaced_radii(std::max(0.15, 2.5 * disk.h_max), 0.8, 12);
            EnergyProfile prof = energy_profile_fem(disk, u, p2, radii, 1.0);
            double mean = 0.0;
            for (double v : prof.phi) mean += v;
            value = mean / prof.phi.size();
        } else {
            throw InputError("--target must be lambda1_half_equator or phi_cracktip");
        }
        values.push_back(value);
        const double delta = values.size() > 1 ? value - values[values.size() - 2] : 0.0;
        std::printf("%d,%.10f,%.3e,%.2f\n", lvl, value, delta, now_s() - t0);
        std::fflush(stdout);
    }
    if (values.size() >= 3) {
        const size_t n = values.size();
        Richardson rich = richardson_extrapolate(values[n - 3], values[n - 2], values[n - 1]);
        std::printf("extrapolated = %.10f (fitted rate %.2f)\n", rich.value, rich.rate);
        bool shrinking = true;
        for (size_t i = 2; i < n; ++i)
            if (std::abs(values[i] - values[i - 1]) > std::abs(values[i - 1] - values[i - 2]))
                shrinking = false;
        std::printf("deltas_shrink = %d\n", shrinking ? 1 : 0);
        return shrinking ? 0 : 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neumann eigenvalues and energy monotonicity on slit spheres and disks"};
    app.require_subcommand(1);

    bool json_errors = false;
    double tol = 1e-8;
    std::uint64_t seed = seed_from_env(kDefaultSeed);
    app.add_flag("--json-errors", json_errors, "machine-readable errors on stderr");
    app.add_option("--tol", tol, "eigensolver residual tolerance");
    app.add_option("--seed", seed, "solver seed (overrides SLITSPEC_SEED)");

    auto* eig = app.add_subcommand("eig-sphere", "eigenvalues of the sphere minus S_beta");
    double beta = 0.0, grading = 2.0;
    int level = 0, k = 8;
    std::string out;
    eig->add_option("--beta", beta, "arc half-aperture in radians")->required();
    eig->add_option("--level", level)->required();
    eig->add_option("--grading", grading);
    eig->add_option("--k", k);
    eig->add_option("--out", out, "output prefix (.csv + .manifest.json)");

    auto* sweep = app.add_subcommand("sweep", "lambda1 over a family of cracks");
    std::string betas_spec, gaps_spec, sweep_out = "sweep.csv";
    int sweep_level = 4, jobs = 1;
    double sweep_grading = 2.0;
    sweep->add_option("--betas", betas_spec, "comma-separated apertures");
    sweep->add_option("--gaps", gaps_spec, "half-equator gaps start:end[,start:end...]");
    sweep->add_option("--level", sweep_level);
    sweep->add_option("--grading", sweep_grading);
    sweep->add_option("--jobs", jobs);
    sweep->add_option("--out", sweep_out);

    auto* leg = app.add_subcommand("legendre", "slope of lambda1 against cos(beta) near pi/2");
    double window = 0.1;
    int leg_count = 5, leg_level = 5;
    double leg_grading = 2.0;
    leg->add_option("--window", window);
    leg->add_option("--count", leg_count);
    leg->add_option("--level", leg_level);
    leg->add_option("--grading", leg_grading);

    auto* mono = app.add_subcommand("monotonicity", "normalized-energy profiles");
    std::string data = "cracktip", radii_spec, mono_out;
    int mono_level = 3;
    mono->add_option("--data", data, "cracktip | perturbed | constant");
    mono->add_option("--radii", radii_spec, "lo:hi:count (log-spaced)");
    mono->add_option("--level", mono_level);
    mono->add_option("--out", mono_out);

    auto* conv = app.add_subcommand("convergence", "refinement study");
    std::string levels_spec = "3:5", target = "lambda1_half_equator";
    double conv_grading = 2.0;
    conv->add_option("--levels", levels_spec);
    conv->add_option("--target", target);
    conv->add_option("--grading", conv_grading);

    auto* exp = app.add_subcommand("export-mesh", "write OFF + seam sidecar");
    double exp_beta = M_PI / 2;
    int exp_level = 2;
    double exp_grading = 2.0;
    std::string exp_out = "mesh.off", exp_domain = "sphere";
    exp->add_option("--domain", exp_domain, "sphere | disk");
    exp->add_option("--beta", exp_beta);
    exp->add_option("--level", exp_level);
    exp->add_option("--grading", exp_grading);
    exp->add_option("--out", exp_out);

    auto* rerun = app.add_subcommand("rerun", "re-execute a stored manifest");
    std::string manifest_path;
    rerun->add_option("--manifest", manifest_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0 && json_errors)
            std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":2}\n";
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    SolveOptions opts;
    opts.tol = tol;
    opts.seed = seed;

    try {
        if (eig->parsed()) return cmd_eig_sphere(beta, level, grading, k, out, argc, argv, opts);

        if (sweep->parsed()) {
            const double t0 = now_s();
            std::vector<SweepRecord> records;
            if (!betas_spec.empty()) {
                records = sweep_betas(parse_list(betas_spec), sweep_level, sweep_grading, opts, jobs);
            } else if (!gaps_spec.empty()) {
                auto recs = rigidity_family({parse_gaps(gaps_spec)}, sweep_level, sweep_grading, opts);
                for (const auto& r : recs) {
                    SweepRecord rec;
                    rec.label = r.label;
                    rec.level = sweep_level;
                    rec.lambda1 = r.lambda_fine;
                    records.push_back(rec);
                    std::printf("%s: lambda1=%.8f margin=%.3e exceeds_3/4=%d\n", r.label.c_str(),
                                r.lambda_fine, r.margin, r.exceeds ? 1 : 0);
                }
            } else {
                throw InputError("sweep needs --betas or --gaps");
            }
            write_sweep_csv(records, sweep_out);
            RunManifest m = make_manifest("sweep", argc, argv, opts);
            m.parameters = {{"betas", betas_spec},
                            {"gaps", gaps_spec},
                            {"level", std::to_string(sweep_level)}};
            m.outputs = {sweep_out};
            write_manifest(m, sweep_out, now_s() - t0);
            for (const auto& r : records)
                std::printf("param=%.6f lambda1=%.8f\n", r.param, r.lambda1);
            return 0;
        }

        if (leg->parsed()) {
            std::vector<double> betas;
            for (int i = 0; i < leg_count; ++i)
                betas.push_back(M_PI / 2 - window + 2.0 * window * i / std::max(1, leg_count - 1));
            LegendreFit fit = legendre_slope(betas, leg_level, leg_grading, opts);
            std::printf("slope = %.6f (target 2/pi = %.6f)\n", fit.slope, 2.0 / M_PI);
            std::printf("intercept = %.6f (target 0.75)\n", fit.intercept);
            const bool ok = std::abs(fit.slope - 2.0 / M_PI) <= 0.1 * (2.0 / M_PI) &&
                            std::abs(fit.intercept - 0.75) <= 0.02 * 0.75;
            return ok ? 0 : 1;
        }

        if (mono->parsed())
            return cmd_monotonicity(data, radii_spec, mono_level, mono_out, argc, argv, opts);

        if (conv->parsed()) return cmd_convergence(levels_spec, target, conv_grading, opts);

        if (exp->parsed()) {
            SlitMesh mesh =
                exp_domain == "disk"
                    ? build_slit_disk(CrackSpec::disk_slit(0.0, 1.0), exp_level, exp_grading)
                    : build_slit_sphere(CrackSpec::sphere_arc(exp_beta), exp_level, exp_grading);
            export_mesh(mesh, exp_out);
            std::printf("wrote %s (+ .seams.json)\n", exp_out.c_str());
            return 0;
        }

        if (rerun->parsed()) {
            RunManifest m = RunManifest::from_json_file(manifest_path);
            if (m.argv.size() < 2) throw InputError("manifest carries no command line");
            std::string cmdline;
            cmdline += '"';
            cmdline += argv[0];
            cmdline += '"';
            for (size_t i = 1; i < m.argv.size(); ++i) {
                cmdline += " \"";
                cmdline += m.argv[i];
                cmdline += '"';
            }
            std::printf("re-running: %s\n", cmdline.c_str());
            std::fflush(stdout);
            const int rc = std::system(cmdline.c_str());
            return rc == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        if (json_errors)
            std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":" << e.exit_code() << "}\n";
        else
            std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        if (json_errors)
            std::cerr << "{\"error\":\"" << e.what() << "\",\"code\":1}\n";
        else
            std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
