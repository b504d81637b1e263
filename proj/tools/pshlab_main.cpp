// psh-lab: command-line front end for the lab library.
//
// Verbs:
//   solve      run one or more scenarios (JSON files or inline flags)
//   envelope   compute the psh envelope of a cosine obstacle, with reports
//   bound      evaluate a growth/stability certificate from given budgets
//   family     scaled-background family under a single certificate
//   stability  perturbation experiment around a solved potential
//   accept     run the acceptance programme
//
// Exit code 0 iff everything asserted by the chosen verb passes.  The only
// environment variable consulted is PSHLAB_THREADS (default worker count for
// `solve --jobs`).
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pshlab/acceptance.hpp"
#include "pshlab/bound_engine.hpp"
#include "pshlab/envelope.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/grid.hpp"
#include "pshlab/hessian.hpp"
#include "pshlab/io.hpp"
#include "pshlab/ma_solver.hpp"
#include "pshlab/measures.hpp"
#include "pshlab/scenario.hpp"
#include "pshlab/weight_chi.hpp"

using namespace pshlab;
using nlohmann::json;

namespace {

int env_default_jobs() {
    if (const char* v = std::getenv("PSHLAB_THREADS")) {
        const int k = std::atoi(v);
        if (k >= 1) return k;
    }
    return 1;
}

DensitySpec density_from_options(const std::string& path, double amplitude) {
    if (!path.empty()) return density_spec_from_json(read_text_file(path));
    DensitySpec d;
    d.kind = "manufactured";
    d.amplitude = amplitude;
    return d;
}

// raw m-th moment budget from the candidate family {phi}; heuristic upper
// when available, else the certified lower bound
double raw_budget_from_estimate(const GridMeasure& mu, double m, const GridFunction& phi,
                                double floor_value) {
    const AmEstimate est = estimate_Am(mu, m, {phi});
    const double root = est.upper_available ? est.upper_heuristic : est.lower;
    return std::max(std::pow(root, m), floor_value);
}

// ---------------------------------------------------------------- solve
int cmd_solve(const std::vector<std::string>& scenario_paths, Scenario inline_scenario,
              bool inline_used, int jobs) {
    std::vector<Scenario> list;
    for (const std::string& p : scenario_paths) list.push_back(load_scenario(p));
    if (inline_used || list.empty()) list.push_back(std::move(inline_scenario));

    struct Outcome {
        bool ok = false;
        std::string line;
    };
    std::vector<Outcome> out(list.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(list.size())));
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= list.size()) return;
            try {
                const RunManifest man = run_scenario(list[i]);
                std::ostringstream os;
                os << list[i].id << ": " << (man.pass() ? "pass" : "FAIL");
                if (man.bound_asserted && man.certificate_built)
                    os << "  (T " << man.certificate.T << ", bound "
                       << (man.bound_holds ? "holds" : "VIOLATED") << ")";
                os << "  -> " << list[i].outputs_dir;
                out[i] = {man.pass(), os.str()};
            } catch (const Error& e) {
                out[i] = {false, list[i].id + ": error: " + e.what()};
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    bool all = true;
    for (const Outcome& o : out) {
        std::printf("%s\n", o.line.c_str());
        all = all && o.ok;
    }
    return all ? 0 : 1;
}

// ---------------------------------------------------------------- envelope
int cmd_envelope(int n, int res, double offset, double depth, const std::string& out_dir) {
    const HermitianBackground bg = HermitianBackground::standard(n, 1.0, 2.0);
    PeriodicGrid g(n, res);
    const double tau = 2.0 * M_PI;
    const GridFunction h = GridFunction::sample(g, [&](const std::array<double, 4>& x) {
        const double c = (n == 1) ? std::cos(tau * x[0])
                                  : 0.5 * (std::cos(tau * x[0]) + std::cos(tau * x[2]));
        return std::min(0.0, offset - depth * c);
    });
    const EnvelopeResult er = psh_envelope(h, bg, {});
    const OrthogonalityReport orep = orthogonality_report(er, bg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    write_grid_function(out_dir + "/envelope.bin", er.u);
    write_grid_function_csv(out_dir + "/envelope.csv", er.u);
    write_grid_function_csv(out_dir + "/obstacle.csv", er.obstacle);
    {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < er.contact.size(); ++i)
            rows.push_back({static_cast<double>(i), static_cast<double>(er.contact[i])});
        write_csv(out_dir + "/contact.csv", {"index", "contact"}, rows);
    }
    json j;
    j["n"] = n;
    j["res"] = res;
    j["offset"] = offset;
    j["depth"] = depth;
    j["iterations"] = er.iterations;
    j["residual"] = er.residual;
    j["eigen_residual"] = er.eigen_residual;
    j["converged"] = er.converged;
    j["off_contact_mass_fraction"] = orep.off_contact_mass_fraction;
    j["max_contact_density_gap"] = orep.max_contact_density_gap;
    j["total_mass"] = orep.total_mass;
    write_text_file(out_dir + "/envelope_report.json", j.dump(2) + "\n");
    std::printf("envelope: %s in %d sweeps, off-contact mass fraction %.3e -> %s\n",
                er.converged ? "converged" : "NOT converged", er.iterations,
                orep.off_contact_mass_fraction, out_dir.c_str());
    return er.converged ? 0 : 1;
}

// ---------------------------------------------------------------- bound
DistributionFunction read_distribution_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    DistributionFunction dist;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
        char* end = nullptr;
        const double t = std::strtod(a.c_str(), &end);
        if (end == a.c_str()) continue; // header or junk row
        dist.t.push_back(t);
        dist.F.push_back(std::strtod(b.c_str(), nullptr));
    }
    if (dist.t.empty()) throw ParameterError("distribution csv has no numeric (t, F) rows: " + path);
    dist.mu_total = 1.0;
    dist.validate();
    return dist;
}

int cmd_bound(const std::string& mode, int n, double m, double am, double phihat_sup,
              double mass, const std::string& dist_path) {
    BoundCertificate cert;
    if (mode == "uniform")
        cert = uniform_bound(n, m, am);
    else if (mode == "local")
        cert = local_bound(n, m, am);
    else
        cert = stability_bound(n, m, am, phihat_sup, mass);

    bool rows_ok = true;
    json extra = json::array();
    if (!dist_path.empty()) {
        const DistributionFunction dist = read_distribution_csv(dist_path);
        for (const TraceRow& row : bound_self_consistency(dist, n, m, am)) {
            rows_ok = rows_ok && row.pass;
            extra.push_back({{"id", row.id}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"pass", row.pass}});
        }
    }
    json j = json::parse(cert.to_json());
    if (!dist_path.empty()) j["self_consistency"] = extra;
    std::printf("%s\n", j.dump(2).c_str());
    return cert.all_pass() && rows_ok ? 0 : 1;
}

// ---------------------------------------------------------------- family
int cmd_family(std::vector<double> ts, int n, int res, const std::string& density_path,
               double amplitude, double m, double am_raw, const std::string& out_dir) {
    if (ts.empty()) ts = {1.0, 0.5, 0.25, 0.125};
    const HermitianBackground theta = HermitianBackground::standard(n, 1.0, 2.0);
    PeriodicGrid g(n, res);
    const DensitySpec d = density_from_options(density_path, amplitude);
    d.validate(n);
    const GridMeasure mu = build_density(d, g, theta);
    double raw = am_raw;
    if (!(raw > 0.0)) {
        const TorusSolution base = solve_torus(mu, theta, {});
        raw = raw_budget_from_estimate(mu, m, base.phi, std::numeric_limits<double>::min());
    }
    const FamilyReport rep = family_experiment(ts, theta, mu, m, raw, {});

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    {
        std::vector<std::vector<double>> rows;
        for (const FamilyResult& fr : rep.results)
            rows.push_back({fr.t, fr.solved ? 1.0 : 0.0, fr.oscillation,
                            fr.normalized_oscillation, fr.theta_psh ? 1.0 : 0.0});
        write_csv(out_dir + "/family.csv",
                  {"t", "solved", "oscillation", "normalized_oscillation", "theta_psh"}, rows);
    }
    write_text_file(out_dir + "/family_report.json", rep.to_json() + "\n");
    const bool ok = rep.bound_holds && rep.containment_ok;
    std::printf("family: max oscillation %.6f vs T %.6f (%s), containment %s -> %s\n",
                rep.max_oscillation, rep.certificate.T, rep.bound_holds ? "holds" : "VIOLATED",
                rep.containment_ok ? "ok" : "FAIL", out_dir.c_str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- stability
int cmd_stability(int n, int res, const std::string& density_path, double amplitude, double m,
                  double am_raw, int levels, double lift, const std::string& out_dir) {
    const HermitianBackground bg = HermitianBackground::standard(n, 1.0, 2.0);
    PeriodicGrid g(n, res);
    const DensitySpec d = density_from_options(density_path, amplitude);
    d.validate(n);
    const GridMeasure mu = build_density(d, g, bg);
    const TorusSolution base = solve_torus(mu, bg, {});
    double raw = am_raw;
    if (!(raw > 0.0)) raw = raw_budget_from_estimate(mu, m, base.phi, 1.0);

    std::vector<GridFunction> competitors;
    for (int j = 1; j <= levels; ++j) {
        const double s = 1.0 - std::pow(2.0, -j);
        GridFunction c(g, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = s * base.phi[i];
        competitors.push_back(std::move(c));
    }
    {
        GridFunction c(g, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = base.phi[i] + lift;
        competitors.push_back(std::move(c));
    }
    const StabilityReport rep = stability_experiment(base.phi, mu, m, raw, competitors);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    {
        std::vector<std::vector<double>> rows;
        for (const StabilityPoint& p : rep.points)
            rows.push_back({p.mass, p.sup_defect, p.bound, p.holds ? 1.0 : 0.0});
        write_csv(out_dir + "/stability.csv", {"mass", "sup_defect", "bound", "holds"}, rows);
    }
    write_text_file(out_dir + "/stability_report.json", rep.to_json() + "\n");
    std::printf("stability: %zu perturbations, tau %.4f, fitted rate %s, all %s -> %s\n",
                rep.points.size(), rep.tau,
                rep.rate_estimated ? std::to_string(rep.fitted_rate).c_str() : "n/a",
                rep.all_hold ? "hold" : "VIOLATED", out_dir.c_str());
    return rep.all_hold ? 0 : 1;
}

// ---------------------------------------------------------------- accept
int cmd_accept(const std::vector<std::string>& only, const std::string& scratch) {
    const std::vector<AcceptanceResult> results = run_acceptance(scratch, only);
    bool all = !results.empty();
    for (const AcceptanceResult& r : results) {
        std::printf("%s\n", format_acceptance_line(r).c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"psh-lab: periodic and radial complex Monge-Ampere lab"};
    app.require_subcommand(1);

    // ---- solve
    auto* solve = app.add_subcommand("solve", "run scenarios from JSON files or inline flags");
    std::vector<std::string> scenario_paths;
    Scenario inl;
    std::string density_path;
    int jobs = env_default_jobs();
    solve->add_option("--scenario", scenario_paths, "scenario JSON file (repeatable)");
    solve->add_option("--id", inl.id, "inline scenario id");
    solve->add_option("--model", inl.model, "torus or ball");
    solve->add_option("--n", inl.n, "complex dimension (1 or 2)");
    solve->add_option("--density", density_path, "density spec JSON file");
    solve->add_option("--res", inl.resolutions, "resolution ladder (repeatable, increasing)");
    solve->add_option("--bound", inl.bound_mode, "uniform, local, or none");
    solve->add_option("--m", inl.m, "moment order for the certificate");
    solve->add_option("--am-source", inl.am_source, "estimate or fixed");
    solve->add_option("--am", inl.am_value, "raw moment budget when --am-source fixed");
    solve->add_option("--out", inl.outputs_dir, "output directory");
    solve->add_option("--seed", inl.seed, "seed recorded in the manifest");
    solve->add_flag("--plots", inl.plots, "emit SVG plots next to the CSVs");
    solve->add_option("--jobs", jobs, "worker threads for independent scenarios");

    // ---- envelope
    auto* env = app.add_subcommand("envelope", "psh envelope of a cosine obstacle");
    int env_n = 1, env_res = 128;
    double env_offset = 0.25, env_depth = 0.5;
    std::string env_out = "envelope_run";
    env->add_option("--n", env_n, "complex dimension");
    env->add_option("--res", env_res, "grid resolution");
    env->add_option("--offset", env_offset, "obstacle offset a in min(0, a - b cos)");
    env->add_option("--depth", env_depth, "obstacle depth b in min(0, a - b cos)");
    env->add_option("--out", env_out, "output directory");

    // ---- bound
    auto* bnd = app.add_subcommand("bound", "evaluate a certificate from explicit budgets");
    std::string bound_mode = "uniform", dist_path;
    int bound_n = 1;
    double bound_m = 4.0, bound_am = 1.0, bound_sup = 1.0, bound_mass = 1.0;
    bnd->add_option("--mode", bound_mode, "uniform, local, or stability")
        ->check(CLI::IsMember({"uniform", "local", "stability"}));
    bnd->add_option("--n", bound_n, "complex dimension");
    bnd->add_option("--m", bound_m, "moment order");
    bnd->add_option("--am", bound_am, "raw moment budget A_m")->required();
    bnd->add_option("--phihat-sup", bound_sup, "reference sup bound (stability mode)");
    bnd->add_option("--mass", bound_mass, "perturbation mass (stability mode)");
    bnd->add_option("--dist", dist_path, "distribution CSV (t,F) for the self-consistency replay");

    // ---- family
    auto* fam = app.add_subcommand("family", "scaled-background family under one certificate");
    std::vector<double> fam_t;
    int fam_n = 1, fam_res = 64;
    std::string fam_density, fam_out = "family_run";
    double fam_amp = 0.3, fam_m = 4.0, fam_am = 0.0;
    fam->add_option("--t", fam_t, "scale factors in (0,1] (repeatable; default 1,1/2,1/4,1/8)");
    fam->add_option("--n", fam_n, "complex dimension");
    fam->add_option("--res", fam_res, "grid resolution");
    fam->add_option("--density", fam_density, "density spec JSON file");
    fam->add_option("--amplitude", fam_amp, "manufactured density amplitude when no spec given");
    fam->add_option("--m", fam_m, "moment order");
    fam->add_option("--am", fam_am, "raw moment budget (default: estimated from the base solve)");
    fam->add_option("--out", fam_out, "output directory");

    // ---- stability
    auto* sta = app.add_subcommand("stability", "perturbation experiment around a solved base");
    int sta_n = 1, sta_res = 64, sta_levels = 6;
    std::string sta_density, sta_out = "stability_run";
    double sta_amp = 0.3, sta_m = 4.0, sta_am = 0.0, sta_lift = 0.01;
    sta->add_option("--n", sta_n, "complex dimension");
    sta->add_option("--res", sta_res, "grid resolution");
    sta->add_option("--density", sta_density, "density spec JSON file");
    sta->add_option("--amplitude", sta_amp, "manufactured density amplitude when no spec given");
    sta->add_option("--m", sta_m, "moment order");
    sta->add_option("--am", sta_am, "raw moment budget (default: estimated from the base solve)");
    sta->add_option("--levels", sta_levels, "number of shrinking perturbations");
    sta->add_option("--lift", sta_lift, "constant-lift perturbation size");
    sta->add_option("--out", sta_out, "output directory");

    // ---- accept
    auto* acc = app.add_subcommand("accept", "run the acceptance programme");
    std::vector<std::string> acc_only;
    std::string acc_scratch = "acceptance_runs";
    acc->add_option("--only", acc_only, "criterion ids to run (repeatable; default all)");
    acc->add_option("--scratch", acc_scratch, "scratch directory for scenario outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            const bool inline_used = !solve->get_option("--model")->empty() ||
                                     !solve->get_option("--density")->empty() ||
                                     !solve->get_option("--res")->empty();
            if (!density_path.empty())
                inl.density_inline = std::make_shared<DensitySpec>(
                    density_spec_from_json(read_text_file(density_path)));
            return cmd_solve(scenario_paths, std::move(inl), inline_used, jobs);
        }
        if (*env) return cmd_envelope(env_n, env_res, env_offset, env_depth, env_out);
        if (*bnd)
            return cmd_bound(bound_mode, bound_n, bound_m, bound_am, bound_sup, bound_mass,
                             dist_path);
        if (*fam)
            return cmd_family(fam_t, fam_n, fam_res, fam_density, fam_amp, fam_m, fam_am, fam_out);
        if (*sta)
            return cmd_stability(sta_n, sta_res, sta_density, sta_amp, sta_m, sta_am, sta_levels,
                                 sta_lift, sta_out);
        if (*acc) return cmd_accept(acc_only, acc_scratch);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
