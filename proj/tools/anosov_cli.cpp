// Batch experiment driver: every module behind one subcommand, file outputs
// suitable for plotting and regression diffs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anosov/conjugacy.hpp"
#include "anosov/livsic.hpp"
#include "anosov/shadowing.hpp"
#include "anosov/srb.hpp"

using namespace anosov;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string model_path;
    std::string out_dir = "out";
    std::uint64_t seed = 7;
    int threads = 0; // 0 = library default; kept in outputs for reproducibility
};

void add_common(CLI::App* cmd, CommonOpts& c, bool needs_model = true) {
    if (needs_model)
        cmd->add_option("--model", c.model_path, "model description file (JSON)")->required();
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "RNG seed recorded in all outputs");
    cmd->add_option("--threads", c.threads, "worker cap (informational)");
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw ModelError("cannot write " + p.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

nlohmann::json run_header(const CommonOpts& c, const std::string& sub) {
    nlohmann::json j;
    j["subcommand"] = sub;
    j["model"] = c.model_path;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_certify(const CommonOpts& c, double half_u, double half_s, double lambda, int grid) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    ConeParams params{half_u, half_s, lambda, 1.0};
    auto cert = certify_cones(f, params, grid);
    nlohmann::json j = run_header(c, "certify");
    j["certificate"] = nlohmann::json::parse(cert.to_json());
    write_text(fs::path(c.out_dir) / "certificate.json", j.dump(2));
    std::cout << (cert.passed ? "certified" : ("FAILED: " + cert.failure)) << "\n";
    return cert.passed ? 0 : 2;
}

int run_periodic(const CommonOpts& c, int nmax) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    std::ostringstream csv;
    csv << "period,rep_x,rep_y,lambda_u,lambda_s,defect_u,defect_s\n";
    double defect = 0.0;
    bool ok = true;
    for (int n = 1; n <= nmax; ++n) {
        auto orbits = find_periodic(f, n);
        for (const auto& o : orbits) {
            if (o.period != n) continue;
            double du = std::fabs(o.lambda_u - f.eigen().lambda_u());
            double ds = std::fabs(o.lambda_s - f.eigen().lambda_s());
            defect = std::max(defect, std::max(du, ds));
            csv << o.period << "," << csv_num(o.points[0].x) << "," << csv_num(o.points[0].y)
                << "," << csv_num(o.lambda_u) << "," << csv_num(o.lambda_s) << ","
                << csv_num(du) << "," << csv_num(ds) << "\n";
        }
    }
    write_text(fs::path(c.out_dir) / "periodic.csv", csv.str());
    nlohmann::json j = run_header(c, "periodic");
    j["nmax"] = nmax;
    j["periodic_data_defect"] = defect;
    write_text(fs::path(c.out_dir) / "periodic.json", j.dump(2));
    std::cout << "periodic-data defect vs A: " << defect << "\n";
    return ok ? 0 : 2;
}

int run_livsic(const CommonOpts& c, int N, int F) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    auto du = DirectionField::compute(f, DirectionField::Flag::Unstable, N, 30);
    auto obs = observable_log_unstable(f, du, N);
    auto sol = solve_cohomology(f, obs.psi, F);
    obs.psi.save((fs::path(c.out_dir) / "psi.bin").string());
    sol.phi.save((fs::path(c.out_dir) / "phi_u.bin").string());
    nlohmann::json j = run_header(c, "livsic");
    j["N"] = N;
    j["F"] = F;
    j["lambda_u"] = obs.lambda_u;
    j["max_periodic_mean"] = obs.max_periodic_mean;
    j["sup_residual"] = sol.sup_residual;
    j["rms_residual"] = sol.rms_residual;
    j["iterations"] = sol.iterations;
    write_text(fs::path(c.out_dir) / "livsic.json", j.dump(2));
    std::cout << "sup residual " << sol.sup_residual << "\n";
    return 0;
}

int run_conformal(const CommonOpts& c, int pairs, int N, int F) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    auto du = DirectionField::compute(f, DirectionField::Flag::Unstable, N, 30);
    auto obs = observable_log_unstable(f, du, N);
    auto sol = solve_cohomology(f, obs.psi, F);
    const double target = std::exp(obs.lambda_u);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::ostringstream csv;
    csv << "a_x,a_y,arc,du_ab,du_fafb,ratio,target,rel_err\n";
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
        TorusPoint a{unif(rng), unif(rng)};
        double arc = 0.1 + 0.2 * unif(rng);
        LeafSegment seg = trace_leaf(f, du, a, arc);
        TorusPoint b = seg.point_at(arc);
        double d0 = conformal_distance(f, sol.phi, du, a, b);
        double d1 = conformal_distance(f, sol.phi, du, f.apply(a), f.apply(b));
        double ratio = d1 / d0;
        double rel = std::fabs(ratio - target) / target;
        worst = std::max(worst, rel);
        csv << csv_num(a.x) << "," << csv_num(a.y) << "," << csv_num(arc) << ","
            << csv_num(d0) << "," << csv_num(d1) << "," << csv_num(ratio) << ","
            << csv_num(target) << "," << csv_num(rel) << "\n";
    }
    write_text(fs::path(c.out_dir) / "conformal.csv", csv.str());
    nlohmann::json j = run_header(c, "conformal");
    j["pairs"] = pairs;
    j["target_ratio"] = target;
    j["worst_rel_err"] = worst;
    write_text(fs::path(c.out_dir) / "conformal.json", j.dump(2));
    std::cout << "worst relative scaling error " << worst << "\n";
    return 0;
}

int run_srb(const CommonOpts& c, int N, int F, int boxes) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    auto inv = invariant_density(f, N, F);
    inv.density.save((fs::path(c.out_dir) / "density.bin").string());
    inv.phi.save((fs::path(c.out_dir) / "phi_jac.bin").string());

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < boxes; ++t) {
        double side = (t % 3 == 0) ? 1.0 / 8 : (t % 3 == 1 ? 1.0 / 16 : 1.0 / 32);
        Box b{unif(rng), unif(rng), side};
        worst = std::max(worst, std::fabs(box_measure(inv.density, b) -
                                          box_measure_pullback(f, inv.density, b)));
    }
    auto rep = entropy_report(f, c.seed);
    nlohmann::json j = run_header(c, "srb");
    j["solver_residual"] = inv.solver_residual;
    j["boxes"] = boxes;
    j["worst_invariance_defect"] = worst;
    j["entropy"] = nlohmann::json::parse(rep.to_json());
    write_text(fs::path(c.out_dir) / "srb.json", j.dump(2));
    std::cout << "invariance defect " << worst << ", h+ " << rep.h_plus << "\n";
    return 0;
}

int run_conjugacy(const CommonOpts& c, int N, int F) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    ConjugacyOptions opts;
    auto h = base_conjugacy(f, opts);
    h.save((fs::path(c.out_dir) / "conjugacy").string());

    auto du = DirectionField::compute(f, DirectionField::Flag::Unstable, N, 30);
    auto obs = observable_log_unstable(f, du, N);
    auto sol = solve_cohomology(f, obs.psi, F);

    // method agreement on one shared anchor interval
    Vec2 a0{0.3, 0.4};
    Vec2 eu = f.eigen().e_u;
    TorusPoint b0 = project(h.apply_lift(a0));
    TorusPoint b1 = project(h.apply_lift(a0 + eu));
    auto lm = leaf_ode_conjugacy(f, sol.phi, du, b0, b1, 1.0, 200);
    double agree_ode = 0.0;
    for (std::size_t k = 0; k < lm.thetas.size(); k += 5) {
        Vec2 expect = h.apply_lift(a0 + eu * lm.thetas[k]);
        agree_ode = std::max(agree_ode, torus_dist(lm.points[k], project(expect)));
    }

    auto est = regularity_estimate(h, f, DirectionField::Flag::Unstable);
    nlohmann::json j = run_header(c, "conjugacy");
    j["residual"] = h.residual();
    j["sweeps"] = h.sweeps();
    j["displacement_sup"] = h.displacement_sup();
    j["leaf_ode_agreement"] = agree_ode;
    j["regularity"] = nlohmann::json::parse(est.to_json());
    write_text(fs::path(c.out_dir) / "conjugacy.json", j.dump(2));
    std::cout << "residual " << h.residual() << ", leaf-ODE agreement " << agree_ode << "\n";
    return 0;
}

int run_specification(const CommonOpts& c, const std::vector<int>& blocks, int gap, double eps,
                      int period_p, int period_q) {
    auto f = ToralEndomorphism::load_file(c.model_path);
    auto du = DirectionField::compute(f, DirectionField::Flag::Unstable, 128, 30);
    auto ds = DirectionField::compute(f, DirectionField::Flag::Stable, 128, 40);
    auto pick = [&](int n) -> PeriodicOrbit {
        auto orbits = find_periodic(f, n);
        for (const auto& o : orbits)
            if (o.period == n) return o;
        throw ModelError("no orbit of period " + std::to_string(n));
    };
    PeriodicOrbit p = pick(period_p);
    PeriodicOrbit q = pick(period_q);
    auto res = specification_concatenate(f, du, ds, p, q, blocks, gap, eps);
    nlohmann::json j = run_header(c, "specification");
    j["report"] = nlohmann::json::parse(res.to_json());
    write_text(fs::path(c.out_dir) / "specification.json", j.dump(2));
    std::cout << "cycle " << res.shadow.cycle_length << ", shadow distance "
              << res.shadow.shadow_distance << "\n";
    return 0;
}

int run_spectrum(const CommonOpts& c, const std::string& matrix_text) {
    // rows separated by ';', entries by ','
    std::vector<std::vector<std::int64_t>> M;
    std::stringstream rows(matrix_text);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::vector<std::int64_t> r;
        std::stringstream entries(row);
        std::string e;
        while (std::getline(entries, e, ',')) r.push_back(std::stoll(e));
        M.push_back(r);
    }
    auto rep = spectrum_diagnostics(M);
    nlohmann::json j = run_header(c, "spectrum");
    j["report"] = nlohmann::json::parse(rep.to_json());
    write_text(fs::path(c.out_dir) / "spectrum.json", j.dump(2));
    std::cout << "expanding " << rep.n_expanding << ", sum log+ " << rep.sum_log_expanding
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Anosov endomorphisms of T^2"};
    app.require_subcommand(1);

    CommonOpts c;
    double half_u = 0.3, half_s = 0.3, lambda = 3.0, eps = 0.05;
    int grid = 256, nmax = 4, N = 256, F = 32, pairs = 100, boxes = 200, gap = 20;
    int period_p = 1, period_q = 2;
    std::vector<int> blocks{150, 150, 150, 150};
    std::string matrix_text;

    auto* certify = app.add_subcommand("certify", "cone-field hyperbolicity certificate");
    add_common(certify, c);
    certify->add_option("--half-angle-u", half_u);
    certify->add_option("--half-angle-s", half_s);
    certify->add_option("--lambda", lambda, "required unstable expansion");
    certify->add_option("--grid", grid);

    auto* periodic = app.add_subcommand("periodic", "periodic orbit census and data defect");
    add_common(periodic, c);
    periodic->add_option("--nmax", nmax, "max period");

    auto* livsic = app.add_subcommand("livsic", "transfer function for log|Df|E^u|");
    add_common(livsic, c);
    livsic->add_option("--N", N, "grid size");
    livsic->add_option("--F", F, "frequency cutoff");

    auto* conformal = app.add_subcommand("conformal", "conformal leaf metric scaling table");
    add_common(conformal, c);
    conformal->add_option("--pairs", pairs);
    conformal->add_option("--N", N);
    conformal->add_option("--F", F);

    auto* srb = app.add_subcommand("srb", "invariant density, invariance, entropy report");
    add_common(srb, c);
    srb->add_option("--N", N);
    srb->add_option("--F", F);
    srb->add_option("--boxes", boxes);

    auto* conj = app.add_subcommand("conjugacy", "conjugacy construction and regularity");
    add_common(conj, c);
    conj->add_option("--N", N);
    conj->add_option("--F", F);

    auto* spec = app.add_subcommand("specification", "orbit-block concatenation report");
    add_common(spec, c);
    spec->add_option("--blocks", blocks, "block lengths (alternating p,q)");
    spec->add_option("--gap", gap);
    spec->add_option("--eps", eps);
    spec->add_option("--period-p", period_p);
    spec->add_option("--period-q", period_q);

    auto* spectrum = app.add_subcommand("spectrum", "d>=3 linear eigen-splitting diagnostics");
    add_common(spectrum, c, false);
    spectrum->add_option("--matrix", matrix_text, "rows 'a,b;c,d' of an integer matrix")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(c.out_dir);
        if (certify->parsed()) return run_certify(c, half_u, half_s, lambda, grid);
        if (periodic->parsed()) return run_periodic(c, nmax);
        if (livsic->parsed()) return run_livsic(c, N, F);
        if (conformal->parsed()) return run_conformal(c, pairs, N, F);
        if (srb->parsed()) return run_srb(c, N, F, boxes);
        if (conj->parsed()) return run_conjugacy(c, N, F);
        if (spec->parsed()) return run_specification(c, blocks, gap, eps, period_p, period_q);
        if (spectrum->parsed()) return run_spectrum(c, matrix_text);
    } catch (const AnosovError& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        nlohmann::json j;
        j["error"] = e.code();
        j["message"] = e.what();
        std::error_code ignore;
        fs::create_directories(c.out_dir, ignore);
        std::ofstream out(fs::path(c.out_dir) / "error.json");
        if (out) out << j.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
