// Command-line front end: pipeline stages (hamiltonian, equilibrium,
// normalform, stability, sweep) over a parameter file, emitting plot-ready
// text/CSV/JSON artifacts.  Exit codes: 0 ok, 1 computation error, 2 usage.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinorbit/stability.hpp"
#include "spinorbit/sweep.hpp"

using namespace spinorbit;

namespace {

constexpr double kArcmin = 180.0 * 60.0 / M_PI;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

PhysicalParams resolve_params(const std::string& spec) {
    if (spec == "table1") return mercury_params();
    return load_params(spec);
}

std::vector<double> parse_range(const std::string& text) {
    // "start:stop:step" (inclusive) or a single value
    std::vector<double> out;
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) {
        out.push_back(std::strtod(text.c_str(), nullptr));
        return out;
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw ConfigError("range must be start:stop:step, got '" + text + "'");
    const double start = std::strtod(text.substr(0, c1).c_str(), nullptr);
    const double stop = std::strtod(text.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
    const double step = std::strtod(text.substr(c2 + 1).c_str(), nullptr);
    if (!(step > 0.0)) throw ConfigError("range step must be positive: " + text);
    for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok =
            comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
        out.push_back(std::atoi(tok.c_str()));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

int env_threads() {
    const char* t = std::getenv("SPINORBIT_THREADS");
    if (!t) return 0;
    const int n = std::atoi(t);
    return n > 0 ? n : 0;
}

struct PipelineData {
    CassiniState eq;
    UntangledForm form;
    PoissonSeries H0;
};

PipelineData run_pipeline(const AveragedHamiltonian& H, int rmax, int K) {
    PipelineData out;
    out.eq = find_equilibrium(H);
    out.form = untangle(taylor_expand(H, out.eq, 2), H.params().n);
    const int bound = normalization_bound(rmax, K);
    out.H0 = to_action_angle(out.form, expand_untangled(H, out.eq, out.form, bound - 2));
    return out;
}

void print_equilibrium(const PhysicalParams& p, const CassiniState& eq,
                       const UntangledForm& form) {
    std::cout << "eps_star_arcmin " << fmt(eq.eps_arcmin()) << "\n"
              << "eps_star_rad " << fmt(eq.eps_star) << "\n"
              << "K_star_rad " << fmt(eq.K_star) << " (side: " << (eq.K_above_i ? "K>i" : "K<i")
              << ")\n"
              << "Sigma1_star " << fmt(eq.sigma_star[0]) << "  Sigma3_star "
              << fmt(eq.sigma_star[1]) << " (units of C n)\n"
              << "obliquity_implicit_arcmin " << fmt(obliquity_implicit(p) * kArcmin) << "\n"
              << "omega_u1_rad_day " << fmt(form.omega_u[0]) << "  period_yr "
              << fmt(2.0 * M_PI / form.omega_u[0] / 365.25) << "\n"
              << "omega_u3_rad_day " << fmt(form.omega_u[1]) << "  period_yr "
              << fmt(2.0 * M_PI / form.omega_u[1] / 365.25) << "\n"
              << "U1_star " << fmt(form.U_star[0]) << "  U3_star " << fmt(form.U_star[1])
              << "\n";
}

int cmd_hamiltonian(const PhysicalParams& p, int ecc_order) {
    const AveragedHamiltonian H = build_averaged_hamiltonian(p, ecc_order);
    const HamiltonianConstants& c = H.constants();
    std::cout << "H20 " << fmt(ecc_H20(p.e, ecc_order)) << "\n"
              << "H22 " << fmt(ecc_H22(p.e, ecc_order)) << "\n"
              << "mass_factor " << fmt(p.mass_factor()) << "\n"
              << "scaled_prefactor " << fmt(p.mass_factor() / p.c) << "\n"
              << "v20_coefficient " << fmt(c.v20) << "\n"
              << "v22_coefficient " << fmt(c.v22) << "\n"
              << "kinetic_linear " << fmt(c.kin_lin) << "\n";
    return 0;
}

int cmd_equilibrium(const PhysicalParams& p, int ecc_order, int order,
                    const std::string& dump_series, const std::string& out_prefix) {
    const AveragedHamiltonian H = build_averaged_hamiltonian(p, ecc_order);
    const PipelineData pd = run_pipeline(H, order, 4);
    print_equilibrium(p, pd.eq, pd.form);
    if (!dump_series.empty()) {
        std::ofstream os(dump_series);
        if (!os) throw ConfigError("cannot write series dump: " + dump_series);
        pd.H0.dump(os);
    }
    if (!out_prefix.empty()) {
        std::ofstream eqos(out_prefix + "_equilibrium.txt");
        eqos << pd.eq.to_text();
        std::ofstream fos(out_prefix + "_untangled.txt");
        fos << pd.form.to_text();
    }
    return 0;
}

int cmd_normalform(const PhysicalParams& p, int ecc_order, int r, int K, double floor_rel,
                   const std::string& out_prefix) {
    const AveragedHamiltonian H = build_averaged_hamiltonian(p, ecc_order);
    const PipelineData pd = run_pipeline(H, r, K);
    NormalizeOptions opts;
    opts.K = K;
    opts.divisor_floor_rel = floor_rel;
    NormalForm nf = normalize(pd.H0, pd.form.omega_scaled, r, opts);
    nf.n_rad_day = p.n;
    std::cout << "order_achieved " << nf.r << " (requested " << nf.requested_r << ")\n"
              << "min_divisor " << fmt(nf.min_divisor_seen) << "  floor "
              << fmt(nf.small_divisor_floor) << "\n";
    if (nf.resonance)
        std::cout << "resonance_at_order " << nf.resonance->order << " k=("
                  << nf.resonance->k1 << "," << nf.resonance->k3 << ") divisor "
                  << fmt(nf.resonance->divisor) << "\n";
    if (nf.r >= 2) {
        std::cout << "Z2_U1U1 " << fmt(nf.Z[2].coeff(4, 0, 0, 0, false)) << "\n"
                  << "Z2_U1U3 " << fmt(nf.Z[2].coeff(2, 2, 0, 0, false)) << "\n"
                  << "Z2_U3U3 " << fmt(nf.Z[2].coeff(0, 4, 0, 0, false)) << "\n";
    }
    if (!out_prefix.empty()) {
        const std::string path = out_prefix + "_nf_r" + std::to_string(nf.r) + ".txt";
        std::ofstream os(path);
        if (!os) throw ConfigError("cannot write normal form: " + path);
        nf.save(os);
        std::cout << "saved " << path << "\n";
    }
    return 0;
}

int cmd_stability(const PhysicalParams& p, int ecc_order, const std::vector<int>& orders,
                  const std::vector<double>& rho0_grid, double libration, int K,
                  double floor_rel, const std::string& out_prefix, const std::string& nf_in) {
    const AveragedHamiltonian H = build_averaged_hamiltonian(p, ecc_order);
    const int rmax = *std::max_element(orders.begin(), orders.end());
    const PipelineData pd = run_pipeline(H, rmax, K);
    std::map<int, NormalForm> nfs;
    if (!nf_in.empty()) {
        for (int r : orders) {
            const std::string path = nf_in + "_nf_r" + std::to_string(r) + ".txt";
            std::ifstream is(path);
            if (!is) throw ConfigError("cannot open normal form: " + path);
            nfs.emplace(r, NormalForm::load(is));
        }
    } else {
        NormalizeOptions opts;
        opts.K = K;
        opts.divisor_floor_rel = floor_rel;
        nfs = normalize_orders(pd.H0, pd.form.omega_scaled, orders, opts);
        for (auto& [r, nf] : nfs) nf.n_rad_day = p.n;
    }
    const auto R = domain_radii(pd.form, libration);
    const auto curves = stability_curves(rho0_grid, nfs, R);
    if (!out_prefix.empty()) {
        export_curves(curves, out_prefix);
        nlohmann::ordered_json j;
        j["eps_star_arcmin"] = pd.eq.eps_arcmin();
        j["omega_u_rad_day"] = {pd.form.omega_u[0], pd.form.omega_u[1]};
        j["R"] = {R[0], R[1]};
        j["libration_bound_rad"] = libration;
        for (const auto& c : curves) {
            nlohmann::ordered_json cj = nlohmann::ordered_json::array();
            for (const auto& [rho0, logT] : c.points) {
                nlohmann::ordered_json pt;
                pt["rho0"] = rho0;
                if (std::isfinite(logT))
                    pt["log10T"] = logT;
                else
                    pt["log10T"] = logT > 0 ? "inf" : "-inf";
                cj.push_back(std::move(pt));
            }
            j["curves"]["r" + std::to_string(c.r)] = std::move(cj);
        }
        std::ofstream os(out_prefix + "_report.json");
        os << j.dump(2) << '\n';
    }
    for (const auto& c : curves) {
        double at1 = std::numeric_limits<double>::quiet_NaN();
        for (const auto& [rho0, logT] : c.points)
            if (std::abs(rho0 - 1.0) < 1e-12) at1 = logT;
        std::cout << "r " << c.r << "  log10T(rho0=1) " << fmt(at1) << "\n";
    }
    return 0;
}

int cmd_sweep(const PhysicalParams& p, const std::string& xtok, const std::string& ytok, int r,
              int K, double rho0, double libration, double floor_rel, const std::string& out_dir,
              int threads) {
    SweepPlan plan;
    plan.x = sweep_param_from_token(xtok);
    plan.y = sweep_param_from_token(ytok);
    plan.base = p;
    plan.r = r;
    plan.K = K;
    plan.rho0 = rho0;
    plan.libration_bound = libration;
    plan.divisor_floor_rel = floor_rel;
    plan.threads = threads;
    const SweepResult res = run_grid(plan);
    const std::string prefix = out_dir.empty() ? plan.name() : out_dir + "/" + plan.name();
    export_contours(res, prefix);
    std::cout << plan.name() << ": eps [" << fmt(res.summary.eps_min) << ", "
              << fmt(res.summary.eps_max) << "] arcmin, log10T ["
              << fmt(res.summary.log10T_min) << ", " << fmt(res.summary.log10T_max) << "], "
              << res.summary.ok << " ok / " << res.summary.degenerate << " degenerate / "
              << res.summary.failed << " failed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytic effective-stability pipeline for the 3:2 spin-orbit resonance"};
    app.set_config("--config");
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string params_spec = "table1";
    int ecc_order = 8;
    app.add_option("--params", params_spec,
                   "parameter file (key-value) or 'table1' for the built-in set");
    app.add_option("--ecc-order", ecc_order, "eccentricity expansion order (<= 8)");

    auto* ham = app.add_subcommand("hamiltonian", "derived constants of the averaged model");

    auto* equ = app.add_subcommand("equilibrium", "Cassini state 1 and untangled modes");
    int eq_order = 10;
    std::string eq_dump, eq_out;
    equ->add_option("--order", eq_order, "expansion order for the dumped series");
    equ->add_option("--dump-series", eq_dump, "write the action-angle series to this file");
    equ->add_option("--out", eq_out, "prefix for equilibrium/untangled text blocks");

    auto* nrm = app.add_subcommand("normalform", "Birkhoff normalization");
    int nf_r = 20, nf_K = 4;
    double nf_floor = 1e-10;
    std::string nf_out;
    nrm->add_option("--r", nf_r, "normalization order");
    nrm->add_option("--K", nf_K, "retained remainder orders");
    nrm->add_option("--divisor-floor", nf_floor, "relative small-divisor floor");
    nrm->add_option("--out", nf_out, "prefix for the serialized normal form");

    auto* stb = app.add_subcommand("stability", "effective stability times T(rho0)");
    std::string stb_r = "10,20,30", stb_rho0 = "0:5:0.1", stb_out, stb_nf_in;
    double stb_libration = 0.1, stb_floor = 1e-10;
    int stb_K = 4;
    stb->add_option("--r", stb_r, "comma list of normalization orders");
    stb->add_option("--rho0", stb_rho0, "rho0 grid as start:stop:step or a single value");
    stb->add_option("--libration", stb_libration, "libration bound defining Delta_R [rad]");
    stb->add_option("--K", stb_K, "retained remainder orders");
    stb->add_option("--divisor-floor", stb_floor, "relative small-divisor floor");
    stb->add_option("--out", stb_out, "prefix for the Fig-2 style data files");
    stb->add_option("--load-nf", stb_nf_in, "resume from serialized normal forms (prefix)");

    auto* swp = app.add_subcommand("sweep", "11x11 parameter-pair study");
    std::string swp_x = "om2dot", swp_y = "incl", swp_out;
    int swp_r = 10, swp_K = 4, swp_threads = env_threads();
    double swp_rho0 = 1.0, swp_libration = 0.1, swp_floor = 1e-10;
    swp->add_option("--x", swp_x, "abscissa parameter: c|om1dot|om2dot|ecc|incl");
    swp->add_option("--y", swp_y, "ordinate parameter");
    swp->add_option("--r", swp_r, "normalization order per cell");
    swp->add_option("--K", swp_K, "retained remainder orders");
    swp->add_option("--rho0", swp_rho0, "rho0 for the per-cell stability time");
    swp->add_option("--libration", swp_libration, "libration bound [rad]");
    swp->add_option("--divisor-floor", swp_floor, "relative small-divisor floor");
    swp->add_option("--out", swp_out, "output directory for the CSV/JSON set");
    swp->add_option("--threads", swp_threads, "worker count (default SPINORBIT_THREADS)");

    try {
        app.parse(argc, argv);
        const PhysicalParams p = resolve_params(params_spec);
        if (*ham) return cmd_hamiltonian(p, ecc_order);
        if (*equ) return cmd_equilibrium(p, ecc_order, eq_order, eq_dump, eq_out);
        if (*nrm) return cmd_normalform(p, ecc_order, nf_r, nf_K, nf_floor, nf_out);
        if (*stb)
            return cmd_stability(p, ecc_order, parse_int_list(stb_r), parse_range(stb_rho0),
                                 stb_libration, stb_K, stb_floor, stb_out, stb_nf_in);
        if (*swp)
            return cmd_sweep(p, swp_x, swp_y, swp_r, swp_K, swp_rho0, swp_libration, swp_floor,
                             swp_out, swp_threads);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help and friends
        nlohmann::json j{{"kind", "usage"}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        nlohmann::json j{{"kind", "config"}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 2;
    } catch (const Error& e) {
        nlohmann::json j{{"kind", "computation"}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json j{{"kind", "internal"}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 1;
    }
}
