#include "spinorbit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace spinorbit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::array<double, 2> domain_radii(const UntangledForm& form, double libration_bound) {
    if (libration_bound < 0.0) throw DomainError("domain_radii: negative libration bound");
    return {libration_bound * libration_bound / (2.0 * form.U_star[0]),
            libration_bound * libration_bound / (2.0 * form.U_star[1])};
}

namespace {

// Tail majorant per action component: the retained blocks summed exactly plus
// a geometric continuation of each parity chain at the measured same-parity
// step ratio.  On exactly geometric norms this telescopes to b0/(1 - q sqrt(rho)),
// the classical 1/(1-q) factor; alternating odd/even block magnitudes get a
// finite valid bound instead of a spurious divergence.
struct TailMajorant {
    double D = 0.0;       // sum_{s > r} b_s rho^{(s-r-1)/2}, majorized
    double b_first = 0.0; // b_{r+1}
    double Q2 = 0.0;      // squared envelope step, must stay < 1
    bool empty = true;    // no nonzero block
};

TailMajorant tail_majorant(const std::vector<RemainderNorms>& norms, int j, double rho) {
    // offsets m = s - (r+1) in retained order
    std::vector<double> b;
    for (const auto& rn : norms) b.push_back(rn.b[j]);
    TailMajorant out;
    if (b.empty()) return out;
    out.b_first = b[0];
    // squared step of the envelope: same-parity two-block ratios, falling back
    // to the squared consecutive ratio when fewer than one pair exists
    double Q2 = 0.0;
    bool have_pair = false;
    for (std::size_t m = 0; m + 2 < b.size(); ++m) {
        if (b[m] > 0.0 && b[m + 2] > 0.0) {
            Q2 = std::max(Q2, b[m + 2] / b[m] * rho);
            have_pair = true;
        }
    }
    if (!have_pair) {
        for (std::size_t m = 0; m + 1 < b.size(); ++m)
            if (b[m] > 0.0 && b[m + 1] > 0.0) {
                const double q1 = b[m + 1] / b[m] * std::sqrt(rho);
                Q2 = std::max(Q2, q1 * q1);
            }
    }
    out.Q2 = Q2;
    double D = 0.0;
    int last_even = -1, last_odd = -1;
    for (std::size_t m = 0; m < b.size(); ++m) {
        if (b[m] <= 0.0) continue;
        out.empty = false;
        D += b[m] * std::pow(rho, 0.5 * m);
        (m % 2 == 0 ? last_even : last_odd) = static_cast<int>(m);
    }
    if (out.empty) return out;
    if (Q2 >= 1.0) return out;  // caller checks Q2
    for (int ml : {last_even, last_odd})
        if (ml >= 0) D += b[ml] * std::pow(rho, 0.5 * ml) * Q2 / (1.0 - Q2);
    out.D = D;
    return out;
}

}  // namespace

double tail_factor(const std::vector<RemainderNorms>& norms, double rho) {
    if (norms.size() < 1) throw DomainError("tail_factor: no retained remainder blocks");
    if (rho <= 0.0) throw DomainError("tail_factor: rho must be positive");
    double d = 1.0;
    bool any = false;
    for (int j = 0; j < 2; ++j) {
        const TailMajorant tm = tail_majorant(norms, j, rho);
        if (tm.empty) continue;
        if (tm.Q2 >= 1.0)
            throw OutsideConvergenceError(
                "tail_factor: rho at or beyond the remainder convergence", tm.Q2);
        any = true;
        if (tm.b_first > 0.0) d = std::max(d, tm.D / tm.b_first);
    }
    return any ? d : 1.0;
}

double escape_time(double rho0, double rho, int r, const NormalForm& nf,
                   const std::array<double, 2>& R) {
    if (!(rho0 >= 0.0) || !(rho > rho0 || rho == rho0))
        throw DomainError("escape_time: need 0 <= rho0 <= rho");
    if (nf.n_rad_day <= 0.0) throw ConfigError("escape_time: normal form lacks n_rad_day");
    if (rho == rho0) return 0.0;
    if (nf.remainder.empty() || nf.remainder.front().first != r + 1)
        throw ConfigError("escape_time: remainder block r+1 not retained");
    const auto norms = remainder_norms(nf, R);
    const double rho_pow = std::pow(rho, 0.5 * r + 1.0);
    double tau = kInf;
    for (int j = 0; j < 2; ++j) {
        const TailMajorant tm = tail_majorant(norms, j, rho);
        if (tm.empty) continue;  // this action never drifts at leading order
        if (tm.Q2 >= 1.0)
            throw OutsideConvergenceError(
                "escape_time: rho at or beyond the remainder convergence", tm.Q2);
        // componentwise bound with d_j b_{r+1} = D_j (the majorized tail sum)
        tau = std::min(tau, (rho - rho0) * R[j] / (tm.D * rho_pow));
    }
    return tau / (nf.n_rad_day * 365.25);  // scaled time -> years
}

namespace {

struct RhoOptimum {
    double rho = 0.0;
    double tau_years = 0.0;  // -inf when nothing admissible
    double d = 1.0;
};

// inner max over rho for one order; tau(rho) -> 0 at both ends of the
// admissible window, so a golden-section search on the interior is enough
RhoOptimum optimize_rho(double rho0, int r, const NormalForm& nf,
                        const std::array<double, 2>& R,
                        const std::vector<RemainderNorms>& norms) {
    RhoOptimum best;
    best.tau_years = -kInf;
    // convergence bound: Q2(rho) = Q2(1) * rho < 1
    double Q2base = 0.0;
    for (int j = 0; j < 2; ++j) Q2base = std::max(Q2base, tail_majorant(norms, j, 1.0).Q2);
    const double rho_conv = Q2base > 0.0 ? 0.999999 / Q2base : 1e12;
    const double lo = rho0 > 0.0 ? rho0 * (1.0 + 1e-9) : 1e-12;
    if (rho_conv <= lo) return best;
    auto tau_at = [&](double rho) -> double {
        try {
            return escape_time(rho0, rho, r, nf, R);
        } catch (const Error&) {
            return -kInf;
        }
    };
    // candidates: analytic interior maximizer (d locally constant) + clipped ends
    std::vector<double> cand;
    if (rho0 > 0.0) {
        const double rstar = rho0 * (r + 2.0) / r;
        if (rstar > lo && rstar < rho_conv) cand.push_back(rstar);
    }
    cand.push_back(std::min(rho_conv * 0.5, std::max(lo * 2.0, 1.0)));
    cand.push_back(rho_conv * 0.9);
    double seed = cand[0], seed_tau = -kInf;
    for (double c : cand) {
        const double t = tau_at(c);
        if (t > seed_tau) {
            seed = c;
            seed_tau = t;
        }
    }
    if (!(seed_tau > -kInf)) return best;
    // golden-section around the seed on a log-rho bracket
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(std::max(lo, seed / 16.0));
    double bnd = std::log(std::min(rho_conv * 0.999, seed * 16.0));
    double x1 = bnd - gr * (bnd - a), x2 = a + gr * (bnd - a);
    double f1 = tau_at(std::exp(x1)), f2 = tau_at(std::exp(x2));
    for (int it = 0; it < 200 && (bnd - a) > 1e-10; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (bnd - a);
            f2 = tau_at(std::exp(x2));
        } else {
            bnd = x2;
            x2 = x1;
            f2 = f1;
            x1 = bnd - gr * (bnd - a);
            f1 = tau_at(std::exp(x1));
        }
    }
    const double rho_opt = std::exp(0.5 * (a + bnd));
    const double tau_opt = tau_at(rho_opt);
    if (tau_opt >= seed_tau) {
        best.rho = rho_opt;
        best.tau_years = tau_opt;
    } else {
        best.rho = seed;
        best.tau_years = seed_tau;
    }
    try {
        best.d = tail_factor(norms, best.rho);
    } catch (const Error&) {
        best.d = kInf;
    }
    return best;
}

}  // namespace

StabilityReport effective_time(double rho0, const std::map<int, NormalForm>& nf_by_r,
                               const std::array<double, 2>& R) {
    if (nf_by_r.empty()) throw ConfigError("effective_time: no normal forms supplied");
    StabilityReport rep;
    rep.rho0 = rho0;
    rep.R = R;
    rep.T_years = -kInf;
    if (rho0 == 0.0) {
        // the polydisk degenerates to the fixed point: no escape
        rep.T_years = kInf;
        rep.best_r = nf_by_r.begin()->first;
        rep.best_rho = 0.0;
        rep.d = 1.0;
        for (const auto& [r, nf] : nf_by_r) rep.per_r_curve.emplace_back(r, kInf);
        return rep;
    }
    bool any = false;
    for (const auto& [r, nf] : nf_by_r) {
        const auto norms = remainder_norms(nf, R);
        const RhoOptimum opt = optimize_rho(rho0, nf.r, nf, R, norms);
        rep.per_r_curve.emplace_back(r, opt.tau_years);
        if (opt.tau_years > rep.T_years) {
            rep.T_years = opt.tau_years;
            rep.best_r = nf.r;
            rep.best_rho = opt.rho;
            rep.d = opt.d;
            any = opt.tau_years > -kInf;
        }
    }
    if (!any)
        throw OutsideConvergenceError("effective_time: no admissible (r, rho) candidate", 1.0);
    return rep;
}

std::vector<StabilityCurve> stability_curves(const std::vector<double>& rho0_grid,
                                             const std::map<int, NormalForm>& nf_by_r,
                                             const std::array<double, 2>& R) {
    std::vector<StabilityCurve> out;
    for (const auto& [r, nf] : nf_by_r) {
        StabilityCurve c;
        c.r = r;
        const std::map<int, NormalForm> one{{r, nf}};
        for (double rho0 : rho0_grid) {
            double logT;
            try {
                const StabilityReport rep = effective_time(rho0, one, R);
                logT = std::log10(rep.T_years);
            } catch (const Error&) {
                logT = -kInf;
            }
            c.points.emplace_back(rho0, logT);
        }
        out.push_back(std::move(c));
    }
    return out;
}

void export_curves(const std::vector<StabilityCurve>& curves, const std::string& prefix) {
    for (const auto& c : curves) {
        const std::string path = prefix + "_r" + std::to_string(c.r) + ".dat";
        std::ofstream os(path);
        if (!os) throw ConfigError("export_curves: cannot write " + path);
        os << "# rho0  log10_T_years\n";
        char buf[80];
        for (const auto& [rho0, logT] : c.points) {
            std::snprintf(buf, sizeof buf, "%.6f %.8f", rho0, logT);
            os << buf << '\n';
        }
    }
}

}  // namespace spinorbit
