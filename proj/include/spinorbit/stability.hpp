#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "spinorbit/birkhoff.hpp"
#include "spinorbit/cassini.hpp"

namespace spinorbit {

/// Effective stability estimate at one rho0.
struct StabilityReport {
    double rho0 = 0.0;
    std::array<double, 2> R{};
    double T_years = 0.0;       // +inf at rho0 = 0 (the equilibrium itself)
    int best_r = 0;
    double best_rho = 0.0;
    double d = 1.0;             // tail factor at the optimum
    std::vector<std::pair<int, double>> per_r_curve;  // (r, tau*_years)
};

/// Polydisk radii: R_j = libration_bound^2 / (2 U_j*), so the sigma'_j
/// amplitude sqrt(2 R_j U_j*) at rho = 1 equals libration_bound.
std::array<double, 2> domain_radii(const UntangledForm& form, double libration_bound = 0.1);

/// Geometric tail factor d = 1/(1-q), q = max consecutive-norm ratio * sqrt(rho).
/// Throws OutsideConvergenceError when q >= 1.
double tail_factor(const std::vector<RemainderNorms>& norms, double rho);

/// Componentwise escape-time bound, min over actions, converted to years:
/// tau_j = (rho-rho0) R_j / (d b_j rho^{r/2+1}).
double escape_time(double rho0, double rho, int r, const NormalForm& nf,
                   const std::array<double, 2>& R);

/// Outer max over orders of the inner max over admissible rho.
StabilityReport effective_time(double rho0, const std::map<int, NormalForm>& nf_by_r,
                               const std::array<double, 2>& R);

/// Fig.-2 style data: per order r a two-column block (rho0, log10 T).
struct StabilityCurve {
    int r;
    std::vector<std::pair<double, double>> points;  // (rho0, log10 T years)
};

std::vector<StabilityCurve> stability_curves(const std::vector<double>& rho0_grid,
                                             const std::map<int, NormalForm>& nf_by_r,
                                             const std::array<double, 2>& R);

/// Write one two-column text file per order: <prefix>_r<r>.dat.
void export_curves(const std::vector<StabilityCurve>& curves, const std::string& prefix);

}  // namespace spinorbit
