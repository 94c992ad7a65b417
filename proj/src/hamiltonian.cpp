#include "spinorbit/hamiltonian.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace spinorbit {

double ecc_H20(double e, int order) {
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("ecc_H20: eccentricity outside [0,1)");
    if (order > 8) throw ConfigError("ecc_H20: orders beyond 8 unsupported");
    static const double coeff[5] = {-1.0, -3.0 / 2.0, -15.0 / 8.0, -35.0 / 16.0, -315.0 / 128.0};
    const double e2 = e * e;
    double acc = 0.0, p = 1.0;
    for (int k = 0; 2 * k <= order; ++k) {
        acc += coeff[k] * p;
        p *= e2;
    }
    return acc;
}

double ecc_H22(double e, int order) {
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("ecc_H22: eccentricity outside [0,1)");
    if (order > 8) throw ConfigError("ecc_H22: orders beyond 8 unsupported");
    static const double coeff[4] = {7.0 / 2.0, -123.0 / 16.0, 489.0 / 128.0, -1763.0 / 2048.0};
    double acc = 0.0, p = e;
    const double e2 = e * e;
    for (int k = 0; 2 * k + 1 <= order; ++k) {
        acc += coeff[k] * p;
        p *= e2;
    }
    return acc;
}

double solve_kepler(double M, double e) {
    // reduce to [-pi, pi] for the starter
    const double twopi = 2.0 * M_PI;
    double Mr = std::fmod(M, twopi);
    if (Mr > M_PI) Mr -= twopi;
    if (Mr < -M_PI) Mr += twopi;
    double E = Mr + e * std::sin(Mr) / (1.0 - std::sin(Mr + e) + std::sin(Mr));
    if (!std::isfinite(E)) E = Mr;
    double lo = Mr - e, hi = Mr + e;
    for (int it = 0; it < 100; ++it) {
        const double f = E - e * std::sin(E) - Mr;
        if (std::abs(f) < 1e-14) return E + (M - Mr);
        if (f > 0)
            hi = E;
        else
            lo = E;
        const double fp = 1.0 - e * std::cos(E);
        double En = E - f / fp;
        if (!(En > lo && En < hi)) En = 0.5 * (lo + hi);  // bisection safeguard
        E = En;
    }
    std::ostringstream msg;
    msg << "solve_kepler: no convergence at M=" << M << " e=" << e;
    throw NumericalError(msg.str());
}

double hansen_quadrature(int p, int q, double e) {
    if (!(e >= 0.0 && e < 0.95)) throw DomainError("hansen_quadrature: e outside [0, 0.95)");
    // The integrand is analytic and 2pi-periodic in M, so the uniform
    // trapezoid rule converges geometrically; double N until stable.
    double prev = 0.0;
    for (int N = 64; N <= 1 << 20; N *= 2) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j) {
            const double M = 2.0 * M_PI * j / N;
            const double E = solve_kepler(M, e);
            const double r_a = 1.0 - e * std::cos(E);
            const double v = 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * E),
                                              std::sqrt(1.0 - e) * std::cos(0.5 * E));
            acc += std::cos(p * v - q * M) / (r_a * r_a * r_a);
        }
        acc /= N;
        if (N > 64 && std::abs(acc - prev) < 1e-13 * std::max(1.0, std::abs(acc))) return acc;
        prev = acc;
    }
    throw NumericalError("hansen_quadrature: quadrature failed to stabilize");
}

AveragedHamiltonian::AveragedHamiltonian(const PhysicalParams& params, int ecc_order)
    : params_(params), ecc_order_(ecc_order) {
    params_.validate();
    if (ecc_order > 8)
        throw ConfigError(
            "build_averaged_hamiltonian: eccentricity orders beyond 8 unsupported "
            "(coefficients past the series truncation would need quadrature fits)");
    const double pref = params_.mass_factor() / params_.c;
    cst_.kin_lin = 1.5 + params_.omega_dot / params_.n + params_.Omega_dot / params_.n;
    cst_.WO = params_.Omega_dot / params_.n;
    cst_.v20 = -pref * params_.C20() * (-ecc_H20(params_.e, ecc_order));
    cst_.v22 = -pref * 3.0 * params_.C22 * ecc_H22(params_.e, ecc_order);
    cst_.cos_i = std::cos(params_.i);
    cst_.sin_i = std::sin(params_.i);
}

AveragedHamiltonian build_averaged_hamiltonian(const PhysicalParams& params, int ecc_order) {
    return AveragedHamiltonian(params, ecc_order);
}

Jet AveragedHamiltonian::taylor(double S1c, double S3c, int degree) const {
    const Jet S1 = Jet::variable(0, S1c, degree);
    const Jet S3 = Jet::variable(1, S3c, degree);
    const Jet s1 = Jet::variable(2, 0.0, degree);
    const Jet s3 = Jet::variable(3, 0.0, degree);
    return averaged_energy<Jet>(cst_, S1, S3, s1, s3);
}

Jet AveragedHamiltonian::taylor_composed(double S1c, double S3c,
                                         const std::array<std::array<double, 4>, 4>& T,
                                         int degree) const {
    const Jet S1 = Jet::linear_form(S1c, T[0], degree);
    const Jet S3 = Jet::linear_form(S3c, T[1], degree);
    const Jet s1 = Jet::linear_form(0.0, T[2], degree);
    const Jet s3 = Jet::linear_form(0.0, T[3], degree);
    return averaged_energy<Jet>(cst_, S1, S3, s1, s3);
}

namespace {

// c - num/den of the equilibrium relation, with eps in the i-K convention.
double implicit_residual(const PhysicalParams& p, double eps) {
    const double h20 = ecc_H20(p.e);
    const double h22 = ecc_H22(p.e);
    const double num = p.n * p.mass_factor() * std::sin(eps) *
                       (p.C20() * h20 * std::cos(eps) + p.C22 * h22 * (std::cos(eps) + 1.0));
    const double den = p.Omega_dot * std::sin(p.i - eps) *
                       (2.0 * p.Omega_dot * std::cos(p.i - eps) / (3.0 * p.n) +
                        2.0 * p.omega_dot / (3.0 * p.n) + 1.0);
    return p.c - num / den;
}

// Bisection + final secant polish inside a sign-change bracket.
double refine_root(const PhysicalParams& p, double lo, double hi) {
    double flo = implicit_residual(p, lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = implicit_residual(p, mid);
        if (fm == 0.0 || 0.5 * (hi - lo) < 1e-17 * std::max(1.0, std::abs(mid))) return mid;
        if ((flo > 0) == (fm > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double obliquity_implicit_signed(const PhysicalParams& params) {
    params.validate();
    const double lim = params.i;
    const int N = 400;
    // scan both sides of zero; the Cassini-1 root sits on one of them
    for (int side = 0; side < 2; ++side) {
        const double sgn = (side == 0) ? -1.0 : 1.0;  // Mercury's root has K > i
        double prev_eps = sgn * 1e-12;
        double prev_f = implicit_residual(params, prev_eps);
        for (int j = 1; j <= N; ++j) {
            const double eps = sgn * (lim - 1e-9) * j / N;
            const double f = implicit_residual(params, eps);
            if (std::isfinite(f) && std::isfinite(prev_f) && (f > 0) != (prev_f > 0)) {
                const double a = std::min(prev_eps, eps), b = std::max(prev_eps, eps);
                return refine_root(params, a, b);
            }
            prev_eps = eps;
            prev_f = f;
        }
    }
    throw NoEquilibriumError("obliquity_implicit: no sign change in (-i, i)",
                             implicit_residual(params, -lim + 1e-9),
                             implicit_residual(params, lim - 1e-9));
}

double obliquity_implicit(const PhysicalParams& params) {
    return std::abs(obliquity_implicit_signed(params));
}

}  // namespace spinorbit
