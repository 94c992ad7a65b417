#pragma once

// Test-only oracles, independent of the library implementation paths they
// check: brute-force averaging of the instantaneous potential, a fixed-step
// RK4 integrator over the averaged flow, and NAFF-style frequency extraction.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "spinorbit/hamiltonian.hpp"

namespace oracles {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 rot1(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

inline Mat3 rot3(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i] += m[i][j] * v[j];
    return r;
}

/// Instantaneous quadrupole potential in the scaled units of the library
/// (divided by C n^2), straight from rotation matrices and the Kepler solve.
inline double instantaneous_potential_scaled(const spinorbit::PhysicalParams& p, double K,
                                             double s1, double s3, double M, double om) {
    const double E = spinorbit::solve_kepler(M, p.e);
    const double r_a = 1.0 - p.e * std::cos(E);
    const double v = 2.0 * std::atan2(std::sqrt(1.0 + p.e) * std::sin(0.5 * E),
                                      std::sqrt(1.0 - p.e) * std::cos(0.5 * E));
    const double ua = om + v;
    const double ell = s1 + 1.5 * M + om + s3;
    Vec3 u{std::cos(ua), std::sin(ua), 0.0};
    u = mat_vec(rot1(p.i), u);
    u = mat_vec(rot3(s3), u);
    u = mat_vec(rot1(-K), u);
    u = mat_vec(rot3(-ell), u);
    const double P20 = 0.5 * (3.0 * u[2] * u[2] - 1.0);
    const double ReW2 = 3.0 * (u[0] * u[0] - u[1] * u[1]);
    const double pref = p.mass_factor() / p.c;  // (G m m0 Re^2/a^3) / (C n^2)
    return -pref / (r_a * r_a * r_a) * (p.C20() * P20 + p.C22 * ReW2);
}

/// Time-independent part of the averaged potential: double average over the
/// mean longitude and the (uniformly precessing) perihelion angle.
inline double averaged_potential_oracle(const spinorbit::PhysicalParams& p, double K, double s1,
                                        double s3, int NM = 512, int Nom = 32) {
    double tot = 0.0;
    for (int jM = 0; jM < NM; ++jM)
        for (int jo = 0; jo < Nom; ++jo)
            tot += instantaneous_potential_scaled(p, K, s1, s3, 2.0 * M_PI * jM / NM,
                                                  2.0 * M_PI * jo / Nom);
    return tot / (NM * Nom);
}

/// Scaled kinetic part, evaluated directly from the displayed form.
inline double kinetic_scaled(const spinorbit::PhysicalParams& p, double S1, double S3) {
    const double wo = p.omega_dot / p.n, WO = p.Omega_dot / p.n;
    return 0.5 * S1 * S1 - 1.5 * S1 - wo * S1 + (S3 - S1) * WO;
}

/// Fixed-step RK4 on the canonical flow of the averaged Hamiltonian,
/// z = (S1, S3, s1, s3), dz/dt = (-dH/ds, +dH/dS) in scaled time.
inline std::vector<std::array<double, 4>> integrate_flow(
    const spinorbit::AveragedHamiltonian& H, std::array<double, 4> z, double h, int nsteps,
    int sample_every) {
    auto rhs = [&H](const std::array<double, 4>& x) {
        const spinorbit::Dual4 e = H.evaluate_dual(x);
        return std::array<double, 4>{-e.d[2], -e.d[3], e.d[0], e.d[1]};
    };
    std::vector<std::array<double, 4>> samples;
    samples.reserve(nsteps / sample_every + 1);
    for (int step = 0; step < nsteps; ++step) {
        if (step % sample_every == 0) samples.push_back(z);
        const auto k1 = rhs(z);
        std::array<double, 4> z2;
        for (int i = 0; i < 4; ++i) z2[i] = z[i] + 0.5 * h * k1[i];
        const auto k2 = rhs(z2);
        for (int i = 0; i < 4; ++i) z2[i] = z[i] + 0.5 * h * k2[i];
        const auto k3 = rhs(z2);
        for (int i = 0; i < 4; ++i) z2[i] = z[i] + h * k3[i];
        const auto k4 = rhs(z2);
        for (int i = 0; i < 4; ++i)
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    samples.push_back(z);
    return samples;
}

/// |windowed DFT| of a complex signal at angular frequency w (dt sampling).
inline double dft_modulus(const std::vector<std::complex<double>>& z, double dt, double w) {
    std::complex<double> acc{0.0, 0.0};
    const std::size_t n = z.size();
    for (std::size_t m = 0; m < n; ++m) {
        const double hann = 0.5 * (1.0 - std::cos(2.0 * M_PI * m / (n - 1)));
        acc += z[m] * hann * std::exp(std::complex<double>(0.0, -w * dt * m));
    }
    return std::abs(acc);
}

/// NAFF-style dominant frequency: coarse scan then golden-section refinement.
inline double dominant_frequency(const std::vector<std::complex<double>>& z, double dt,
                                 double w_lo, double w_hi, int coarse = 4096) {
    double best_w = w_lo, best_a = -1.0;
    for (int k = 0; k <= coarse; ++k) {
        const double w = w_lo + (w_hi - w_lo) * k / coarse;
        const double a = dft_modulus(z, dt, w);
        if (a > best_a) {
            best_a = a;
            best_w = w;
        }
    }
    const double step = (w_hi - w_lo) / coarse;
    double a = best_w - step, b = best_w + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = dft_modulus(z, dt, x1), f2 = dft_modulus(z, dt, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(best_w)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = dft_modulus(z, dt, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = dft_modulus(z, dt, x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace oracles
