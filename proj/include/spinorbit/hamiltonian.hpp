#pragma once

#include <array>

#include "spinorbit/jet.hpp"
#include "spinorbit/params.hpp"

namespace spinorbit {

/// Truncation of -(1-e^2)^{-3/2} at the given eccentricity order (<= 8):
///   -1 - 3e^2/2 - 15e^4/8 - 35e^6/16 - 315e^8/128.
double ecc_H20(double e, int order = 8);

/// Odd eccentricity series of the 3:2 forcing, truncated at `order` (<= 8):
///   7e/2 - 123e^3/16 + 489e^5/128 - 1763e^7/2048.
double ecc_H22(double e, int order = 8);

/// (1/2pi) Int_0^2pi (a/r)^3 cos(p v - q M) dM by spectrally convergent
/// periodic quadrature with Kepler-equation solves; the ground truth for every
/// eccentricity coefficient of the averaged potential.  Requires 0 <= e < 0.95.
double hansen_quadrature(int p, int q, double e);

/// Solve Kepler's equation M = E - e sin E (safeguarded Newton, tol 1e-14).
double solve_kepler(double M, double e);

// The averaged resonant Hamiltonian, nondimensionalized: actions in units of
// C n, energies divided by C n^2, rates by n.  In these units
//   <T> = S1^2/2 - (3/2 + omega_dot/n + Omega_dot/n) S1 + (Omega_dot/n) S3
//   <V> = -(mass_factor/c) [ C20 * h20b * F20(K, i, s3)
//                            + 3 C22 * H22(e) * F22(K, i, s1, s3) ]
// with h20b = -ecc_H20(e), cos K = (S1-S3)/S1, and
//   F20 = (3/4)(A^2+B^2) - 1/2,  A = -sinK sin s3,  B = cosK sin i - sinK cos i cos s3
//   F22 = (a^2-b^2) cos(2 s1 + 2 s3) + 2 a b sin(2 s1 + 2 s3),
//   a = [(1+cosK cos i) cos s3 + sinK sin i]/2,  b = (cosK + cos i) sin s3 / 2.
// The time-independent part of the l4-averaged potential factorizes exactly
// this way; only the two eccentricity functions carry truncation error.

/// Scaled constants of the evaluator.
struct HamiltonianConstants {
    double kin_lin;      // 3/2 + omega_dot/n + Omega_dot/n
    double WO;           // Omega_dot/n
    double v20;          // -(massf/c) * C20 * (-ecc_H20(e))
    double v22;          // -(massf/c) * 3 * C22 * ecc_H22(e)
    double cos_i;
    double sin_i;
};

/// Generic evaluator: S is double, Dual4 or Jet.
template <class S>
S averaged_energy(const HamiltonianConstants& cst, const S& S1, const S& S3, const S& s1,
                  const S& s3) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    const S cK = (S1 - S3) / S1;
    const S sK = sqrt(1.0 - cK * cK);
    const S cs3 = cos(s3);
    const S ss3 = sin(s3);
    const S A = -1.0 * (sK * ss3);
    const S B = cK * cst.sin_i - sK * cst.cos_i * cs3;
    const S F20 = 0.75 * (A * A + B * B) - 0.5;
    const S ac = 0.5 * ((1.0 + cK * cst.cos_i) * cs3 + sK * cst.sin_i);
    const S bc = 0.5 * ((cK + cst.cos_i) * ss3);
    const S arg = 2.0 * s1 + 2.0 * s3;
    const S F22 = (ac * ac - bc * bc) * cos(arg) + 2.0 * (ac * bc) * sin(arg);
    const S V = cst.v20 * F20 + cst.v22 * F22;
    return 0.5 * (S1 * S1) - cst.kin_lin * S1 + cst.WO * S3 + V;
}

/// The averaged Hamiltonian of the 3:2 resonant spin, immutable after build.
class AveragedHamiltonian {
public:
    AveragedHamiltonian(const PhysicalParams& params, int ecc_order);

    const PhysicalParams& params() const { return params_; }
    int ecc_order() const { return ecc_order_; }
    const HamiltonianConstants& constants() const { return cst_; }

    /// Scaled energy at scaled actions (S1, S3) and angles (s1, s3).
    double evaluate(double S1, double S3, double s1, double s3) const {
        return averaged_energy<double>(cst_, S1, S3, s1, s3);
    }

    /// Value and gradient.
    Dual4 evaluate_dual(const std::array<double, 4>& x) const {
        return averaged_energy<Dual4>(cst_, Dual4::variable(0, x[0]), Dual4::variable(1, x[1]),
                                      Dual4::variable(2, x[2]), Dual4::variable(3, x[3]));
    }

    /// Truncated Taylor coefficients at (S1c, S3c, 0, 0) to total degree
    /// `degree`; jet variables are the displacements.
    Jet taylor(double S1c, double S3c, int degree) const;

    /// Jet of H(center + T x) for a linear change of variables T (4x4,
    /// row-major [row][col]); used for expansions in untangled coordinates.
    Jet taylor_composed(double S1c, double S3c, const std::array<std::array<double, 4>, 4>& T,
                        int degree) const;

private:
    PhysicalParams params_;
    int ecc_order_;
    HamiltonianConstants cst_;
};

/// Convenience factory; ecc_order > 8 is unsupported.
AveragedHamiltonian build_averaged_hamiltonian(const PhysicalParams& params, int ecc_order = 8);

/// Observable obliquity |i - K| at equilibrium from the closed-form implicit
/// relation (1-D safeguarded root find on both sides of zero), in radians.
double obliquity_implicit(const PhysicalParams& params);

/// Signed root (negative means K* > i, Mercury's side); used by diagnostics.
double obliquity_implicit_signed(const PhysicalParams& params);

}  // namespace spinorbit
