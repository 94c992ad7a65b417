#pragma once

#include <array>
#include <string>

#include "spinorbit/hamiltonian.hpp"
#include "spinorbit/jet.hpp"
#include "spinorbit/pseries.hpp"

namespace spinorbit {

/// Cassini state 1 of the averaged Hamiltonian (scaled action units).
struct CassiniState {
    std::array<double, 2> sigma_star;  // (S1*, S3*), units of C n
    double K_star = 0.0;               // inertial obliquity [rad]
    double eps_star = 0.0;             // observable obliquity |K*-i| [rad]
    bool K_above_i = false;            // side: K* > i (Mercury) or K* < i
    std::array<double, 2> residuals{0.0, 0.0};
    int iterations = 0;

    double eps_arcmin() const { return eps_star * (180.0 * 60.0 / M_PI); }
    std::string to_text() const;
};

/// Linear symplectic untangling of the quadratic part plus the action-angle
/// rescaling data.  T maps new (S1',S3',s1',s3') to old displacements.
struct UntangledForm {
    std::array<std::array<double, 4>, 4> S{};  // column-major meaning: old = S * new
    std::array<double, 4> mu_prime{};          // muS1', muS3', mus1', mus3'
    std::array<double, 2> U_star{};
    std::array<double, 2> omega_scaled{};      // rad per scaled time (units of n)
    std::array<double, 2> omega_u{};           // rad/day
    double symplectic_residual = 0.0;
    PoissonSeries H0_series;                   // filled by to_action_angle

    std::string to_text() const;
};

/// Damped-Newton solve of the equilibrium equations at sigma = 0.
CassiniState find_equilibrium(const AveragedHamiltonian& H);

/// Taylor coefficients of H around the equilibrium to total degree order+2,
/// constant and linear parts verified (< 1e-10) and dropped.
Jet taylor_expand(const AveragedHamiltonian& H, const CassiniState& eq, int order);

/// Per-mode scale convention of the untangling (one free parameter per mode).
enum class UntangleScaling {
    /// Equalize U1* = U3*: the polydisk is isotropic (R1 = R3) and both
    /// libration amplitudes at rho = 1 sit near the nominal bound.  The
    /// latitudinal domain then scales with the pole distance, which is what
    /// gives the stability times their inclination sensitivity.
    Balanced,
    /// Unit-norm sigma'-columns: sigma'_j reads directly in radians of the
    /// dominant angle; an already-diagonal quadratic maps with S = identity.
    UnitSigma,
};

/// Untangle the quadratic block of an expansion: block-diagonal symplectic
/// map from the eigenproblem of the linearized flow, modes ordered
/// longitudinal-first.  n_rad_day converts the scaled frequencies to rad/day
/// (0 leaves omega_u unset).
UntangledForm untangle(const Jet& expansion, double n_rad_day = 0.0,
                       UntangleScaling scaling = UntangleScaling::Balanced);

/// Expansion of H in the untangled displacement coordinates (one jet pass
/// with the linear map composed in), constant and linear dropped.
Jet expand_untangled(const AveragedHamiltonian& H, const CassiniState& eq,
                     const UntangledForm& form, int order);

/// Substitute S' = sqrt(2U/U*) cos u, s' = sqrt(2 U U*) sin u monomial-wise;
/// returns the Taylor-Fourier series of eq-centered H in (U, u).
PoissonSeries to_action_angle(const UntangledForm& form, const Jet& untangled_expansion);

/// Physical-point pullback: (U, u) -> (S1, S3, s1, s3) displacements via the
/// rescaling and the untangling matrix (tests and the frequency oracle).
std::array<double, 4> from_action_angle_point(const UntangledForm& form,
                                              const std::array<double, 2>& U,
                                              const std::array<double, 2>& u);

}  // namespace spinorbit
