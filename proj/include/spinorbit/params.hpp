#pragma once

#include <string>

#include "spinorbit/errors.hpp"

namespace spinorbit {

/// Mercury-like parameter set.  Units: masses kg, lengths km, angles rad,
/// rates rad/day.  C20 = -J2; the polar moment is C = c m Re^2 and
/// mu = G(m+m0) = n^2 a^3 are derived on demand.
struct PhysicalParams {
    double m0 = 0.0;         // solar mass [kg]
    double m = 0.0;          // planet mass [kg]
    double Re = 0.0;         // equatorial radius [km]
    double J2 = 0.0;         // oblateness harmonic
    double C22 = 0.0;        // triaxiality harmonic
    double c = 0.0;          // normalized polar moment C/(m Re^2)
    double a = 0.0;          // semi-major axis [km]
    double e = 0.0;          // eccentricity
    double i = 0.0;          // inclination to the Laplace plane [rad]
    double omega_dot = 0.0;  // perihelion precession rate [rad/day]
    double Omega_dot = 0.0;  // node regression rate [rad/day], negative
    double n = 0.0;          // mean motion [rad/day]

    double C20() const { return -J2; }
    /// Gm0 m Re^2 / a^3 expressed through Kepler's third law, i.e.
    /// n^2 m Re^2 * m0/(m+m0)  [kg km^2 / day^2].
    double potential_prefactor() const { return n * n * m * Re * Re * m0 / (m + m0); }
    double mass_factor() const { return m0 / (m + m0); }
    /// Polar moment of inertia C [kg km^2].
    double polar_moment() const { return c * m * Re * Re; }

    void validate() const;
};

/// Table of reference values used throughout the tests and as the CLI default.
PhysicalParams mercury_params();

/// Flat key-value text file, keys exactly the field names.
PhysicalParams load_params(const std::string& path);
void save_params(const PhysicalParams& p, const std::string& path);

}  // namespace spinorbit
