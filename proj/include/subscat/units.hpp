#pragma once

#include <cmath>
#include <stdexcept>

namespace subscat {

// hbar^2 / (2 m_e) in eV nm^2 (CODATA-derived).
inline constexpr double kHbar2Over2MeEvNm2 = 0.0380998;
// hbar in eV ps.
inline constexpr double kHbarEvPs = 6.582119569e-4;

// Internal units have hbar = 1. The mass is carried explicitly through
// `kinetic()` = hbar^2/(2m); conversions to nm / eV / ps happen only when
// reading configs and writing tables.
struct UnitSystem {
    static constexpr double hbar = 1.0;

    double mass = 1.0;               // multiplier of the reference mass
    double length_unit = 1.0;        // nm per internal length
    double energy_unit = 1.0;        // eV per internal energy
    double hbar2_over_2m_ref = 0.5;  // hbar^2/(2 m_ref), internal energy * length^2
    double time_unit = 1.0;          // ps per internal time

    // Lengths in nm, energies in eV, mass in units of the free-electron mass.
    static UnitSystem nm_ev(double mass_multiplier) {
        UnitSystem u;
        u.mass = mass_multiplier;
        u.hbar2_over_2m_ref = kHbar2Over2MeEvNm2;
        u.time_unit = kHbarEvPs;
        u.validate();
        return u;
    }

    // m = hbar = 1; every quantity is reported in internal units.
    static UnitSystem natural(double mass_multiplier = 1.0) {
        UnitSystem u;
        u.mass = mass_multiplier;
        u.validate();
        return u;
    }

    void validate() const {
        if (!(mass > 0.0) || !(length_unit > 0.0) || !(energy_unit > 0.0) ||
            !(hbar2_over_2m_ref > 0.0) || !(time_unit > 0.0))
            throw std::invalid_argument("UnitSystem: mass and unit scales must be positive");
    }

    double kinetic() const { return hbar2_over_2m_ref / mass; }
    double energy(double k) const { return kinetic() * k * k; }
    double wavenumber(double energy_value) const { return std::sqrt(energy_value / kinetic()); }
    // Group velocity hbar k / m.
    double velocity(double k) const { return 2.0 * kinetic() * k / hbar; }
    // m / hbar, the factor turning a length/wavenumber ratio into a time.
    double mass_over_hbar() const { return hbar / (2.0 * kinetic()); }

    double to_ps(double t) const { return t * time_unit; }
    double from_ps(double t_ps) const { return t_ps / time_unit; }
    double to_nm(double x) const { return x * length_unit; }
    double from_nm(double x_nm) const { return x_nm / length_unit; }
    double to_ev(double e) const { return e * energy_unit; }
    double from_ev(double e_ev) const { return e_ev / energy_unit; }
};

}  // namespace subscat
