#pragma once

// Unit system used throughout: energy in eV, time in fs, length in Angstrom.

namespace dqbm::constants {

inline constexpr double hbar = 0.6582119569;          // eV fs
inline constexpr double light_speed = 2997.92458;     // Angstrom / fs
inline constexpr double kT_room = 0.0259;             // eV, 300 K

// Mass of a particle quoted in MeV/c^2, converted to eV fs^2 / Angstrom^2.
inline constexpr double mass_from_mev_c2(double mev) {
    return mev * 1.0e6 / (light_speed * light_speed);
}

// 938 MeV/c^2 (the proton), the mass used in all catalog scenarios.
inline constexpr double proton_mass = mass_from_mev_c2(938.0);

}  // namespace dqbm::constants
