#pragma once

namespace nvsram {

// Physical constants (SI).
inline constexpr double k_boltzmann = 1.380649e-23;        // J/K
inline constexpr double mu0 = 1.2566370614359172e-6;       // T*m/A (4*pi*1e-7)
inline constexpr double hbar = 1.054571817e-34;            // J*s
inline constexpr double elementary_charge = 1.602176634e-19; // C

// Electron gyromagnetic ratio used by the magnetization dynamics, rad/(s*T).
inline constexpr double gyromagnetic_ratio_default = 1.76e11;

} // namespace nvsram
