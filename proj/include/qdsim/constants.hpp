#pragma once

namespace qdsim {

// Defined SI values; never fitted.
struct PhysicalConstants {
    double e_charge = 1.602176634e-19;   // C
    double k_b = 8.617333262e-5;         // eV/K
    double eps0 = 8.8541878128e-12;      // F/m
    double epsr_sio2 = 3.9;
};

inline constexpr PhysicalConstants kConstants{};

// e / C, with C in attofarad, gives volts: the Coulomb peak period for C_P
// and the diamond tip height for C_Sigma.
inline double charge_over_capacitance_v(double c_af) {
    return kConstants.e_charge / (c_af * 1e-18);
}

// e^2 / C_Sigma in meV for C_Sigma in attofarad.
inline double charging_energy_mev(double c_sigma_af) {
    return charge_over_capacitance_v(c_sigma_af) * 1e3;
}

} // namespace qdsim
