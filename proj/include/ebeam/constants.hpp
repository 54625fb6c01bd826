#pragma once

// CODATA 2018 values, SI units.
namespace ebeam::constants {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double c = 299792458.0;
inline constexpr double e = 1.602176634e-19;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double m_e = 9.1093837015e-31;
inline constexpr double m_p = 1.67262192369e-27;
inline constexpr double amu = 1.66053906660e-27;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double mu_B = 9.2740100783e-24;
inline constexpr double g_S = 2.00231930436256;
inline constexpr double r_e = 2.8179403262e-15;
inline constexpr double a0 = 5.29177210903e-11;
inline constexpr double lambda_C = 2.42631023867e-12;
inline constexpr double alpha_fs = 7.2973525693e-3;
inline constexpr double m_e_c2_eV = 510998.95000;

inline constexpr double mass_K41 = 40.9618252579 * amu;

}  // namespace ebeam::constants
