#pragma once

// Values computed independently at high precision (mpmath, direct integration
// of the density against the energy and billing kernels) and frozen here.
// tests/oracle/expected_values.py regenerates them.

namespace costplan::oracle {

inline constexpr double kUniformR = 81920.0;
inline constexpr double kUniformCe1Exp = 0.1583104;
inline constexpr double kUniformCe1Var = 0.0035437954116266667;
inline constexpr double kUniformCeHalfExp = 0.1489408;
inline constexpr double kUniformCe3HalvesExp = 0.1739264;

inline constexpr double kParetoA4Ce1Exp = 0.151088;
inline constexpr double kParetoA4Ce1Var = 0.00224255803392;

inline constexpr double kExpCe0Var = 0.0432512166199808;

// Pareto r=1,569,700, alpha=3.95, c_e=0.5
inline constexpr double kTable1LongExp = 2.794066;
inline constexpr double kTable1LongVar = 2.9652428859654687;
// Exponential r=82,616, c_e=0.5
inline constexpr double kTable1ShortExp = 0.15242517355951954;
inline constexpr double kTable1ShortVar = 0.02623318894989097;

inline constexpr double kRn = 1638400.0;
inline constexpr double kBillingAtZeroQuota = 0.0013697024;  // uniform and exponential
inline constexpr double kUniformBillingAtRn = 0.00062492672;
inline constexpr double kUniformCbRatio = 1.8181818181818182;
inline constexpr double kUniformCbOpt = 2978909.0909090909;
inline constexpr double kUniformBmin = 0.0004358144;
inline constexpr double kParetoA4CbRatio = 1.3658702151284039;
inline constexpr double kParetoA4CbOpt = 2237841.760466377;
inline constexpr double kParetoA4Bmin = 0.00042678149117498912;
inline constexpr double kExpCbRatio = 2.3978952727983705;
inline constexpr double kExpCbOpt = 3928711.6149528503;
inline constexpr double kExpBmin = 0.00058875581825754371;

// alpha = 3.89, rn = 8,162,500
inline constexpr double kTable2Rn = 8162500.0;
inline constexpr double kTable2CbOpt = 11232634.758615321;
inline constexpr double kTable2Saving = 0.076307074337789;

}  // namespace costplan::oracle
