#pragma once

// Branch-light array sin/cos for the integrator hot loop. Arguments are
// wrapped phases plus at most a couple of radians of RK4 substep advance,
// so the Cody-Waite two-term pi/2 reduction is exact over the whole range
// we ever see (|x| < 1e3). Kernel polynomials are the classic fdlibm
// minimax sets, good to ~1 ulp on [-pi/4, pi/4]. glibc's scalar sin/cos
// costs several times as much per call and dominates the artifact's
// runtime, which is why this exists.

#include <cmath>
#include <cstddef>

namespace onn::detail {

inline constexpr double kTwoOverPi = 0.63661977236758134308;
inline constexpr double kPio2Hi = 1.57079632673412561417e+00;  // high bits of pi/2
inline constexpr double kPio2Lo = 6.07710050650619224932e-11;  // pi/2 - kPio2Hi

inline void sincos_one(double x, double& s, double& c) {
    const double q = std::floor(x * kTwoOverPi + 0.5);
    const double r = (x - q * kPio2Hi) - q * kPio2Lo;
    const double z = r * r;

    double sn = -1.66666666666666324348e-01 +
                z * (8.33333333332248946124e-03 +
                     z * (-1.98412698298579493134e-04 +
                          z * (2.75573137070700676789e-06 +
                               z * (-2.50507602534068634195e-08 +
                                    z * 1.58969099521155010221e-10))));
    sn = r + r * z * sn;

    double cs = 4.16666666666666019037e-02 +
                z * (-1.38888888888741095749e-03 +
                     z * (2.48015872894767294178e-05 +
                          z * (-2.75573143513906633035e-07 +
                               z * (2.08757232129817482790e-09 +
                                    z * -1.13596475577881948265e-11))));
    cs = 1.0 - z * 0.5 + z * z * cs;

    // x = r + k*pi/2: k=0 -> (sn, cs); 1 -> (cs, -sn); 2 -> (-sn, -cs);
    // 3 -> (-cs, sn)
    const int k = int(long(q)) & 3;
    const double bs = (k & 1) ? cs : sn;
    const double bc = (k & 1) ? sn : cs;
    s = (k & 2) ? -bs : bs;
    c = ((k + 1) & 2) ? -bc : bc;
}

/// s[i], c[i] = sin(x[i]), cos(x[i]) for i < n.
inline void sincos_array(const double* x, std::size_t n, double* s, double* c) {
    for (std::size_t i = 0; i < n; ++i) sincos_one(x[i], s[i], c[i]);
}

}  // namespace onn::detail
