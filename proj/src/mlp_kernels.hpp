// Internal SIMD kernels for the MLP forward/backward passes. Not installed;
// included only by mlp.cpp and its tests.
#pragma once

#include <cmath>
#include <cstdint>

namespace pinnsel::kernels {

typedef double v4 __attribute__((vector_size(32)));
typedef double v4u __attribute__((vector_size(32), aligned(8), may_alias));
typedef std::int64_t i4 __attribute__((vector_size(32)));

inline v4 load4(const double* p) { return *reinterpret_cast<const v4u*>(p); }
inline void store4(double* p, v4 x) { *reinterpret_cast<v4u*>(p) = x; }
inline v4 broadcast(double x) { return v4{x, x, x, x}; }
inline double hsum(v4 x) { return (x[0] + x[1]) + (x[2] + x[3]); }

inline v4 vfloor(v4 x) {
    i4 ti = __builtin_convertvector(x, i4);  // truncates toward zero
    v4 tv = __builtin_convertvector(ti, v4);
    ti += (tv > x);  // comparison lanes are 0 / -1
    return __builtin_convertvector(ti, v4);
}

// exp on four lanes: Cephes rational kernel after base-2 range reduction,
// accurate to a couple of ulp. Inputs are clamped to +-700, well inside the
// 2^k exponent assembly range.
inline v4 exp4(v4 x) {
    const v4 lo = broadcast(-700.0), hi = broadcast(700.0);
    x = x < lo ? lo : x;
    x = x > hi ? hi : x;

    const v4 kd = vfloor(broadcast(1.4426950408889634073599) * x + broadcast(0.5));
    v4 r = x - kd * broadcast(6.93145751953125e-1);
    r -= kd * broadcast(1.42860682030941723212e-6);

    const v4 r2 = r * r;
    v4 p = broadcast(1.26177193074810590878e-4);
    p = p * r2 + broadcast(3.02994407707441961300e-2);
    p = p * r2 + broadcast(9.99999999999999999910e-1);
    p = r * p;
    v4 q = broadcast(3.00198505138664455042e-6);
    q = q * r2 + broadcast(2.52448340349684104192e-3);
    q = q * r2 + broadcast(2.27265548208155028766e-1);
    q = q * r2 + broadcast(2.0);
    const v4 e = broadcast(1.0) + broadcast(2.0) * p / (q - p);

    // scale by 2^k through the exponent bits
    const i4 ki = __builtin_convertvector(kd, i4);
    const i4 bits = (ki + 1023) << 52;
    v4 scale;
    __builtin_memcpy(&scale, &bits, sizeof scale);
    return e * scale;
}

// tanh on four lanes: Cephes polynomial for |x| < 0.625, exp form elsewhere.
// Agrees with std::tanh to ~2 ulp, which keeps the propagated derivative
// identities consistent far below the test tolerances.
inline v4 tanh4(v4 x) {
    const v4 sgn = x < broadcast(0.0) ? broadcast(-1.0) : broadcast(1.0);
    v4 ax = x * sgn;
    const v4 cap = broadcast(350.0);
    ax = ax > cap ? cap : ax;

    // |x| < 0.625: x + x^3 P(x^2)/Q(x^2)
    const v4 z = ax * ax;
    v4 p = broadcast(-9.64399179425052238628e-1);
    p = p * z + broadcast(-9.92877231001918586564e1);
    p = p * z + broadcast(-1.61468768441708447952e3);
    v4 q = z + broadcast(1.12811678491632931402e2);
    q = q * z + broadcast(2.23548839060100448583e3);
    q = q * z + broadcast(4.84406305325125486048e3);
    const v4 small = ax + ax * z * (p / q);

    // otherwise: 1 - 2/(exp(2|x|) + 1)
    const v4 e = exp4(broadcast(-2.0) * ax);
    const v4 large = (broadcast(1.0) - e) / (broadcast(1.0) + e);

    const v4 t = ax < broadcast(0.625) ? small : large;
    return t * sgn;
}

inline double fast_tanh(double x) {
    return tanh4(broadcast(x))[0];
}

}  // namespace pinnsel::kernels
