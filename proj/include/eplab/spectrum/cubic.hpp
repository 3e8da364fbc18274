#pragma once

#include <array>
#include <complex>

namespace eplab::spectrum {

// Monic cubic lambda^3 + c2 lambda^2 + c1 lambda + c0.
struct CubicCoeffs {
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
};

// 18 c2 c1 c0 - 4 c2^3 c0 + c2^2 c1^2 - 4 c1^3 - 27 c0^2.
// Positive: three distinct real roots. Negative: one real root and a
// complex-conjugate pair. Zero: a repeated root.
double cubic_discriminant(const CubicCoeffs& c);

// Closed-form roots (trigonometric form for three real roots, Cardano with
// the cancellation-free branch otherwise), each refined by one Newton step
// that is kept only if it lowers |p(lambda)|. Conjugate pairs are returned
// as exact conjugates and real roots with exactly zero imaginary part.
//
// Order: with a complex pair, {real, +Im, -Im}; with three real roots,
// descending real part.
std::array<std::complex<double>, 3> cubic_roots(const CubicCoeffs& c);

}  // namespace eplab::spectrum
