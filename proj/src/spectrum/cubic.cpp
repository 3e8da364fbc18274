#include "eplab/spectrum/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eplab::spectrum {

namespace {

using cd = std::complex<double>;

template <class T>
T eval(double a, double b, double c, T z)
{
    return ((z + a) * z + b) * z + c;
}

template <class T>
T polish(double a, double b, double c, T z)
{
    const T f = eval(a, b, c, z);
    const T df = (3.0 * z + 2.0 * a) * z + b;
    if (df == T(0))
        return z;
    const T trial = z - f / df;
    return std::abs(eval(a, b, c, trial)) < std::abs(f) ? trial : z;
}

}  // namespace

double cubic_discriminant(const CubicCoeffs& c)
{
    const double a = c.c2, b = c.c1, d = c.c0;
    return 18.0 * a * b * d - 4.0 * a * a * a * d + a * a * b * b - 4.0 * b * b * b -
           27.0 * d * d;
}

std::array<cd, 3> cubic_roots(const CubicCoeffs& coeffs)
{
    // Work on lambda / s so that all coefficients are O(1).
    const double s = std::max({std::abs(coeffs.c2), std::sqrt(std::abs(coeffs.c1)),
                               std::cbrt(std::abs(coeffs.c0))});
    if (s == 0.0)
        return {cd{0.0}, cd{0.0}, cd{0.0}};

    const double a = coeffs.c2 / s;
    const double b = coeffs.c1 / (s * s);
    const double c = coeffs.c0 / (s * s * s);

    // Depressed cubic t^3 + p t + q with lambda = t - a/3.
    const double shift = a / 3.0;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    std::array<cd, 3> out;
    if (disc < 0.0) {
        // Three distinct real roots; p < 0 here.
        const double r = std::sqrt(-p / 3.0);
        const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        std::array<double, 3> t;
        for (int k = 0; k < 3; ++k) {
            const double x = 2.0 * r * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift;
            t[k] = polish(a, b, c, x);
        }
        std::sort(t.begin(), t.end(), std::greater<>());
        for (int k = 0; k < 3; ++k) out[k] = cd(t[k] * s, 0.0);
        return out;
    }

    // One real root and a conjugate pair (degenerate to a double root when
    // disc == 0). Choosing the sign of the cube-root argument to match -q
    // avoids cancellation in A.
    const double big = std::abs(q) / 2.0 + std::sqrt(disc);
    const double A = (q > 0.0 ? -1.0 : 1.0) * std::cbrt(big);
    const double B = A != 0.0 ? -p / (3.0 * A) : 0.0;

    double real_root = polish(a, b, c, A + B - shift);
    cd pair(-(A + B) / 2.0 - shift, std::sqrt(3.0) / 2.0 * std::abs(A - B));
    if (pair.imag() == 0.0) {
        const double x = polish(a, b, c, pair.real());
        std::array<double, 3> t{real_root, x, x};
        std::sort(t.begin(), t.end(), std::greater<>());
        for (int k = 0; k < 3; ++k) out[k] = cd(t[k] * s, 0.0);
        return out;
    }
    pair = polish(a, b, c, pair);
    pair = cd(pair.real(), std::abs(pair.imag()));
    out[0] = cd(real_root * s, 0.0);
    out[1] = pair * s;
    out[2] = std::conj(out[1]);
    return out;
}

}  // namespace eplab::spectrum
