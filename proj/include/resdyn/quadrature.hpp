// quadrature.hpp: adaptive 1D quadrature on finite / half-infinite intervals and
// Cauchy principal values on the half line.

#pragma once

#include "resdyn/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace resdyn::quad {

struct Tolerance {
    double absolute{1e-10};
    double relative{1e-10};
};

namespace detail {

inline void check(double value, double error, double l1, Tolerance tol, const char* where) {
    if (!std::isfinite(value) || !(error <= std::max(tol.absolute, tol.relative * l1)))
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: error estimate %.3e for value %.12g", where, error, value);
        fail(ErrorCode::QuadratureNotConverged, buf);
    }
}

} // namespace detail

// Smooth integrand on a finite interval (no endpoint evaluation).
template <class F>
double smooth(F&& f, double a, double b, Tolerance tol = {}) {
    if (a == b) return 0.0;
    double err = 0.0, l1 = 0.0;
    // Boost's error estimates are not scale invariant; integrate over [0, 1]
    const double w = b - a;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return w * f(a + w * t); }, 0.0, 1.0, 15, tol.relative, &err, &l1);
    detail::check(v, err, l1, tol, "gauss_kronrod");
    return v;
}

// Finite interval with possible integrable endpoint singularities.
template <class F>
double endpoint_singular(F&& f, double a, double b, Tolerance tol = {}) {
    if (a == b) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    const double w = b - a;
    double err = 0.0, l1 = 0.0;
    // tc is the distance to the nearer endpoint, kept exact near b
    const auto g = [&](double t, double tc) { return w * (t < 0.5 ? f(a + w * t) : f(b - w * tc)); };
    const double v = ts.integrate(g, 0.0, 1.0, std::sqrt(std::numeric_limits<double>::epsilon()) * 1e-3, &err, &l1);
    detail::check(v, err, l1, tol, "tanh_sinh");
    return v;
}

// [a, inf) with an integrand decaying at infinity.
template <class F>
double to_infinity(F&& f, double a, Tolerance tol = {}) {
    thread_local boost::math::quadrature::exp_sinh<double> es(12);
    double err = 0.0, l1 = 0.0;
    const double v = es.integrate([&](double v) { return f(v); }, a, std::numeric_limits<double>::infinity(),
                                  std::sqrt(std::numeric_limits<double>::epsilon()) * 1e-3, &err, &l1);
    detail::check(v, err, l1, tol, "exp_sinh");
    return v;
}

// \int_0^inf f(v) dv, f possibly singular (integrably) at 0.
template <class F>
double half_line(F&& f, Tolerance tol = {}, double split = 1.0) {
    return endpoint_singular(f, 0.0, split, tol) + to_infinity(f, split, tol);
}

// P.V. \int_0^inf f(v) / (v - pole) dv.
//
// For pole > 0 the window |v - pole| < pole/2 is excised symmetrically and its
// contribution is taken in the folded form \int_0^h (f(pole+x) - f(pole-x))/x dx,
// which is the excision limit with the odd part removed exactly.
template <class F>
double principal_value_half_line(F&& f, double pole, Tolerance tol = {}) {
    if (pole < 0.0) {
        return half_line([&](double v) { return f(v) / (v - pole); }, tol, std::max(1.0, -pole));
    }
    if (pole == 0.0) {
        return half_line([&](double v) { return f(v) / v; }, tol);
    }
    const double h = 0.5 * pole;
    const double inner = endpoint_singular([&](double v) { return f(v) / (v - pole); }, 0.0, pole - h, tol);
    const double window = smooth([&](double x) { return (f(pole + x) - f(pole - x)) / x; }, 0.0, h, tol);
    const double outer = to_infinity([&](double v) { return f(v) / (v - pole); }, pole + h, tol);
    return inner + window + outer;
}

} // namespace resdyn::quad
