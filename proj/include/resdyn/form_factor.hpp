// form_factor.hpp: radial/angular form factors g(r, sigma) = scale * r^p * exp(-r^m) * g1(sigma)

#pragma once

#include "resdyn/errors.hpp"
#include "resdyn/linalg.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

namespace resdyn {

// Point on the unit sphere in polar/azimuthal angles.
struct SpherePoint {
    double theta{0.0};
    double phi{0.0};
};

// Real spherical harmonic (orthonormal on S^2). m < 0 uses sin, m > 0 cos.
inline double real_spherical_harmonic(int l, int m, SpherePoint s) {
    const unsigned am = static_cast<unsigned>(std::abs(m));
    // std::sph_legendre already includes the normalisation sqrt((2l+1)/4pi (l-m)!/(l+m)!)
    const double y = std::sph_legendre(static_cast<unsigned>(l), am, s.theta);
    if (m == 0) return y;
    const double r = std::sqrt(2.0) * y;
    return m > 0 ? r * std::cos(m * s.phi) : r * std::sin(static_cast<double>(am) * s.phi);
}

// Angular profile g1(sigma): either a constant or a finite real-spherical-harmonic sum.
class AngularWeight {
public:
    AngularWeight() = default;

    static AngularWeight isotropic(cplx value = 1.0) {
        AngularWeight w;
        w.constant_ = value;
        return w;
    }

    // Coefficients keyed by (l, m), |m| <= l. Duplicate keys are summed.
    static AngularWeight harmonics(const std::vector<std::pair<std::pair<int, int>, cplx>>& terms) {
        AngularWeight w;
        w.constant_ = 0.0;
        for (const auto& [lm, c] : terms) {
            const auto [l, m] = lm;
            if (l < 0 || std::abs(m) > l)
                fail(ErrorCode::UnsupportedAnisotropy, "spherical harmonic index out of range");
            if (l == 0 && m == 0) {
                w.constant_ += c / std::sqrt(4.0 * pi);
            } else {
                w.coeffs_[{l, m}] += c;
            }
        }
        return w;
    }

    bool is_isotropic() const noexcept { return coeffs_.empty(); }

    cplx operator()(SpherePoint s) const {
        cplx v = constant_;
        for (const auto& [lm, c] : coeffs_) v += c * real_spherical_harmonic(lm.first, lm.second, s);
        return v;
    }

    // \int_{S^2} |g1|^2 dsigma
    double norm2() const {
        double n = 4.0 * pi * std::norm(constant_);
        for (const auto& [lm, c] : coeffs_) n += std::norm(c);
        return n;
    }

    const std::map<std::pair<int, int>, cplx>& coefficients() const noexcept { return coeffs_; }
    cplx constant() const noexcept { return constant_; }

private:
    cplx constant_{1.0};
    std::map<std::pair<int, int>, cplx> coeffs_;
};

struct FormFactor {
    double radial_exponent{-0.5}; // p
    int decay_exponent{1};        // m in {1, 2}
    AngularWeight angular{};
    double overall_scale{1.0};

    static FormFactor zero() {
        FormFactor f;
        f.overall_scale = 0.0;
        return f;
    }

    void validate() const {
        if (!std::isfinite(radial_exponent) || !(2.0 * radial_exponent + 2.0 > -1.0))
            fail(ErrorCode::InvalidArgument, "form factor not square integrable: need 2p + 2 > -1");
        if (decay_exponent != 1 && decay_exponent != 2)
            fail(ErrorCode::InvalidArgument, "decay exponent m must be 1 or 2");
        if (!std::isfinite(overall_scale))
            fail(ErrorCode::InvalidArgument, "form factor scale must be finite");
    }

    bool is_zero() const noexcept { return overall_scale == 0.0 || angular.norm2() == 0.0; }

    // Radial part scale * r^p * exp(-r^m), r > 0.
    double radial(double r) const {
        if (overall_scale == 0.0) return 0.0;
        return overall_scale * std::pow(r, radial_exponent) * std::exp(-std::pow(r, decay_exponent));
    }

    cplx operator()(double r, SpherePoint s) const { return radial(r) * angular(s); }

    // J(r) = r^2 \int |g(r, sigma)|^2 dsigma : radial spectral weight.
    double spectral_weight(double r) const {
        if (is_zero() || r <= 0.0) return 0.0;
        return r_power_weight(r, 2.0 + 2.0 * radial_exponent);
    }

    // scale^2 norm2 r^q exp(-2 r^m) as one power, exact down to denormal r
    double r_power_weight(double r, double q) const {
        const double x = 2.0 * std::pow(r, decay_exponent);
        if (x > 700.0) return 0.0;
        return overall_scale * overall_scale * angular.norm2() * std::pow(r, q) * std::exp(-x);
    }

    // True when p == -1/2 up to rounding: the critical infrared exponent.
    bool infrared_critical() const noexcept { return std::abs(radial_exponent + 0.5) < 1e-12; }
};

} // namespace resdyn
