#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cornerflow/errors.hpp"

namespace cornerflow {

namespace detail {

// Smoothstep with six vanishing derivatives at both ends: the degree-13
// polynomial S(0)=0, S(1)=1, S^(k)(0)=S^(k)(1)=0 for k=1..6.  (The classical
// quintic smoothstep is only C^2, which is not enough for order-6 wall
// derivative bounds, so the C^6 member of the family is used.)
inline double smoothstep_c6(double u, int order) {
    static const double c[7] = {1716.0, -9009.0, 20020.0, -24024.0, 16380.0, -6006.0, 924.0};
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return order == 0 ? 1.0 : 0.0;
    double s = 0.0;
    for (int k = 0; k < 7; ++k) {
        const int p = 7 + k;  // power of the monomial
        if (p - order < 0) continue;
        double fac = 1.0;
        for (int m = 0; m < order; ++m) fac *= static_cast<double>(p - m);
        s += c[k] * fac * std::pow(u, p - order);
    }
    return s;
}

}  // namespace detail

// Wall perturbation profile
//     W(s) = epsilon * s^4 * p(s) * chi(|s|),
// where p(s) = sum_k poly[k] s^k and chi is a C^6 cutoff that equals 1 on
// [0, cutoff/2] and 0 beyond cutoff.  The s^4 factor pins W and its first
// three derivatives to zero at the corner; the cutoff gives compact support.
// Derivatives up to order 6 are evaluated in closed form (Leibniz on the
// polynomial part times the piecewise-polynomial cutoff), so there is no
// differencing error anywhere in the geometry pipeline.
class WallProfile {
  public:
    static constexpr int kMaxOrder = 6;

    WallProfile() = default;
    WallProfile(double epsilon, std::vector<double> poly, double cutoff)
        : epsilon_(epsilon), poly_(std::move(poly)), cutoff_(cutoff) {
        if (cutoff_ <= 0.0) throw ConfigError("wall profile: cutoff_radius must be positive");
    }

    // Flat wall (W identically zero).
    static WallProfile flat() { return WallProfile(); }

    double epsilon() const { return epsilon_; }
    double cutoff_radius() const { return cutoff_; }
    bool is_flat() const {
        if (epsilon_ == 0.0 || poly_.empty()) return true;
        for (double c : poly_)
            if (c != 0.0) return false;
        return true;
    }

    // W^(order)(s).  The profile is evaluated for any real s (the inverse
    // maps probe slightly negative arguments near the corner); the cutoff is
    // applied to |s|, which is smooth because chi is constant near 0.
    double eval(double s, int order) const {
        if (order < 0 || order > kMaxOrder)
            throw std::out_of_range("wall profile: derivative order out of range");
        if (is_flat()) return 0.0;
        // Leibniz: W^(m) = sum_j C(m,j) q^(j) chi^(m-j), q(s) = eps s^4 p(s).
        double acc = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= order; ++j) {
            if (j > 0) binom = binom * (order - j + 1) / j;
            acc += binom * poly_deriv(s, j) * cutoff_deriv(s, order - j);
        }
        return acc;
    }

    // max over k<=6, s in [0,cutoff] of |W^(k)(s)| by dense scan; this is the
    // measured smallness the admissibility checks compare against.
    double sup_deriv_bound(int samples = 2048) const {
        double m = 0.0;
        for (int k = 0; k <= kMaxOrder; ++k)
            for (int i = 0; i <= samples; ++i) {
                const double s = cutoff_ * i / samples;
                m = std::max(m, std::fabs(eval(s, k)));
            }
        return m;
    }

  private:
    double epsilon_ = 0.0;
    std::vector<double> poly_;
    double cutoff_ = 1.0;

    static double ipow(double x, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= x;
        return r;
    }

    // d^j/ds^j [ epsilon * s^4 * p(s) ]
    double poly_deriv(double s, int j) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < poly_.size(); ++k) {
            const int p = 4 + static_cast<int>(k);
            if (p < j) continue;
            double fac = 1.0;
            for (int m = 0; m < j; ++m) fac *= static_cast<double>(p - m);
            acc += poly_[k] * fac * ipow(s, p - j);
        }
        return acc * epsilon_;
    }

    // d^k/ds^k [ chi(|s|) ] with chi == 1 on [0, cutoff/2], == 0 past cutoff.
    double cutoff_deriv(double s, int k) const {
        const double a = cutoff_ / 2.0, b = cutoff_;
        const double t = std::fabs(s);
        if (t <= a) return k == 0 ? 1.0 : 0.0;
        if (t >= b) return 0.0;
        const double u = (t - a) / (b - a);
        double v = -detail::smoothstep_c6(u, k) / ipow(b - a, k);
        if (k == 0) v += 1.0;
        // chain rule through |s| contributes (sign s)^k
        if (s < 0.0 && (k % 2) == 1) v = -v;
        return v;
    }
};

// Convenience alias used by the transform code: evaluate W^(order)(s).
inline double wall_eval(const WallProfile& w, double s, int order) { return w.eval(s, order); }

}  // namespace cornerflow
