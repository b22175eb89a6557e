#pragma once

#include <cmath>
#include <vector>

#include "cornerflow/coefficients.hpp"
#include "cornerflow/errors.hpp"
#include "cornerflow/field.hpp"
#include "cornerflow/geometry.hpp"

namespace cornerflow {

namespace detail {

// Second-order line derivatives whose one-sided edge variants carry the SAME
// leading error constants as the centered interior ones (+h^2/6 f''' for the
// first derivative, +h^2/12 f'''' for the second).  A field assembled with
// these stencils has a truncation error that varies smoothly across the edge
// rows, so differentiating it near an edge stays second order.  The standard
// edge stencils break this: (2,-5,4,-1)/h^2 has constant -11/12 f'''', and
// the mismatch costs one order in wall-trace residuals of built fields.
template <class F>
double md1_line(F&& f, int k, int n, double h) {
    if (k >= 1 && k <= n - 1) return (f(k + 1) - f(k - 1)) / (2.0 * h);
    if (k == 0) return (-2.0 * f(0) + 3.5 * f(1) - 2.0 * f(2) + 0.5 * f(3)) / h;
    return (2.0 * f(n) - 3.5 * f(n - 1) + 2.0 * f(n - 2) - 0.5 * f(n - 3)) / h;
}

template <class F>
double md2_line(F&& f, int k, int n, double h) {
    if (k >= 1 && k <= n - 1) return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (h * h);
    if (k == 0)
        return (3.0 * f(0) - 9.0 * f(1) + 10.0 * f(2) - 5.0 * f(3) + f(4)) / (h * h);
    return (3.0 * f(n) - 9.0 * f(n - 1) + 10.0 * f(n - 2) - 5.0 * f(n - 3) + f(n - 4)) / (h * h);
}

inline double md1_at(const Field2& f, int i, int j, int axis, double h) {
    if (axis == 1) return md1_line([&](int k) { return f.at(k, j); }, i, f.n1(), h);
    return md1_line([&](int k) { return f.at(i, k); }, j, f.n2(), h);
}

inline double md2_at(const Field2& f, int i, int j, int axis, double h) {
    if (axis == 1) return md2_line([&](int k) { return f.at(k, j); }, i, f.n1(), h);
    return md2_line([&](int k) { return f.at(i, k); }, j, f.n2(), h);
}

inline double md12_at(const Field2& f, int i, int j, double h) {
    return md1_line([&](int k) { return md1_at(f, k, j, 2, h); }, i, f.n1(), h);
}

}  // namespace detail

// Time jet {phi_k} of a solution determined by its initial pair: phi_2 comes
// from solving the equation for d00, phi_3 from differentiating it once in
// time, which brings in the state rates through the coefficient Jacobian.
// Spatial derivatives use error-matched one-sided stencils at the edges; no
// boundary condition is assumed of the data here.
inline std::vector<Field2> build_jet(const CornerDomain& dom, const GasState& gas, const Grid& g,
                                     const Field2& phi0, const Field2& phi1, int order = 3) {
    if (order < 2 || order > 3) throw ConfigError("jet order must be 2 or 3");
    if (phi0.n1() != g.n1 || phi0.n2() != g.n2 || !phi0.same_shape(phi1))
        throw ConfigError("data shape does not match grid");
    if (g.n1 < 4 || g.n2 < 4) throw ConfigError("jet stencils need at least five nodes per axis");
    const FrameGrid frames = build_frames(dom, g);
    using detail::md1_at;
    using detail::md2_at;
    using detail::md12_at;

    std::vector<Field2> jet{phi0, phi1};
    Field2 phi2(g.n1, g.n2);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) {
            const Vec3 sz{phi1.at(i, j), md1_at(phi0, i, j, 1, g.h), md1_at(phi0, i, j, 2, g.h)};
            const AlphaSet al = alpha_coeffs(gas, frames.at(i, j), sz);
            const double rhs =
                2.0 * (al.second.m[0][1] * md1_at(phi1, i, j, 1, g.h) +
                       al.second.m[0][2] * md1_at(phi1, i, j, 2, g.h)) +
                al.second.m[1][1] * md2_at(phi0, i, j, 1, g.h) +
                2.0 * al.second.m[1][2] * md12_at(phi0, i, j, g.h) +
                al.second.m[2][2] * md2_at(phi0, i, j, 2, g.h) +
                al.lower[1] * md1_at(phi0, i, j, 1, g.h) + al.lower[2] * md1_at(phi0, i, j, 2, g.h);
            phi2.at(i, j) = -rhs;
        }
    jet.push_back(phi2);
    if (order == 2) return jet;

    Field2 phi3(g.n1, g.n2);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) {
            const Vec3 sz{phi1.at(i, j), md1_at(phi0, i, j, 1, g.h), md1_at(phi0, i, j, 2, g.h)};
            const Vec3 szdot{phi2.at(i, j), md1_at(phi1, i, j, 1, g.h),
                             md1_at(phi1, i, j, 2, g.h)};
            const AlphaSet al = alpha_coeffs(gas, frames.at(i, j), sz);
            const AlphaJac jac = alpha_state_jac(gas, frames.at(i, j), sz);
            Sym3 ad{};
            Vec3 ld{0.0, 0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) ad.m[a][b] += jac.second[k].m[a][b] * szdot[k];
                for (int a = 0; a < 3; ++a) ld[a] += jac.lower[k][a] * szdot[k];
            }
            const double rhs =
                2.0 * (al.second.m[0][1] * md1_at(phi2, i, j, 1, g.h) +
                       al.second.m[0][2] * md1_at(phi2, i, j, 2, g.h)) +
                al.second.m[1][1] * md2_at(phi1, i, j, 1, g.h) +
                2.0 * al.second.m[1][2] * md12_at(phi1, i, j, g.h) +
                al.second.m[2][2] * md2_at(phi1, i, j, 2, g.h) +
                al.lower[1] * md1_at(phi1, i, j, 1, g.h) +
                al.lower[2] * md1_at(phi1, i, j, 2, g.h) +
                2.0 * (ad.m[0][1] * md1_at(phi1, i, j, 1, g.h) +
                       ad.m[0][2] * md1_at(phi1, i, j, 2, g.h)) +
                ad.m[1][1] * md2_at(phi0, i, j, 1, g.h) +
                2.0 * ad.m[1][2] * md12_at(phi0, i, j, g.h) +
                ad.m[2][2] * md2_at(phi0, i, j, 2, g.h) + ld[1] * md1_at(phi0, i, j, 1, g.h) +
                ld[2] * md1_at(phi0, i, j, 2, g.h);
            phi3.at(i, j) = -rhs;
        }
    jet.push_back(phi3);
    return jet;
}

// Residuals of the time-differentiated boundary conditions at t = 0: for
// every time order k and tangential order m with k + m <= order,
//   wall1[k][m] = sup | D_tang^m ( b1 d1 phi_k + b2 d2 phi_k ) |  on {z1 = 0}
//   wall2[k][m] = sup | D_tang^m ( d2 phi_k ) |                   on {z2 = 0}
struct CompatReport {
    int order = 2;
    double wall1[3][3]{};
    double wall2[3][3]{};
    double worst = 0.0;
};

inline CompatReport check_compatibility(const std::vector<Field2>& jet, const Grid& g,
                                        const std::vector<double>& b1,
                                        const std::vector<double>& b2, int order = 2) {
    if (order < 0 || order > 2 || static_cast<int>(jet.size()) < order + 1)
        throw ConfigError("compatibility order needs jet entries through phi_order");
    if (jet[0].n1() != g.n1 || jet[0].n2() != g.n2)
        throw ConfigError("jet shape does not match grid");
    if (static_cast<int>(b1.size()) != g.n2 + 1 || b1.size() != b2.size())
        throw ConfigError("boundary traces must have one entry per z2 node");
    CompatReport rep;
    rep.order = order;
    for (int k = 0; k <= order; ++k) {
        const Field2& ph = jet[static_cast<std::size_t>(k)];
        std::vector<double> tr1(g.n2 + 1), tr2(g.n1 + 1);
        for (int j = 0; j <= g.n2; ++j)
            tr1[j] = b1[j] * d1_at(ph, 0, j, 1, g.h) + b2[j] * d1_at(ph, 0, j, 2, g.h);
        for (int i = 0; i <= g.n1; ++i) tr2[i] = d1_at(ph, i, 0, 2, g.h);
        for (int m = 0; k + m <= order; ++m) {
            double w1 = 0.0, w2 = 0.0;
            for (int j = 0; j <= g.n2; ++j) {
                double v = tr1[j];
                if (m == 1) v = stencil::d1_line([&](int q) { return tr1[q]; }, j, g.n2, g.h);
                if (m == 2) v = stencil::d2_line([&](int q) { return tr1[q]; }, j, g.n2, g.h);
                w1 = std::max(w1, std::fabs(v));
            }
            for (int i = 0; i <= g.n1; ++i) {
                double v = tr2[i];
                if (m == 1) v = stencil::d1_line([&](int q) { return tr2[q]; }, i, g.n1, g.h);
                if (m == 2) v = stencil::d2_line([&](int q) { return tr2[q]; }, i, g.n1, g.h);
                w2 = std::max(w2, std::fabs(v));
            }
            rep.wall1[k][m] = w1;
            rep.wall2[k][m] = w2;
            rep.worst = std::max({rep.worst, w1, w2});
        }
    }
    return rep;
}

// Taylor evaluation of the jet and its analytic time derivatives:
// returns d^deriv/dt^deriv of sum_k phi_k t^k / k!.
inline Field2 taylor_psi(const std::vector<Field2>& jet, double t, int deriv = 0) {
    if (jet.empty() || deriv < 0) throw ConfigError("taylor evaluation needs a jet");
    const int n1 = jet[0].n1(), n2 = jet[0].n2();
    Field2 out(n1, n2);
    for (int k = deriv; k < static_cast<int>(jet.size()); ++k) {
        double w = 1.0;
        for (int q = 1; q <= k - deriv; ++q) w *= t / q;
        for (int i = 0; i <= n1; ++i)
            for (int j = 0; j <= n2; ++j) out.at(i, j) += jet[static_cast<std::size_t>(k)].at(i, j) * w;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Data generators.  Interior bumps are compatible to machine zero at every
// order (all traces vanish identically near the walls); the symmetrized
// sampler is compatible on flat walls by parity; the projector repairs the
// order-zero oblique trace on a curved wall; the slope injector manufactures
// a violation of known size for detection tests.

template <class F>
Field2 sample_field(const Grid& g, F&& f) {
    Field2 out(g.n1, g.n2);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) out.at(i, j) = f(g.z1(i), g.z2(j));
    return out;
}

namespace detail {

inline double bump_c6(double u) {
    const double s = 1.0 - u * u;
    return s > 0.0 ? s * s * s * s * s * s * s : 0.0;
}

// 1 on [0, half], smooth C^6 descent to 0 at [width, inf).
inline double plateau(double s, double width) {
    const double half = 0.5 * width;
    if (s <= half) return 1.0;
    if (s >= width) return 0.0;
    return smoothstep_c6(1.0 - (s - half) / half, 0);
}

}  // namespace detail

inline Field2 data_interior_bump(const Grid& g, double c1, double c2, double rad, double amp) {
    return sample_field(g, [&](double z1, double z2) {
        return amp * detail::bump_c6(std::hypot(z1 - c1, z2 - c2) / rad);
    });
}

// Even reflection of an arbitrary smooth sample across both straightened
// walls; on a flat corner every odd-order wall trace then cancels by parity.
template <class F>
Field2 data_symmetrized(const Grid& g, F&& raw) {
    return sample_field(g, [&](double z1, double z2) {
        return raw(z1, z2) + raw(-z1, z2) + raw(z1, -z2) + raw(-z1, -z2);
    });
}

// Subtracts z1 * plateau(z1) * q(z2) with q chosen from the discrete trace so
// the order-zero oblique condition holds exactly on the grid.
inline Field2 data_oblique_projected(const Field2& raw, const Grid& g,
                                     const std::vector<double>& b1,
                                     const std::vector<double>& b2, double width) {
    Field2 out = raw;
    for (int j = 0; j <= g.n2; ++j) {
        const double q =
            (b1[j] * d1_at(raw, 0, j, 1, g.h) + b2[j] * d1_at(raw, 0, j, 2, g.h)) / b1[j];
        for (int i = 0; i <= g.n1; ++i)
            out.at(i, j) -= g.z1(i) * detail::plateau(g.z1(i), width) * q;
    }
    return out;
}

// Adds eps * z2 * plateau(z2): violates the wall-2 condition by exactly eps.
inline Field2 data_injected_slope(const Field2& base, const Grid& g, double eps, double width) {
    Field2 out = base;
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j)
            out.at(i, j) += eps * g.z2(j) * detail::plateau(g.z2(j), width);
    return out;
}

}  // namespace cornerflow
