#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/field.hpp"
#include "cornerflow/linear_solver.hpp"
#include "cornerflow/types.hpp"

namespace cornerflow {

// Multiplier direction for the energy identity.  For the operators built
// here the time direction itself works: contracting the symbol with q turns
// the quadratic form into ((q r)xi)(q xi) whose symmetrization is
//
//   S_ij = delta_i0 r_0j + r_0i delta_j0 - r_ij,
//
// positive definite exactly when 1 > 0, -r11 > 0 and r11 r22 - r12^2 > 0.
struct Multiplier {
    Vec3 q{1.0, 0.0, 0.0};
    double margin = 0.0;  // min over sampled nodes of min(-r11, r11 r22 - r12^2)
};

inline Multiplier select_multiplier(const LinearIBVP& p, const Grid& g) {
    Multiplier m;
    m.margin = 1e300;
    const int ns = std::max({detail::scan_levels(p.r11, g), detail::scan_levels(p.r12, g),
                             detail::scan_levels(p.r22, g)});
    for (int n = 0; n < ns; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double s11 = -p.r11.at(n, i, j);
                const double det =
                    p.r11.at(n, i, j) * p.r22.at(n, i, j) - p.r12.at(n, i, j) * p.r12.at(n, i, j);
                m.margin = std::min({m.margin, s11, det});
            }
    if (m.margin <= 0.0)
        throw NotHyperbolic("multiplier quadratic form lost positive definiteness");
    return m;
}

// Energy density the multiplier produces on a covector xi = (xi0, xi1, xi2):
// 2 (r xi . q-direction slot) (q . xi) - q0 (xi' r xi).
inline double h0_form(const Sym3& r, const Vec3& q, const Vec3& xi) {
    double rq = 0.0;  // (r xi)_0-like contraction against q through the 0 row
    for (int i = 0; i < 3; ++i) rq += r.m[i][0] * xi[i];
    return 2.0 * rq * dot3(q, xi) - q[0] * quad_form(r, xi);
}

// Spatial flux pair of the same identity; component j vanishes on a wall
// where r_j0 = r_j(3-j) = 0 and the co-normal derivative xi_j is zero, which
// is exactly what the straightened-wall identities provide.
inline Vec2 h1_form(const Sym3& r, const Vec3& q, const Vec3& xi) {
    const double qxi = dot3(q, xi);
    Vec2 f{};
    for (int j = 1; j < 3; ++j) {
        double rrow = 0.0;
        for (int i = 0; i < 3; ++i) rrow += r.m[j][i] * xi[i];
        f[j - 1] = 2.0 * qxi * rrow - q[j] * quad_form(r, xi);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Weighted space-time Sobolev machinery.

struct MultiIndex {
    int a0 = 0, a1 = 0, a2 = 0;
    int order() const { return a0 + a1 + a2; }
};

inline std::vector<MultiIndex> multi_indices_up_to(int s) {
    std::vector<MultiIndex> v;
    for (int k = 0; k <= s; ++k)
        for (int a0 = k; a0 >= 0; --a0)
            for (int a1 = k - a0; a1 >= 0; --a1) v.push_back({a0, a1, k - a0 - a1});
    return v;
}

// D^alpha u by repeated second-order first-derivative passes, time first,
// in a fixed order so results are deterministic.
inline Field3 apply_derivative(const Field3& u, const Grid& g, const MultiIndex& mi) {
    Field3 out = u;
    for (int k = 0; k < mi.a0; ++k) out = field3_d1(out, g, 0);
    for (int k = 0; k < mi.a1; ++k) out = field3_d1(out, g, 1);
    for (int k = 0; k < mi.a2; ++k) out = field3_d1(out, g, 2);
    return out;
}

// The full operator applied to an arbitrary history with boundary-free
// stencils (one-sided at edges); derivative fields satisfy no boundary
// condition, so ghost closures must not be used here.
inline Field3 apply_operator(const LinearIBVP& p, const Grid& g, const Field3& v) {
    const int L = v.levels();
    Field3 out;
    out.lv.assign(L, Field2(g.n1, g.n2));
    for (int n = 0; n < L; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                auto tline = [&](int m) { return v.lv[m].at(i, j); };
                const double d00 = stencil::d2_line(tline, n, L - 1, g.dt);
                const double d0 = stencil::d1_line(tline, n, L - 1, g.dt);
                const double d01 = stencil::d1_line(
                    [&](int m) { return d1_at(v.lv[m], i, j, 1, g.h); }, n, L - 1, g.dt);
                const double d02 = stencil::d1_line(
                    [&](int m) { return d1_at(v.lv[m], i, j, 2, g.h); }, n, L - 1, g.dt);
                const Field2& s = v.lv[n];
                out.lv[n].at(i, j) =
                    d00 + 2.0 * (p.r01.at(n, i, j) * d01 + p.r02.at(n, i, j) * d02) +
                    p.r11.at(n, i, j) * d2_at(s, i, j, 1, g.h) +
                    2.0 * p.r12.at(n, i, j) * d12_at(s, i, j, g.h) +
                    p.r22.at(n, i, j) * d2_at(s, i, j, 2, g.h) + p.r0.at(n, i, j) * d0 +
                    p.r1.at(n, i, j) * d1_at(s, i, j, 1, g.h) +
                    p.r2.at(n, i, j) * d1_at(s, i, j, 2, g.h);
            }
    return out;
}

// One weighted term: eta-weighted space-time mass plus the terminal slice.
inline double weighted_term(const Field3& du, const Grid& g, double eta) {
    return eta * weighted_l2sq(du, g, eta) +
           std::exp(-2.0 * eta * g.t_final()) * slice_l2sq(du.lv.back(), g);
}

// Cumulative two-sided tally of the estimate
//
//   sum_{|a|<=k} [ eta ||e^{-eta z0} D^a u||^2 + e^{-2 eta T} ||D^a u(T)||^2 ]
//     <=  C [ (1/eta) sum_{|a|<=k} ||e^{-eta z0} D^a F||^2 + data terms ]
//
// reported order by order together with the measured quotient.  The right
// side differentiates the forcing itself: applying the discrete operator to
// D^a u instead would be equal only up to commutators and, at order four,
// drowns in amplified truncation noise on any computed history.
struct EnergyReport {
    double eta = 0.0;
    int s = 4;
    std::array<double, 5> lhs{};   // cumulative over |alpha| <= k
    std::array<double, 5> rhs{};
    std::array<double, 5> chat{};  // lhs / rhs
};

inline EnergyReport weighted_energy(const LinearIBVP& p, const Field3& u, const Grid& g,
                                    double eta, int s = 4) {
    if (s < 0 || s > 4) throw ConfigError("derivative order must be between 0 and 4");
    if (std::min({g.n1 + 1, g.n2 + 1, g.levels}) < s + 4)
        throw OrderUnavailable("grid too coarse for the requested derivative order");
    EnergyReport rep;
    rep.eta = eta;
    rep.s = s;

    // spatial Sobolev mass of the initial pair, the data side of the estimate
    std::array<double, 5> data{};
    for (const MultiIndex& mi : multi_indices_up_to(s)) {
        if (mi.a0 != 0) continue;
        Field2 d0 = p.phi0, d1f = p.phi1;
        for (int k = 0; k < mi.a1; ++k) {
            Field2 t0(g.n1, g.n2), t1(g.n1, g.n2);
            for (int i = 0; i <= g.n1; ++i)
                for (int j = 0; j <= g.n2; ++j) {
                    t0.at(i, j) = d1_at(d0, i, j, 1, g.h);
                    t1.at(i, j) = d1_at(d1f, i, j, 1, g.h);
                }
            d0 = t0;
            d1f = t1;
        }
        for (int k = 0; k < mi.a2; ++k) {
            Field2 t0(g.n1, g.n2), t1(g.n1, g.n2);
            for (int i = 0; i <= g.n1; ++i)
                for (int j = 0; j <= g.n2; ++j) {
                    t0.at(i, j) = d1_at(d0, i, j, 2, g.h);
                    t1.at(i, j) = d1_at(d1f, i, j, 2, g.h);
                }
            d0 = t0;
            d1f = t1;
        }
        const double m = slice_l2sq(d0, g) + slice_l2sq(d1f, g);
        for (int k = mi.order(); k <= s; ++k) data[k] += m;
    }

    Field3 fh;
    fh.lv.assign(g.levels, Field2(g.n1, g.n2));
    for (int n = 0; n < g.levels; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) fh.lv[n].at(i, j) = p.f.at(n, i, j);

    for (const MultiIndex& mi : multi_indices_up_to(s)) {
        const double lterm = weighted_term(apply_derivative(u, g, mi), g, eta);
        const double rterm = weighted_l2sq(apply_derivative(fh, g, mi), g, eta) / eta;
        for (int k = mi.order(); k <= s; ++k) {
            rep.lhs[k] += lterm;
            rep.rhs[k] += rterm;
        }
    }
    for (int k = 0; k <= s; ++k) {
        rep.rhs[k] += data[k];
        rep.chat[k] = rep.rhs[k] > 0.0 ? rep.lhs[k] / rep.rhs[k] : 0.0;
    }
    return rep;
}

// Solves the problem once and evaluates the estimate at several weights; the
// measured constant must not track eta, or the weighted inequality would be
// empty.  Requires something nonzero to measure.
struct EstimateCheck {
    Multiplier mult;
    std::vector<EnergyReport> reports;
    double chat_spread = 0.0;  // max/min of the order-s quotient across etas
    bool lhs_monotone = true;  // cumulative sums nondecreasing in the order
};

inline EstimateCheck check_estimate(const LinearIBVP& p, const Grid& g,
                                    const std::vector<double>& etas = {4.0, 8.0, 16.0},
                                    int s = 4) {
    EstimateCheck ec;
    ec.mult = select_multiplier(p, g);
    const SolveResult r = solve(p, g);
    double lo = 1e300, hi = 0.0;
    for (double eta : etas) {
        EnergyReport rep = weighted_energy(p, r.u, g, eta, s);
        if (rep.rhs[s] <= 0.0)
            throw PreconditionViolated("estimate check needs nonzero forcing or data");
        for (int k = 0; k < s; ++k)
            if (rep.lhs[k + 1] < rep.lhs[k]) ec.lhs_monotone = false;
        lo = std::min(lo, rep.chat[s]);
        hi = std::max(hi, rep.chat[s]);
        ec.reports.push_back(std::move(rep));
    }
    ec.chat_spread = lo > 0.0 ? hi / lo : 0.0;
    return ec;
}

}  // namespace cornerflow
