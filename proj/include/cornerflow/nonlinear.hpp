#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/compatibility.hpp"
#include "cornerflow/energy.hpp"
#include "cornerflow/errors.hpp"
#include "cornerflow/field.hpp"
#include "cornerflow/linear_solver.hpp"

namespace cornerflow {

// Weighted discrete H^s norm of a space-time field: the energy module's
// eta-weighted space-time mass (plus terminal slice) summed over every
// derivative up to order s.
inline double weighted_hs_norm(const Field3& u, const Grid& g, double eta, int s) {
    if (s < 0 || s > 4) throw ConfigError("norm order must be between 0 and 4");
    if (u.levels() != g.levels || u.lv[0].n1() != g.n1 || u.lv[0].n2() != g.n2)
        throw ConfigError("field shape does not match grid");
    if (std::min({g.n1 + 1, g.n2 + 1, g.levels}) < s + 1)
        throw OrderUnavailable("grid too coarse for the requested norm order");
    double acc = 0.0;
    for (const MultiIndex& mi : multi_indices_up_to(s))
        acc += weighted_term(apply_derivative(u, g, mi), g, eta);
    return std::sqrt(acc);
}

// One frozen-coefficient problem of the fixed-point scheme
//
//   sum_ij alpha_ij(D(phi_m + psi)) d_ij phi_{m+1} = F_m,
//   F_m = - sum_ij alpha_ij d_ij psi - sum_i alpha_i d_i (phi_m + psi),
//
// with the oblique/Neumann wall conditions and zero initial data.  The
// second-order coefficients are refrozen along the current total state; the
// first-order terms ride in the forcing and act on the full current
// potential, so a fixed point satisfies the quasilinear equation itself, not
// a variant missing the polynomial part's drift terms.  psi is the time
// Taylor polynomial of the jet; its time derivatives are taken analytically,
// the iterate's by the second-order level stencils.
inline LinearIBVP assemble_frozen(const CornerDomain& dom, const GasState& gas, const Grid& g,
                                  const std::vector<Field2>& jet, const Field3& phi_m) {
    if (g.extended()) throw ConfigError("frozen assembly expects a quarter-plane grid");
    if (jet.empty() || jet[0].n1() != g.n1 || jet[0].n2() != g.n2)
        throw ConfigError("jet shape does not match grid");
    if (phi_m.levels() != g.levels || !phi_m.lv[0].same_shape(jet[0]))
        throw ConfigError("iterate shape does not match grid");

    const FrameGrid frames = build_frames(dom, g);
    const Field3 dtm = field3_d1(phi_m, g, 0);

    std::vector<Field2> c01, c02, c11, c12, c22, ff;
    c01.reserve(g.levels);
    c02.reserve(g.levels);
    c11.reserve(g.levels);
    c12.reserve(g.levels);
    c22.reserve(g.levels);
    ff.reserve(g.levels);
    double smax = 0.0;

    for (int n = 0; n < g.levels; ++n) {
        const double t = g.t(n);
        const Field2 ps = taylor_psi(jet, t, 0);
        const Field2 p1 = taylor_psi(jet, t, 1);
        const Field2 p2 = taylor_psi(jet, t, 2);
        Field2 w(g.n1, g.n2);
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) w.at(i, j) = ps.at(i, j) + phi_m.lv[n].at(i, j);

        Field2 a01(g.n1, g.n2), a02(g.n1, g.n2), a11(g.n1, g.n2), a12(g.n1, g.n2),
            a22(g.n1, g.n2), f(g.n1, g.n2);
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double w1 = d1_at(w, i, j, 1, g.h);
                const double w2 = d1_at(w, i, j, 2, g.h);
                const Vec3 sz{dtm.lv[n].at(i, j) + p1.at(i, j), w1, w2};
                smax = std::max({smax, std::fabs(sz[0]), std::fabs(w1), std::fabs(w2)});
                const AlphaSet al = alpha_coeffs(gas, frames.at(i, j), sz);
                a01.at(i, j) = al.second.m[0][1];
                a02.at(i, j) = al.second.m[0][2];
                a11.at(i, j) = al.second.m[1][1];
                a12.at(i, j) = al.second.m[1][2];
                a22.at(i, j) = al.second.m[2][2];
                const double sec =
                    al.second.m[0][0] * p2.at(i, j) +
                    2.0 * (al.second.m[0][1] * d1_at(p1, i, j, 1, g.h) +
                           al.second.m[0][2] * d1_at(p1, i, j, 2, g.h)) +
                    al.second.m[1][1] * d2_at(ps, i, j, 1, g.h) +
                    2.0 * al.second.m[1][2] * d12_at(ps, i, j, g.h) +
                    al.second.m[2][2] * d2_at(ps, i, j, 2, g.h);
                f.at(i, j) = -(sec + al.lower[1] * w1 + al.lower[2] * w2);
            }
        c01.push_back(std::move(a01));
        c02.push_back(std::move(a02));
        c11.push_back(std::move(a11));
        c12.push_back(std::move(a12));
        c22.push_back(std::move(a22));
        ff.push_back(std::move(f));
    }

    LinearIBVP p;
    p.r01 = CoeffField::history(std::move(c01));
    p.r02 = CoeffField::history(std::move(c02));
    p.r11 = CoeffField::history(std::move(c11));
    p.r12 = CoeffField::history(std::move(c12));
    p.r22 = CoeffField::history(std::move(c22));
    p.f = CoeffField::history(std::move(ff));
    p.phi0 = Field2(g.n1, g.n2);
    p.phi1 = Field2(g.n1, g.n2);
    p.b1.resize(g.n2 + 1);
    p.b2.resize(g.n2 + 1);
    for (int j = 0; j <= g.n2; ++j) {
        const BoundaryCoeffs bc = boundary_coeffs(dom, g.z2(j));
        p.b1[j] = bc.b1;
        p.b2[j] = bc.b2;
    }
    p.rbar11 = p.rbar22 = -gas.c0sq();
    p.s0 = smax;
    return p;
}

// Per-solve diagnostics: weighted H^4 of the new iterate, weighted H^1 of
// the latest change v_m = phi_{m+1} - phi_m, and the ratio of successive
// change norms (0 on the first row).
struct IterationRow {
    double high_norm = 0.0;
    double v_h1 = 0.0;
    double ratio = 0.0;
};

struct IterationTrace {
    std::vector<IterationRow> rows;
    bool converged = false;

    int iterations() const { return static_cast<int>(rows.size()); }
};

struct NonlinearResult {
    Field3 phi_hat;    // phi_tilde + psi, the candidate potential
    Field3 phi_tilde;  // the fixed-point correction itself
    IterationTrace trace;
};

namespace detail {

inline std::string format_trace(const IterationTrace& tr) {
    std::ostringstream os;
    os << "fixed point failed to contract after " << tr.rows.size() << " solves; |v| history:";
    for (const IterationRow& r : tr.rows) os << ' ' << r.v_h1;
    return os.str();
}

}  // namespace detail

// Fixed-point iteration from the zero correction.  Convergence is declared
// on the weighted H^1 norm of the change (the contraction norm); the H^4
// norm is recorded for boundedness monitoring only.  Returns the first
// iterate whose change dropped below tol_h1, together with the full trace.
// Callers are expected to have run the order-2 compatibility check on the
// data; eta defaults to the grid's post-processing weight (the smallest
// stabilized value of the energy sweep).
inline NonlinearResult iterate(const CornerDomain& dom, const GasState& gas, const Grid& g,
                               const Field2& phi0, const Field2& phi1, int m_max, double tol_h1,
                               double eta = 0.0) {
    if (m_max < 1) throw ConfigError("need at least one fixed-point solve");
    if (!(tol_h1 >= 0.0)) throw ConfigError("tolerance must be nonnegative");
    const double et = eta > 0.0 ? eta : g.eta;
    const std::vector<Field2> jet = build_jet(dom, gas, g, phi0, phi1, 3);

    NonlinearResult res;
    res.phi_tilde = Field3(g);
    IterationTrace& tr = res.trace;
    double prev = -1.0;
    for (int m = 0; m < m_max; ++m) {
        const LinearIBVP p = assemble_frozen(dom, gas, g, jet, res.phi_tilde);
        SolveResult sr = solve(p, g);
        Field3 v(g);
        for (int n = 0; n < g.levels; ++n)
            for (int i = 0; i <= g.n1; ++i)
                for (int j = 0; j <= g.n2; ++j)
                    v.lv[n].at(i, j) = sr.u.lv[n].at(i, j) - res.phi_tilde.lv[n].at(i, j);
        IterationRow row;
        row.v_h1 = weighted_hs_norm(v, g, et, 1);
        row.high_norm = weighted_hs_norm(sr.u, g, et, 4);
        row.ratio = (m > 0 && prev > 0.0) ? row.v_h1 / prev : 0.0;
        tr.rows.push_back(row);
        res.phi_tilde = std::move(sr.u);
        if (row.v_h1 <= tol_h1) {
            tr.converged = true;
            break;
        }
        prev = row.v_h1;
    }
    if (!tr.converged && tr.rows.back().ratio >= 1.0)
        throw NonConvergence(detail::format_trace(tr));

    res.phi_hat = res.phi_tilde;
    for (int n = 0; n < g.levels; ++n) {
        const Field2 ps = taylor_psi(jet, g.t(n), 0);
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) res.phi_hat.lv[n].at(i, j) += ps.at(i, j);
    }
    return res;
}

// Geometric-mean ratio of successive change norms; needs enough rows for the
// mean to say anything.  An exact zero change means the fixed point was hit.
inline double contraction_ratio(const IterationTrace& tr) {
    if (tr.rows.size() < 3)
        throw PreconditionViolated("contraction estimate needs at least three solves");
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t m = 1; m < tr.rows.size(); ++m) {
        const double a = tr.rows[m - 1].v_h1, b = tr.rows[m].v_h1;
        if (a <= 0.0 || b <= 0.0) return 0.0;
        acc += std::log(b / a);
        ++cnt;
    }
    return std::exp(acc / cnt);
}

// Every recorded iterate stayed inside the high-norm ball of radius delta0.
inline bool boundedness_check(const IterationTrace& tr, double delta0) {
    for (const IterationRow& r : tr.rows)
        if (!(r.high_norm <= delta0)) return false;
    return true;
}

// Pointwise residual of the quasilinear equation on a space-time field,
// measured with spatial stencils independent of the marching scheme
// (one-sided at walls, centered inside) over the centered-in-time levels
// 1..L-2.  The first and last levels carry no centered time information:
// one-sided second differences there resonate with the start-up kink of any
// three-level history, reporting O(dt) noise on histories that satisfy the
// scheme to roundoff.  The level-0 equation is the order-2 compatibility
// identity, which the jet construction enforces and check_compatibility
// measures.  Truncation-sized only when the field actually solves the
// equation.
inline double nonlinear_residual(const CornerDomain& dom, const GasState& gas, const Grid& g,
                                 const Field3& u) {
    if (u.levels() != g.levels || u.lv[0].n1() != g.n1 || u.lv[0].n2() != g.n2)
        throw ConfigError("field shape does not match grid");
    if (g.levels < 5) throw OrderUnavailable("residual check needs at least five time levels");
    const FrameGrid frames = build_frames(dom, g);
    const int L = g.levels;
    const double i2dt = 1.0 / (2.0 * g.dt), idt2 = 1.0 / (g.dt * g.dt);
    double worst = 0.0;
    for (int n = 1; n + 1 < L; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const Field2 &um = u.lv[n - 1], &up = u.lv[n + 1];
                const double d0 = (up.at(i, j) - um.at(i, j)) * i2dt;
                const double d00 =
                    ((up.at(i, j) + um.at(i, j)) - 2.0 * u.lv[n].at(i, j)) * idt2;
                const double d01 = (d1_at(up, i, j, 1, g.h) - d1_at(um, i, j, 1, g.h)) * i2dt;
                const double d02 = (d1_at(up, i, j, 2, g.h) - d1_at(um, i, j, 2, g.h)) * i2dt;
                const Field2& s = u.lv[n];
                const double s1 = d1_at(s, i, j, 1, g.h), s2 = d1_at(s, i, j, 2, g.h);
                const AlphaSet al = alpha_coeffs(gas, frames.at(i, j), {d0, s1, s2});
                const double r = al.second.m[0][0] * d00 +
                                 2.0 * (al.second.m[0][1] * d01 + al.second.m[0][2] * d02) +
                                 al.second.m[1][1] * d2_at(s, i, j, 1, g.h) +
                                 2.0 * al.second.m[1][2] * d12_at(s, i, j, g.h) +
                                 al.second.m[2][2] * d2_at(s, i, j, 2, g.h) +
                                 al.lower[1] * s1 + al.lower[2] * s2;
                worst = std::max(worst, std::fabs(r));
            }
    return worst;
}

// Largest corner gradient across the stored levels, one-sided stencils; a
// solution respecting the corner's static state keeps this at leak level
// whenever the data's influence cone stays clear of the origin.
inline double corner_gradient_max(const Field3& u, const Grid& g) {
    double worst = 0.0;
    for (const Field2& s : u.lv)
        worst = std::max(worst, std::hypot(d1_at(s, 0, 0, 1, g.h), d1_at(s, 0, 0, 2, g.h)));
    return worst;
}

}  // namespace cornerflow
