#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/extension.hpp"
#include "cornerflow/field.hpp"

namespace cornerflow {

// A coefficient of the evolution operator: constant, frozen in time, or given
// per stored time level (one slab per level, e.g. refrozen around an iterate).
struct CoeffField {
    enum class Kind { Constant, Static, TimeVarying };
    Kind kind = Kind::Constant;
    double c = 0.0;
    Field2 s;
    std::shared_ptr<const std::vector<Field2>> tv;

    static CoeffField constant(double v) {
        CoeffField r;
        r.c = v;
        return r;
    }
    static CoeffField of(Field2 f) {
        CoeffField r;
        r.kind = Kind::Static;
        r.s = std::move(f);
        return r;
    }
    static CoeffField history(std::vector<Field2> slabs) {
        CoeffField r;
        r.kind = Kind::TimeVarying;
        r.tv = std::make_shared<const std::vector<Field2>>(std::move(slabs));
        return r;
    }

    double at(int n, int i, int j) const {
        if (kind == Kind::Constant) return c;
        if (kind == Kind::Static) return s.at(i, j);
        return (*tv)[static_cast<std::size_t>(n)].at(i, j);
    }
    bool zero() const { return kind == Kind::Constant && c == 0.0; }
};

// Linear initial-boundary value problem on the straightened quarter plane
// (or its even extension across {z2 = 0}):
//
//   d00 u + 2 r01 d01 u + 2 r02 d02 u + r11 d11 u + 2 r12 d12 u + r22 d22 u
//        + r0 d0 u + r1 d1 u + r2 d2 u = f
//
//   b1 d1 u + b2 d2 u = 0   on {z1 = 0}
//   d2 u = 0                on {z2 = 0}   (quarter-plane grids)
//
// with mirror closures on the outer edges, valid while the data's domain of
// influence stays clear of them.  The spatial block (r11 r12 / r12 r22) must
// stay negative definite; b1 must stay strictly negative.
struct LinearIBVP {
    CoeffField r01, r02;                    // time-space couplings
    CoeffField r11 = CoeffField::constant(-1.0);
    CoeffField r12;
    CoeffField r22 = CoeffField::constant(-1.0);
    CoeffField r0, r1, r2;                  // first-order terms
    CoeffField f;                           // forcing, sampled at the current level
    Field2 phi0, phi1;                      // initial position and velocity
    std::vector<double> b1, b2;             // oblique trace on {z1 = 0}, per j node
    double rbar11 = -1.0, rbar22 = -1.0;    // background spatial diagonal
    double delta = 0.05;                    // uniform ellipticity/obliqueness margin
    double s0 = 0.0;                        // background state size (bookkeeping)
};

struct AssumptionReport {
    double cmax = 0.0;        // largest spatial characteristic speed seen
    double min_m1 = 0.0;      // min of -r11 over all sampled nodes
    double min_det = 0.0;     // min of r11 r22 - r12^2
    double max_coupling = 0.0;  // max of |r01| + |r02|
    double cfl = 0.0;         // dt * cmax * sqrt(2) / h
};

namespace detail {

inline void require_shape(const CoeffField& cf, const Grid& g, const char* name) {
    if (cf.kind == CoeffField::Kind::Static) {
        if (cf.s.n1() != g.n1 || cf.s.n2() != g.n2)
            throw ConfigError(std::string(name) + ": static slab shape does not match grid");
    } else if (cf.kind == CoeffField::Kind::TimeVarying) {
        if (static_cast<int>(cf.tv->size()) != g.levels)
            throw ConfigError(std::string(name) + ": level count does not match grid");
        for (const Field2& s : *cf.tv)
            if (s.n1() != g.n1 || s.n2() != g.n2)
                throw ConfigError(std::string(name) + ": slab shape does not match grid");
    }
}

// Number of distinct time samples needed to scan a coefficient completely.
inline int scan_levels(const CoeffField& cf, const Grid& g) {
    return cf.kind == CoeffField::Kind::TimeVarying ? g.levels : 1;
}

}  // namespace detail

// Checks the structural assumptions the scheme and the energy machinery rely
// on; throws on violation, returns the measured margins otherwise.
inline AssumptionReport validate_assumptions(const LinearIBVP& p, const Grid& g) {
    if (g.n1 < 4 || g.n2 < 4 || g.levels < 3 || g.h <= 0.0 || g.dt <= 0.0)
        throw ConfigError("grid too small or degenerate");
    if (p.phi0.n1() != g.n1 || p.phi0.n2() != g.n2 || !p.phi0.same_shape(p.phi1))
        throw ConfigError("initial data shape does not match grid");
    if (static_cast<int>(p.b1.size()) != g.n2 + 1 || p.b1.size() != p.b2.size())
        throw ConfigError("boundary traces must have one entry per z2 node");
    detail::require_shape(p.r01, g, "r01");
    detail::require_shape(p.r02, g, "r02");
    detail::require_shape(p.r11, g, "r11");
    detail::require_shape(p.r12, g, "r12");
    detail::require_shape(p.r22, g, "r22");
    detail::require_shape(p.r0, g, "r0");
    detail::require_shape(p.r1, g, "r1");
    detail::require_shape(p.r2, g, "r2");
    detail::require_shape(p.f, g, "f");
    for (double b : p.b1)
        if (!(b < 0.0)) throw PreconditionViolated("wall-1 coefficient b1 must stay negative");

    AssumptionReport rep;
    rep.min_m1 = 1e300;
    rep.min_det = 1e300;
    const int ns = std::max({detail::scan_levels(p.r11, g), detail::scan_levels(p.r12, g),
                             detail::scan_levels(p.r22, g), detail::scan_levels(p.r01, g),
                             detail::scan_levels(p.r02, g)});
    for (int n = 0; n < ns; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double s11 = -p.r11.at(n, i, j), s22 = -p.r22.at(n, i, j);
                const double s12 = -p.r12.at(n, i, j);
                const double det = s11 * s22 - s12 * s12;
                rep.min_m1 = std::min(rep.min_m1, s11);
                rep.min_det = std::min(rep.min_det, det);
                const double disc = std::sqrt((s11 - s22) * (s11 - s22) + 4.0 * s12 * s12);
                rep.cmax = std::max(rep.cmax, std::sqrt(0.5 * (s11 + s22 + disc)));
                rep.max_coupling = std::max(
                    rep.max_coupling,
                    std::fabs(p.r01.at(n, i, j)) + std::fabs(p.r02.at(n, i, j)));
            }
    if (rep.min_m1 <= 0.0 || rep.min_det <= 0.0)
        throw NotHyperbolic("spatial coefficient block lost negative definiteness");
    rep.cfl = g.dt * rep.cmax * std::sqrt(2.0) / g.h;
    if (rep.cfl > 1.0) throw CFLViolation("dt too large for the spatial characteristic speed");
    if (g.dt / g.h * rep.max_coupling > 0.5)
        throw CFLViolation("time-space coupling too strong for the update sweep");
    return rep;
}

// Ghost fill from the boundary conditions.  Mirrors first across both z2
// edges (wall 2 and the outer edge share the reflection formula) and the
// outer z1 edge, then the oblique ghost on {z1 = 0}, then the ghost corners.
// Every expression is grouped so an even-extended field stays mirror-exact
// in floating point.
inline void fill_ghosts(Field2& u, const std::vector<double>& b1, const std::vector<double>& b2,
                        double h) {
    const int n1 = u.n1(), n2 = u.n2();
    for (int i = 0; i <= n1; ++i) {
        u.at(i, -1) = u.at(i, 1);
        u.at(i, n2 + 1) = u.at(i, n2 - 1);
    }
    for (int j = 0; j <= n2; ++j) {
        u.at(n1 + 1, j) = u.at(n1 - 1, j);
        const double d2 = (u.at(0, j + 1) - u.at(0, j - 1)) / (2.0 * h);
        u.at(-1, j) = u.at(1, j) + 2.0 * h * (b2[j] / b1[j]) * d2;
    }
    u.at(-1, -1) = u.at(-1, 1);
    u.at(-1, n2 + 1) = u.at(-1, n2 - 1);
    u.at(n1 + 1, -1) = u.at(n1 + 1, 1);
    u.at(n1 + 1, n2 + 1) = u.at(n1 + 1, n2 - 1);
}

namespace detail {

// Spatial part of the operator at a node, all groupings mirror-safe.
struct SpatialOp {
    const LinearIBVP* p;
    double ih2, i2h, i4h2;
    SpatialOp(const LinearIBVP& prob, double h)
        : p(&prob), ih2(1.0 / (h * h)), i2h(1.0 / (2.0 * h)), i4h2(1.0 / (4.0 * h * h)) {}

    double apply(const Field2& u, int n, int i, int j) const {
        const double pc = u.at(i, j);
        const double pe = u.at(i + 1, j), pw = u.at(i - 1, j);
        const double pn = u.at(i, j + 1), ps = u.at(i, j - 1);
        const double d11 = ((pe + pw) - 2.0 * pc) * ih2;
        const double d22 = ((pn + ps) - 2.0 * pc) * ih2;
        const double d12 =
            ((u.at(i + 1, j + 1) - u.at(i + 1, j - 1)) - (u.at(i - 1, j + 1) - u.at(i - 1, j - 1))) *
            i4h2;
        const double d1 = (pe - pw) * i2h;
        const double d2 = (pn - ps) * i2h;
        return p->r11.at(n, i, j) * d11 + 2.0 * p->r12.at(n, i, j) * d12 +
               p->r22.at(n, i, j) * d22 + p->r1.at(n, i, j) * d1 + p->r2.at(n, i, j) * d2;
    }
};

}  // namespace detail

struct StepStats {
    std::vector<double> amp;  // max-abs per level
    int sweeps_max = 0;       // worst fixed-point sweep count over all steps
};

// Runs the three-level scheme, handing each completed level (ghosts filled)
// to `sink(n, slice)`.  The update solves the centered-in-time equation
//
//   (v - 2 u^n + u^{n-1})/dt^2 + 2 r0j (Dj v - Dj u^{n-1})/(2 dt)
//     + r0 (v - u^{n-1})/(2 dt) + rij Dij u^n + ri Di u^n = f^n
//
// for v = u^{n+1} by fixed-point sweeps on the v-dependent terms; the sweep
// contracts with factor ~ dt/h * |r0j|, which validate_assumptions bounds.
template <class Sink>
StepStats run_scheme(const LinearIBVP& p, const Grid& g, Sink&& sink) {
    validate_assumptions(p, g);
    const double dt = g.dt, h = g.h;
    const detail::SpatialOp op(p, h);
    const bool coupled = !(p.r01.zero() && p.r02.zero() && p.r0.zero());
    const double i2h = 1.0 / (2.0 * h);

    double scale0 = std::max(p.phi0.max_abs(), p.phi1.max_abs());
    scale0 = std::max(scale0, p.f.kind == CoeffField::Kind::Constant
                                  ? std::fabs(p.f.c)
                                  : (p.f.kind == CoeffField::Kind::Static
                                         ? p.f.s.max_abs()
                                         : (*p.f.tv)[0].max_abs()));
    const double blow_up = 1e12 * (1.0 + scale0);

    StepStats st;
    st.amp.reserve(g.levels);

    Field2 ua = p.phi0;  // level n-1
    fill_ghosts(ua, p.b1, p.b2, h);
    st.amp.push_back(ua.max_abs());
    sink(0, static_cast<const Field2&>(ua));
    if (g.levels == 1) return st;

    // level 1 by a second-order Taylor start with the discrete operator
    Field2 v1 = p.phi1;
    fill_ghosts(v1, p.b1, p.b2, h);
    Field2 ub(g.n1, g.n2);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) {
            const double dj1 = (v1.at(i + 1, j) - v1.at(i - 1, j)) * i2h;
            const double dj2 = (v1.at(i, j + 1) - v1.at(i, j - 1)) * i2h;
            const double utt = p.f.at(0, i, j) - op.apply(ua, 0, i, j) -
                               2.0 * (p.r01.at(0, i, j) * dj1 + p.r02.at(0, i, j) * dj2) -
                               p.r0.at(0, i, j) * v1.at(i, j);
            ub.at(i, j) = ua.at(i, j) + dt * v1.at(i, j) + 0.5 * dt * dt * utt;
        }
    fill_ghosts(ub, p.b1, p.b2, h);
    st.amp.push_back(ub.max_abs());
    sink(1, static_cast<const Field2&>(ub));

    Field2 ex(g.n1, g.n2), v(g.n1, g.n2), vn(g.n1, g.n2);
    for (int n = 1; n + 1 < g.levels; ++n) {
        // explicit part, independent of the new level
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                double e = 2.0 * ub.at(i, j) - ua.at(i, j) +
                           dt * dt * (p.f.at(n, i, j) - op.apply(ub, n, i, j));
                if (coupled) {
                    const double da1 = (ua.at(i + 1, j) - ua.at(i - 1, j)) * i2h;
                    const double da2 = (ua.at(i, j + 1) - ua.at(i, j - 1)) * i2h;
                    e += dt * (p.r01.at(n, i, j) * da1 + p.r02.at(n, i, j) * da2) +
                         0.5 * dt * p.r0.at(n, i, j) * ua.at(i, j);
                }
                ex.at(i, j) = e;
            }

        if (!coupled) {
            v = ex;
        } else {
            // predictor, then contraction sweeps on the new-level terms
            for (int i = 0; i <= g.n1; ++i)
                for (int j = 0; j <= g.n2; ++j)
                    v.at(i, j) = 2.0 * ub.at(i, j) - ua.at(i, j);
            const double tol = 1e-13 * (1.0 + st.amp[n]);
            for (int sweep = 1; sweep <= 8; ++sweep) {
                fill_ghosts(v, p.b1, p.b2, h);
                double change = 0.0;
                for (int i = 0; i <= g.n1; ++i)
                    for (int j = 0; j <= g.n2; ++j) {
                        const double dv1 = (v.at(i + 1, j) - v.at(i - 1, j)) * i2h;
                        const double dv2 = (v.at(i, j + 1) - v.at(i, j - 1)) * i2h;
                        const double w =
                            ex.at(i, j) -
                            dt * (p.r01.at(n, i, j) * dv1 + p.r02.at(n, i, j) * dv2) -
                            0.5 * dt * p.r0.at(n, i, j) * v.at(i, j);
                        change = std::max(change, std::fabs(w - v.at(i, j)));
                        vn.at(i, j) = w;
                    }
                std::swap(v, vn);
                st.sweeps_max = std::max(st.sweeps_max, sweep);
                if (change <= tol) break;
            }
        }

        fill_ghosts(v, p.b1, p.b2, h);
        const double amp = v.max_abs();
        if (!(amp < blow_up))
            throw InstabilityDetected("amplitude blew past the guard at level " +
                                      std::to_string(n + 1));
        st.amp.push_back(amp);
        sink(n + 1, static_cast<const Field2&>(v));
        std::swap(ua, ub);
        std::swap(ub, v);
    }
    return st;
}

struct SolveResult {
    Field3 u;
    StepStats stats;
};

inline SolveResult solve(const LinearIBVP& p, const Grid& g) {
    SolveResult r;
    r.u = Field3(g);
    r.stats = run_scheme(p, g, [&](int n, const Field2& s) { r.u.lv[n] = s; });
    return r;
}

struct FinalResult {
    Field2 u;
    StepStats stats;
};

// Same run, keeping only the final level (for grids too large to store).
inline FinalResult solve_final(const LinearIBVP& p, const Grid& g) {
    FinalResult r;
    r.stats = run_scheme(p, g, [&](int n, const Field2& s) {
        if (n + 1 == g.levels) r.u = s;
    });
    return r;
}

// Max-abs residual of the discrete equations over all interior levels; small
// only if the returned history actually satisfies the scheme (this catches
// under-converged sweeps, not truncation against the continuum).
inline double scheme_residual(const LinearIBVP& p, const Grid& g, const Field3& u) {
    const detail::SpatialOp op(p, g.h);
    const double i2h = 1.0 / (2.0 * g.h);
    double worst = 0.0;
    std::vector<Field2> gh(u.lv.begin(), u.lv.end());
    for (Field2& s : gh) fill_ghosts(s, p.b1, p.b2, g.h);
    for (int n = 1; n + 1 < g.levels; ++n)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const Field2 &um = gh[n - 1], &uc = gh[n], &up = gh[n + 1];
                const double dtt =
                    ((up.at(i, j) + um.at(i, j)) - 2.0 * uc.at(i, j)) / (g.dt * g.dt);
                const double d01 = ((up.at(i + 1, j) - up.at(i - 1, j)) -
                                    (um.at(i + 1, j) - um.at(i - 1, j))) *
                                   i2h / (2.0 * g.dt);
                const double d02 = ((up.at(i, j + 1) - up.at(i, j - 1)) -
                                    (um.at(i, j + 1) - um.at(i, j - 1))) *
                                   i2h / (2.0 * g.dt);
                const double d0 = (up.at(i, j) - um.at(i, j)) / (2.0 * g.dt);
                const double res = dtt + 2.0 * (p.r01.at(n, i, j) * d01 + p.r02.at(n, i, j) * d02) +
                                   p.r0.at(n, i, j) * d0 + op.apply(uc, n, i, j) -
                                   p.f.at(n, i, j);
                worst = std::max(worst, std::fabs(res));
            }
    return worst;
}

// Subtracts the data lift w = phi0 + z0 phi1 so the energy machinery sees a
// zero-data problem.  Requires data compatible with both boundary conditions
// (otherwise the lift leaks through the ghosts); forcing becomes per-level.
inline LinearIBVP homogenize(const LinearIBVP& p, const Grid& g, double tol = 1e-9) {
    validate_assumptions(p, g);
    const double scale = 1.0 + std::max(p.phi0.max_abs(), p.phi1.max_abs());
    for (const Field2* d : {&p.phi0, &p.phi1}) {
        for (int i = 0; i <= g.n1; ++i)
            if (std::fabs(d1_at(*d, i, 0, 2, g.h)) > tol * scale)
                throw PreconditionViolated("initial data violates the wall-2 condition");
        for (int j = 0; j <= g.n2; ++j) {
            const double r = p.b1[j] * d1_at(*d, 0, j, 1, g.h) + p.b2[j] * d1_at(*d, 0, j, 2, g.h);
            if (std::fabs(r) > tol * scale)
                throw PreconditionViolated("initial data violates the wall-1 condition");
        }
    }

    Field2 w0 = p.phi0, w1 = p.phi1;
    fill_ghosts(w0, p.b1, p.b2, g.h);
    fill_ghosts(w1, p.b1, p.b2, g.h);
    const detail::SpatialOp op(p, g.h);
    const double i2h = 1.0 / (2.0 * g.h);
    std::vector<Field2> slabs(g.levels, Field2(g.n1, g.n2));
    for (int n = 0; n < g.levels; ++n) {
        const double tn = g.t(n);
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double dj1 = (w1.at(i + 1, j) - w1.at(i - 1, j)) * i2h;
                const double dj2 = (w1.at(i, j + 1) - w1.at(i, j - 1)) * i2h;
                const double lw = 2.0 * (p.r01.at(n, i, j) * dj1 + p.r02.at(n, i, j) * dj2) +
                                  p.r0.at(n, i, j) * w1.at(i, j) + op.apply(w0, n, i, j) +
                                  tn * op.apply(w1, n, i, j);
                slabs[n].at(i, j) = p.f.at(n, i, j) - lw;
            }
    }
    LinearIBVP q = p;
    q.phi0.fill(0.0);
    q.phi1.fill(0.0);
    q.f = CoeffField::history(std::move(slabs));
    return q;
}

namespace detail {

inline CoeffField extend_coeff(const CoeffField& cf, Parity par, const char* name) {
    if (cf.kind == CoeffField::Kind::Constant) {
        if (par == Parity::Odd && cf.c != 0.0)
            throw ConfigError(std::string(name) + ": odd coefficient with nonzero constant value");
        return cf;
    }
    if (cf.kind == CoeffField::Kind::Static) return CoeffField::of(extend_field(cf.s, par));
    std::vector<Field2> slabs;
    slabs.reserve(cf.tv->size());
    for (const Field2& s : *cf.tv) slabs.push_back(extend_field(s, par));
    return CoeffField::history(std::move(slabs));
}

}  // namespace detail

// Reflects a quarter-plane problem evenly across {z2 = 0}: coefficients and
// data extend with the parity dictated by their z2 index count, the wall-2
// condition becomes the interior symmetry of the extended solution.
inline std::pair<LinearIBVP, Grid> extend_problem(const LinearIBVP& p, const Grid& g) {
    Grid ge = g;
    ge.n2 = 2 * g.n2;
    ge.z2_origin = -g.n2 * g.h;
    LinearIBVP q;
    q.r01 = detail::extend_coeff(p.r01, Parity::Even, "r01");
    q.r02 = detail::extend_coeff(p.r02, Parity::Odd, "r02");
    q.r11 = detail::extend_coeff(p.r11, Parity::Even, "r11");
    q.r12 = detail::extend_coeff(p.r12, Parity::Odd, "r12");
    q.r22 = detail::extend_coeff(p.r22, Parity::Even, "r22");
    q.r0 = detail::extend_coeff(p.r0, Parity::Even, "r0");
    q.r1 = detail::extend_coeff(p.r1, Parity::Even, "r1");
    q.r2 = detail::extend_coeff(p.r2, Parity::Odd, "r2");
    q.f = detail::extend_coeff(p.f, Parity::Even, "f");
    q.phi0 = extend_field(p.phi0, Parity::Even);
    q.phi1 = extend_field(p.phi1, Parity::Even);
    q.b1 = extend_trace(p.b1, Parity::Even);
    q.b2 = extend_trace(p.b2, Parity::Odd);
    q.rbar11 = p.rbar11;
    q.rbar22 = p.rbar22;
    q.delta = p.delta;
    q.s0 = p.s0;
    return {std::move(q), ge};
}

}  // namespace cornerflow
