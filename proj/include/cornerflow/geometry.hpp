#pragma once

#include <cmath>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/field.hpp"
#include "cornerflow/types.hpp"
#include "cornerflow/wall_profile.hpp"

namespace cornerflow {

// Corner domain bounded by two perturbed walls:
//   wall1: x1 = W1(x2) (near-vertical), wall2: x2 = W2(x1) (near-horizontal).
struct CornerDomain {
    WallProfile wall1;
    WallProfile wall2;

    static CornerDomain flat() { return {WallProfile::flat(), WallProfile::flat()}; }
    bool is_flat() const { return wall1.is_flat() && wall2.is_flat(); }
};

namespace detail {

// Adaptive Gauss-Kronrod (7,15) quadrature.  Fixed node tables, interval
// bisection until the embedded error estimate is below tol.
struct GK {
    double integral;
    double error;
};

inline GK gk15_pair(const WallProfile& w, double a, double b) {
    static const double xgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                                  0.741531185599394, 0.586087235467691, 0.405845151377397,
                                  0.207784955007898, 0.0};
    static const double wgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                                  0.140653259715525, 0.169004726639267, 0.190350578064785,
                                  0.204432940075298, 0.209482141084728};
    static const double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                 0.417959183673469};
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    auto f = [&](double s) {
        const double d = w.eval(s, 1);
        return d * d;
    };
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double fv = (i < 7) ? f(c - r * xgk[i]) + f(c + r * xgk[i]) : f(c);
        k += wgk[i] * fv;
        if (i % 2 == 1) g += wg[i / 2] * fv;
    }
    return {r * k, std::fabs(r * (k - g))};
}

inline double adaptive_quad(const WallProfile& w, double a, double b, double tol) {
    struct Seg {
        double a, b;
    };
    std::vector<Seg> stack{{a, b}};
    double total = 0.0;
    int splits = 0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        GK q = gk15_pair(w, s.a, s.b);
        if (q.error <= tol * std::max(1.0, std::fabs(s.b - s.a) / std::fabs(b - a + 1e-300)) ||
            splits > 2000) {
            total += q.integral;
        } else {
            const double m = 0.5 * (s.a + s.b);
            stack.push_back({s.a, m});
            stack.push_back({m, s.b});
            ++splits;
        }
    }
    return total;
}

}  // namespace detail

// Integral term of the vertical straightening map: I(x1) = int_0^x1 W2'(t)^2 dt.
inline double wall_integral(const WallProfile& w2, double upper, double tol = 1e-13) {
    if (w2.is_flat() || upper == 0.0) return 0.0;
    return detail::adaptive_quad(w2, 0.0, upper, tol);
}

// ---------------------------------------------------------------------------
// T1: straighten the near-horizontal wall {x2 = W2(x1)} to {y2 = 0}
//   y1 = -x1 - I(x1) - (x2 - W2(x1)) W2'(x1),   y2 = x2 - W2(x1).

inline Vec2 t1_forward(const CornerDomain& dom, const Vec2& x) {
    const WallProfile& w2 = dom.wall2;
    if (w2.is_flat()) return {-x[0], x[1]};
    const double wp = w2.eval(x[0], 1);
    const double y2 = x[1] - w2.eval(x[0], 0);
    const double y1 = -x[0] - wall_integral(w2, x[0]) - y2 * wp;
    return {y1, y2};
}

// Inverse of T1 by Newton iteration on
//   g(u) = -u - I(u) - y2 W2'(u) - y1  (u is the preimage x1; x2 = y2 + W2(u)).
// g'(u) = -1 - W2'(u)^2 - y2 W2''(u) stays near -1 for admissible walls; the
// iteration aborts if |g'| dips below 1/2 (the map is no longer safely
// invertible) or if 50 iterations fail to reach |g| <= 1e-12.
inline Vec2 t1_inverse(const CornerDomain& dom, const Vec2& y) {
    const WallProfile& w2 = dom.wall2;
    if (w2.is_flat()) return {-y[0], y[1]};
    const double tol = 1e-12;
    double u = -y[0];
    for (int it = 0; it < 50; ++it) {
        const double g = -u - wall_integral(w2, u) - y[1] * w2.eval(u, 1) - y[0];
        if (std::fabs(g) <= tol) return {u, y[1] + w2.eval(u, 0)};
        const double gp = -1.0 - w2.eval(u, 1) * w2.eval(u, 1) - y[1] * w2.eval(u, 2);
        if (std::fabs(gp) < 0.5)
            throw NonConvergence("t1_inverse: |g'| < 1/2, wall perturbation too large");
        u -= g / gp;
    }
    throw NonConvergence("t1_inverse: Newton did not reach tolerance in 50 iterations");
}

// ---------------------------------------------------------------------------
// T2: straighten the image of the near-vertical wall {x1 = W1(x2)} to {z1 = 0}
// via z1 = -y1 + sigma(y2), z2 = y2, where y1 = sigma(y2) is the image curve:
//   F(y1; y2) = x1(y1,y2) - W1(x2(y1,y2)) = 0.

inline double sigma(const CornerDomain& dom, double y2) {
    if (dom.wall1.is_flat()) return 0.0;  // W2'(0)=0 keeps the image at y1 = 0
    const double tol = 1e-12;
    double y1 = 0.0;
    for (int it = 0; it < 50; ++it) {
        const Vec2 x = t1_inverse(dom, {y1, y2});
        const double F = x[0] - dom.wall1.eval(x[1], 0);
        if (std::fabs(F) <= tol) return y1;
        const double w2p = dom.wall2.eval(x[0], 1);
        const double w2pp = dom.wall2.eval(x[0], 2);
        const double gp = -1.0 - w2p * w2p - y2 * w2pp;  // du/dy1 = 1/g'
        const double Fp = (1.0 - dom.wall1.eval(x[1], 1) * w2p) / gp;
        if (std::fabs(Fp) < 0.25)
            throw NonConvergence("sigma: boundary curve solve lost its slope margin");
        y1 -= F / Fp;
    }
    throw NonConvergence("sigma: Newton did not reach tolerance in 50 iterations");
}

// Closed-form slope of the straightened boundary curve,
//   sigma'(y2) = (p W1' - W2') / (1 - W1' W2'),  p = -1 - y2 W2''(x1),
// with the wall derivatives taken at the preimage of (sigma(y2), y2).
inline double sigma_prime(const CornerDomain& dom, double y2) {
    if (dom.wall1.is_flat()) return 0.0;
    const Vec2 x = t1_inverse(dom, {sigma(dom, y2), y2});
    const double w1p = dom.wall1.eval(x[1], 1);
    const double w2p = dom.wall2.eval(x[0], 1);
    const double p = -1.0 - y2 * dom.wall2.eval(x[0], 2);
    return (p * w1p - w2p) / (1.0 - w1p * w2p);
}

// ---------------------------------------------------------------------------
// Composite corner-straightening map and its pointwise data.

inline Vec2 to_z(const CornerDomain& dom, const Vec2& x) {
    const Vec2 y = t1_forward(dom, x);
    return {-y[0] + sigma(dom, y[1]), y[1]};
}

inline Vec2 from_z(const CornerDomain& dom, const Vec2& z) {
    return t1_inverse(dom, {sigma(dom, z[1]) - z[0], z[1]});
}

// Forward map evaluation bundle: images and the spatial Jacobian dz/dx
// (the time row of the full Jacobian is trivial).
struct MapPoint {
    Vec2 x, y, z;
    double jac[2][2];  // jac[k][i] = dz_k / dx_i
    double det;
};

inline MapPoint map_point(const CornerDomain& dom, const Vec2& x) {
    MapPoint mp;
    mp.x = x;
    mp.y = t1_forward(dom, x);
    const double sg = sigma(dom, mp.y[1]);
    const double sgp = sigma_prime(dom, mp.y[1]);
    mp.z = {-mp.y[0] + sg, mp.y[1]};
    const double w2p = dom.wall2.eval(x[0], 1);
    const double w2pp = dom.wall2.eval(x[0], 2);
    const double p = -1.0 - mp.y[1] * w2pp;  // x2 - W2(x1) = y2
    // dz/dx = [[-1, sigma'],[0,1]] * [[p, -W2'],[-W2', 1]]
    mp.jac[0][0] = -p - sgp * w2p;
    mp.jac[0][1] = w2p + sgp;
    mp.jac[1][0] = -w2p;
    mp.jac[1][1] = 1.0;
    mp.det = mp.jac[0][0] * mp.jac[1][1] - mp.jac[0][1] * mp.jac[1][0];
    return mp;
}

// Everything the coefficient algebra needs at one z-grid node: the preimage,
// the wall derivatives there, and the straightening data.  Built once per
// (domain, grid) pair; all solves behind it are Newton with analytic slopes.
struct GeomFrame {
    double z1 = 0.0, z2 = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double w1p = 0.0;                           // W1'(x2)
    double w2p = 0.0, w2pp = 0.0, w2ppp = 0.0;  // W2 derivatives at x1
    double sigma_p = 0.0;                       // sigma'(z2)
    double p = -1.0;                            // -1 - z2 W2''(x1)
};

inline GeomFrame frame_at(const CornerDomain& dom, const Vec2& z, double sig, double sigp) {
    GeomFrame fr;
    fr.z1 = z[0];
    fr.z2 = z[1];
    const Vec2 x = t1_inverse(dom, {sig - z[0], z[1]});
    fr.x1 = x[0];
    fr.x2 = x[1];
    fr.w1p = dom.wall1.eval(x[1], 1);
    fr.w2p = dom.wall2.eval(x[0], 1);
    fr.w2pp = dom.wall2.eval(x[0], 2);
    fr.w2ppp = dom.wall2.eval(x[0], 3);
    fr.sigma_p = sigp;
    fr.p = -1.0 - z[1] * fr.w2pp;
    return fr;
}

inline GeomFrame frame_at(const CornerDomain& dom, const Vec2& z) {
    return frame_at(dom, z, sigma(dom, z[1]), sigma_prime(dom, z[1]));
}

// Frames for every node of a spatial grid (z2 may start below 0 on extended
// grids; the straightening data is evaluated wherever the grid asks).
struct FrameGrid {
    Grid g;
    std::vector<GeomFrame> f;

    const GeomFrame& at(int i, int j) const { return f[i * (g.n2 + 1) + j]; }
};

inline FrameGrid build_frames(const CornerDomain& dom, const Grid& g) {
    FrameGrid fg;
    fg.g = g;
    fg.f.resize((g.n1 + 1) * (g.n2 + 1));
    for (int j = 0; j <= g.n2; ++j) {
        const double z2 = g.z2(j);
        const double sig = sigma(dom, z2);
        const double sigp = sigma_prime(dom, z2);
        for (int i = 0; i <= g.n1; ++i)
            fg.f[i * (g.n2 + 1) + j] = frame_at(dom, {g.z1(i), z2}, sig, sigp);
    }
    return fg;
}

}  // namespace cornerflow
