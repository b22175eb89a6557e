#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cornerflow/errors.hpp"

namespace cornerflow {

// Uniform space-time grid over [0,Z1] x [z2_origin, z2_origin + n2*h] with
// isotropic spacing h and time step dt.  z2_origin is 0 for quarter-plane
// problems and -Z2 for problems extended evenly/oddly across {z2 = 0}.
struct Grid {
    int n1 = 0;              // intervals along z1 (nodes 0..n1)
    int n2 = 0;              // intervals along z2
    double h = 0.0;          // spatial spacing
    double dt = 0.0;         // time step
    int levels = 0;          // number of stored time levels (T = (levels-1)*dt)
    double z2_origin = 0.0;  // z2 coordinate of node j = 0
    double eta = 4.0;        // default weight for post-processed norms

    double z1(int i) const { return i * h; }
    double z2(int j) const { return z2_origin + j * h; }
    double t(int n) const { return n * dt; }
    double extent1() const { return n1 * h; }
    double t_final() const { return (levels - 1) * dt; }
    bool extended() const { return z2_origin < 0.0; }
    // Node index sitting on the symmetry axis z2 = 0 (extended grids only).
    int axis_j() const { return static_cast<int>(std::lround(-z2_origin / h)); }
};

// Node-centered scalar field with a one-node ghost ring on every side.
// Logical indices run 0..n1 x 0..n2; ghosts live at -1 and n+1 and are only
// meaningful inside the time stepper, which fills them from the boundary
// conditions before each application of the stencil.
class Field2 {
  public:
    Field2() = default;
    Field2(int n1, int n2) : n1_(n1), n2_(n2), stride_(n2 + 3), d_((n1 + 3) * (n2 + 3), 0.0) {}

    int n1() const { return n1_; }
    int n2() const { return n2_; }

    double& at(int i, int j) { return d_[(i + 1) * stride_ + (j + 1)]; }
    double at(int i, int j) const { return d_[(i + 1) * stride_ + (j + 1)]; }

    void fill(double v) { d_.assign(d_.size(), v); }

    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i <= n1_; ++i)
            for (int j = 0; j <= n2_; ++j) m = std::max(m, std::fabs(at(i, j)));
        return m;
    }

    bool same_shape(const Field2& o) const { return n1_ == o.n1_ && n2_ == o.n2_; }

  private:
    int n1_ = 0, n2_ = 0, stride_ = 1;
    std::vector<double> d_;
};

// Space-time field: one spatial slice per stored time level.
struct Field3 {
    std::vector<Field2> lv;

    Field3() = default;
    Field3(const Grid& g) : lv(g.levels, Field2(g.n1, g.n2)) {}

    int levels() const { return static_cast<int>(lv.size()); }
    double max_abs() const {
        double m = 0.0;
        for (const auto& f : lv) m = std::max(m, f.max_abs());
        return m;
    }
};

// ---------------------------------------------------------------------------
// Second-order difference stencils on the logical region.  Interior nodes use
// centered differences; edge nodes fall back to one-sided stencils of the
// same order rather than shrinking the domain.

namespace stencil {

// First derivative of a sampled line {f(k*h)} at index k, n = last index.
template <class F>
double d1_line(F&& f, int k, int n, double h) {
    if (k > 0 && k < n) return (f(k + 1) - f(k - 1)) / (2.0 * h);
    if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    return (3.0 * f(n) - 4.0 * f(n - 1) + f(n - 2)) / (2.0 * h);
}

// Second derivative, second-order accurate including the one-sided ends.
template <class F>
double d2_line(F&& f, int k, int n, double h) {
    if (k > 0 && k < n) return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (h * h);
    if (k == 0) return (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (h * h);
    return (2.0 * f(n) - 5.0 * f(n - 1) + 4.0 * f(n - 2) - f(n - 3)) / (h * h);
}

// Fourth-order pointwise stencils used by the identity checks, which sample a
// smooth candidate at arbitrary offsets.  `eval` maps a real offset (in units
// of h, relative to the expansion point) to a function value; `onesided`
// restricts sampling to nonnegative offsets.
template <class F>
double d1_order4(F&& eval, double h, bool onesided) {
    if (!onesided)
        return (-eval(2.0) + 8.0 * eval(1.0) - 8.0 * eval(-1.0) + eval(-2.0)) / (12.0 * h);
    return (-25.0 * eval(0.0) + 48.0 * eval(1.0) - 36.0 * eval(2.0) + 16.0 * eval(3.0) -
            3.0 * eval(4.0)) /
           (12.0 * h);
}

template <class F>
double d2_order4(F&& eval, double h, bool onesided) {
    if (!onesided)
        return (-eval(2.0) + 16.0 * eval(1.0) - 30.0 * eval(0.0) + 16.0 * eval(-1.0) -
                eval(-2.0)) /
               (12.0 * h * h);
    return (45.0 * eval(0.0) - 154.0 * eval(1.0) + 214.0 * eval(2.0) - 156.0 * eval(3.0) +
            61.0 * eval(4.0) - 10.0 * eval(5.0)) /
           (12.0 * h * h);
}

}  // namespace stencil

// Spatial first derivative of a slice at a logical node (axis 1 or 2).
inline double d1_at(const Field2& f, int i, int j, int axis, double h) {
    if (axis == 1)
        return stencil::d1_line([&](int k) { return f.at(k, j); }, i, f.n1(), h);
    return stencil::d1_line([&](int k) { return f.at(i, k); }, j, f.n2(), h);
}

inline double d2_at(const Field2& f, int i, int j, int axis, double h) {
    if (axis == 1)
        return stencil::d2_line([&](int k) { return f.at(k, j); }, i, f.n1(), h);
    return stencil::d2_line([&](int k) { return f.at(i, k); }, j, f.n2(), h);
}

inline double d12_at(const Field2& f, int i, int j, double h) {
    return stencil::d1_line(
        [&](int k) { return d1_at(f, k, j, 2, h); }, i, f.n1(), h);
}

// First derivative of a space-time field along axis (0 = time, 1, 2),
// second-order accurate, one-sided at the ends of each line.
inline Field3 field3_d1(const Field3& u, const Grid& g, int axis) {
    Field3 out;
    out.lv.assign(u.lv.size(), Field2(u.lv[0].n1(), u.lv[0].n2()));
    const int L = u.levels();
    const int n1 = u.lv[0].n1(), n2 = u.lv[0].n2();
    for (int n = 0; n < L; ++n)
        for (int i = 0; i <= n1; ++i)
            for (int j = 0; j <= n2; ++j) {
                double v;
                if (axis == 0)
                    v = stencil::d1_line([&](int k) { return u.lv[k].at(i, j); }, n, L - 1, g.dt);
                else
                    v = d1_at(u.lv[n], i, j, axis, g.h);
                out.lv[n].at(i, j) = v;
            }
    return out;
}

// ---------------------------------------------------------------------------
// Trapezoidal quadrature weights on the logical region.

inline double trap_w(int k, int n) { return (k == 0 || k == n) ? 0.5 : 1.0; }

// Discrete space-time L2 norm squared with weight exp(-2 eta z0).
inline double weighted_l2sq(const Field3& u, const Grid& g, double eta) {
    double acc = 0.0;
    const int L = u.levels();
    for (int n = 0; n < L; ++n) {
        const double wt = trap_w(n, L - 1) * std::exp(-2.0 * eta * g.t(n));
        double sl = 0.0;
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double v = u.lv[n].at(i, j);
                sl += trap_w(i, g.n1) * trap_w(j, g.n2) * v * v;
            }
        acc += wt * sl;
    }
    return acc * g.h * g.h * g.dt;
}

// Spatial L2 norm squared of one slice.
inline double slice_l2sq(const Field2& f, const Grid& g) {
    double sl = 0.0;
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) {
            const double v = f.at(i, j);
            sl += trap_w(i, g.n1) * trap_w(j, g.n2) * v * v;
        }
    return sl * g.h * g.h;
}

}  // namespace cornerflow
