#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/field.hpp"

namespace cornerflow {

enum class Parity { Even, Odd };

// Parity assigned to a coefficient index pair under reflection across
// {z2 = 0}: entries with exactly one z2 index flip sign.
inline Parity pair_parity(int i, int j) {
    const int twos = (i == 2 ? 1 : 0) + (j == 2 ? 1 : 0);
    return (twos == 1) ? Parity::Odd : Parity::Even;
}

// ---------------------------------------------------------------------------
// Reflection across the axis {z2 = 0}.  Input fields sample the quarter
// plane at j = 0..n2 (z2 = j h >= 0); the output spans j = 0..2 n2 with the
// axis at index n2, so mirror indices are exact grid nodes.  For odd parity
// the axis row is pinned to exactly zero: the continuum identity requires the
// source to vanish there, and whatever tolerance-level residue the input
// carries is dropped (and available to the caller via the input itself).

inline Field2 extend_field(const Field2& q, Parity par) {
    const int n1 = q.n1(), n2 = q.n2();
    Field2 out(n1, 2 * n2);
    const double sgn = (par == Parity::Odd) ? -1.0 : 1.0;
    for (int i = 0; i <= n1; ++i) {
        out.at(i, n2) = (par == Parity::Odd) ? 0.0 : q.at(i, 0);
        for (int k = 1; k <= n2; ++k) {
            out.at(i, n2 + k) = q.at(i, k);
            out.at(i, n2 - k) = sgn * q.at(i, k);
        }
    }
    return out;
}

inline std::vector<double> extend_trace(const std::vector<double>& q, Parity par) {
    const int n = static_cast<int>(q.size()) - 1;
    std::vector<double> out(2 * n + 1, 0.0);
    const double sgn = (par == Parity::Odd) ? -1.0 : 1.0;
    out[n] = (par == Parity::Odd) ? 0.0 : q[0];
    for (int k = 1; k <= n; ++k) {
        out[n + k] = q[k];
        out[n - k] = sgn * q[k];
    }
    return out;
}

// Largest index-level parity violation of an extended field about its axis
// column (0 for fields produced by extend_field, by construction).
inline double parity_residual(const Field2& f, int axis_j, Parity par) {
    const double sgn = (par == Parity::Odd) ? -1.0 : 1.0;
    double worst = (par == Parity::Odd) ? std::fabs(f.at(0, axis_j)) : 0.0;
    const int reach = std::min(axis_j, f.n2() - axis_j);
    for (int i = 0; i <= f.n1(); ++i) {
        if (par == Parity::Odd) worst = std::max(worst, std::fabs(f.at(i, axis_j)));
        for (int k = 1; k <= reach; ++k)
            worst = std::max(worst, std::fabs(f.at(i, axis_j + k) - sgn * f.at(i, axis_j - k)));
    }
    return worst;
}

inline double parity_residual(const std::vector<double>& f, int axis, Parity par) {
    const double sgn = (par == Parity::Odd) ? -1.0 : 1.0;
    const int n = static_cast<int>(f.size()) - 1;
    double worst = (par == Parity::Odd) ? std::fabs(f[axis]) : 0.0;
    const int reach = std::min(axis, n - axis);
    for (int k = 1; k <= reach; ++k)
        worst = std::max(worst, std::fabs(f[axis + k] - sgn * f[axis - k]));
    return worst;
}

// ---------------------------------------------------------------------------
// Friedrichs mollifier in the z2 direction.  The bump exp(-1/(1-s^2)) is
// tabulated on the grid once per width and renormalized so the *discrete*
// mass is exactly one; the continuum normalization constant is absorbed.
// Weights are applied with symmetric pairwise accumulation, which preserves
// parity (and the exact zero of odd fields on the axis) in floating point.
struct Mollifier {
    double eps = 0.0;
    double h = 0.0;
    std::vector<double> w;  // w[0..K], one-sided half of the symmetric kernel

    static Mollifier make(double eps, double h) {
        if (eps < 2.0 * h)
            throw KernelUnderresolved("mollifier width below resolvable limit (eps < 2h)");
        Mollifier m;
        m.eps = eps;
        m.h = h;
        const int K = static_cast<int>(std::floor(eps / h));
        m.w.resize(K + 1, 0.0);
        for (int k = 0; k <= K; ++k) {
            const double s = k * h / eps;
            if (s < 1.0) m.w[k] = std::exp(-1.0 / (1.0 - s * s));
        }
        double mass = m.w[0];
        for (int k = 1; k <= K; ++k) mass += 2.0 * m.w[k];
        for (double& v : m.w) v /= mass;
        return m;
    }

    int halfwidth() const { return static_cast<int>(w.size()) - 1; }
};

namespace detail {
inline int clampi(int k, int lo, int hi) { return k < lo ? lo : (k > hi ? hi : k); }
}  // namespace detail

// Convolve one sampled line with the kernel; ends are padded by clamping,
// which keeps constants exact and respects any parity the line carries.
inline std::vector<double> mollify_trace(const std::vector<double>& f, const Mollifier& m) {
    const int n = static_cast<int>(f.size()) - 1;
    std::vector<double> out(f.size(), 0.0);
    const int K = m.halfwidth();
    for (int j = 0; j <= n; ++j) {
        double acc = m.w[0] * f[j];
        for (int k = 1; k <= K; ++k)
            acc += m.w[k] * (f[detail::clampi(j - k, 0, n)] + f[detail::clampi(j + k, 0, n)]);
        out[j] = acc;
    }
    return out;
}

// Row-wise z2 mollification of a 2-D field; exactly commutes with taking
// z1 slices because each row is convolved independently.
inline Field2 mollify_z2(const Field2& f, const Mollifier& m) {
    Field2 out(f.n1(), f.n2());
    const int K = m.halfwidth();
    for (int i = 0; i <= f.n1(); ++i)
        for (int j = 0; j <= f.n2(); ++j) {
            double acc = m.w[0] * f.at(i, j);
            for (int k = 1; k <= K; ++k)
                acc += m.w[k] * (f.at(i, detail::clampi(j - k, 0, f.n2())) +
                                 f.at(i, detail::clampi(j + k, 0, f.n2())));
            out.at(i, j) = acc;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Structural checks on an extended + mollified coefficient-ratio set.

// One quarter-plane ratio field with its reflection parity and background value.
struct RatioField {
    const char* name;
    Field2 quarter;    // samples at z2 >= 0
    Parity parity;
    double background;  // rbar_ij / rbar_11
};

struct ExtensionIdentityReport {
    double parity_worst = 0.0;        // after extension AND mollification (expect 0)
    double sup_inflation = 0.0;       // max over fields of sup|mollified| - sup|input|
    double envelope_excess = 0.0;     // max over fields of sup|mollified| - (|bg| + C delta)
    double constant_drift = 0.0;      // mollified constant-1 field vs 1
    double corner_value = 0.0;        // mollified odd b-ratio at the axis
    double corner_slope = 0.0;        // its first symmetric difference there
    double conormal_residual = 0.0;   // mollified r12/r11 slice vs mollified b2/b1
};

// `fields`: the nontrivial ratio fields on the 2-D grid (spacing h, mollifier
// width eps_fields); `b_fine`: b2/b1 trace on a fine 1-D grid (spacing hb,
// width eps_trace) for the corner flatness items, which need the narrow-width
// regime to sit below their tolerance; `b_coarse`: the same trace on the 2-D
// grid's z2 nodes for the co-normality comparison.  One kernel per grid.
inline ExtensionIdentityReport check_extension_identities(
    const std::vector<RatioField>& fields, double h, double eps_fields,
    const std::vector<double>& b_fine, double hb, double eps_trace,
    const std::vector<double>& b_coarse, double delta, double envelope_c = 5.0) {
    ExtensionIdentityReport rep;
    const Mollifier m2d = Mollifier::make(eps_fields, h);

    const Field2* r12_slice_src = nullptr;
    Field2 r12_moll;
    for (const RatioField& rf : fields) {
        const Field2 ext = extend_field(rf.quarter, rf.parity);
        const Field2 mol = mollify_z2(ext, m2d);
        const int axis = rf.quarter.n2();
        rep.parity_worst = std::max(rep.parity_worst, parity_residual(ext, axis, rf.parity));
        rep.parity_worst = std::max(rep.parity_worst, parity_residual(mol, axis, rf.parity));
        const double sup_in = ext.max_abs(), sup_out = mol.max_abs();
        rep.sup_inflation = std::max(rep.sup_inflation, sup_out - sup_in);
        rep.envelope_excess = std::max(
            rep.envelope_excess, sup_out - (std::fabs(rf.background) + envelope_c * delta));
        if (std::string_view(rf.name) == "r12") {
            r12_moll = mol;
            r12_slice_src = &rf.quarter;
        }
    }

    // constants pass through the renormalized kernel unchanged
    {
        Field2 one(8, fields.empty() ? 8 : 2 * fields[0].quarter.n2());
        one.fill(1.0);
        const Field2 mol = mollify_z2(one, m2d);
        for (int i = 0; i <= one.n1(); ++i)
            for (int j = 0; j <= one.n2(); ++j)
                rep.constant_drift = std::max(rep.constant_drift, std::fabs(mol.at(i, j) - 1.0));
    }

    // corner flatness of the mollified odd b-ratio on the fine trace
    {
        const Mollifier mb = Mollifier::make(eps_trace, hb);
        const std::vector<double> ext = extend_trace(b_fine, Parity::Odd);
        const std::vector<double> mol = mollify_trace(ext, mb);
        const int axis = static_cast<int>(b_fine.size()) - 1;
        rep.corner_value = std::fabs(mol[axis]);
        rep.corner_slope = std::fabs((mol[axis + 1] - mol[axis - 1]) / (2.0 * hb));
    }

    // co-normality survives mollification: the z1 = 0 slice of the mollified
    // r12/r11 field against the mollified b2/b1 trace on the same nodes
    if (r12_slice_src != nullptr && !b_coarse.empty()) {
        const std::vector<double> extb = extend_trace(b_coarse, Parity::Odd);
        const std::vector<double> molb = mollify_trace(extb, m2d);
        for (std::size_t j = 0; j < molb.size(); ++j)
            rep.conormal_residual = std::max(
                rep.conormal_residual,
                std::fabs(r12_moll.at(0, static_cast<int>(j)) - molb[j]));
    }
    return rep;
}

}  // namespace cornerflow
