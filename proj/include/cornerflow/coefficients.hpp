#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/geometry.hpp"
#include "cornerflow/types.hpp"

namespace cornerflow {

// Isentropic gas normalization: density rho = (1 + (g-1) B)^{1/(g-1)} with
// Bernoulli quantity B = B0 - dt(Phi) - |grad Phi|^2 / 2 and sound speed
// c^2 = rho^{g-1} = 1 + (g-1) B.
struct GasState {
    double gamma = 1.4;
    double b0 = 0.2;

    double rho0() const { return std::pow(c0sq(), 1.0 / (gamma - 1.0)); }
    double c0sq() const { return 1.0 + (gamma - 1.0) * b0; }
};

// c^2 at a physical-space state; throws VacuumReached when the base drops
// to zero or below (hyperbolicity lost).
inline double sound_speed_sq(const GasState& gas, double dt_phi, const Vec2& grad) {
    const double base = 1.0 + (gas.gamma - 1.0) * (gas.b0 - dt_phi -
                                                   0.5 * (grad[0] * grad[0] + grad[1] * grad[1]));
    if (base <= 0.0) throw VacuumReached("state reached vacuum: c^2 <= 0");
    return base;
}

inline double density(const GasState& gas, double dt_phi, const Vec2& grad) {
    return std::pow(sound_speed_sq(gas, dt_phi, grad), 1.0 / (gas.gamma - 1.0));
}

// Second-order coefficient matrix of the potential-flow equation in physical
// coordinates: a00 = 1, a0j = Phi_{x_j}, a_ij = -c^2 d_ij + Phi_{x_i} Phi_{x_j}.
inline Sym3 a_matrix(const GasState& gas, double dt_phi, const Vec2& grad) {
    const double c2 = sound_speed_sq(gas, dt_phi, grad);
    Sym3 a;
    a.m[0][0] = 1.0;
    a.set_sym(0, 1, grad[0]);
    a.set_sym(0, 2, grad[1]);
    a.m[1][1] = -c2 + grad[0] * grad[0];
    a.m[2][2] = -c2 + grad[1] * grad[1];
    a.set_sym(1, 2, grad[0] * grad[1]);
    return a;
}

// Linear map from straightened-gradient state (d_z0, d_z1, d_z2) to physical
// state (d_t, d_x1, d_x2) at a frame.  Rows give the physical components.
inline void state_map(const GeomFrame& fr, double M[3][3]) {
    M[0][0] = 1.0;
    M[0][1] = 0.0;
    M[0][2] = 0.0;
    M[1][0] = 0.0;
    M[1][1] = -fr.p - fr.w2p * fr.sigma_p;
    M[1][2] = -fr.w2p;
    M[2][0] = 0.0;
    M[2][1] = fr.w2p + fr.sigma_p;
    M[2][2] = 1.0;
}

inline Vec3 state_to_x(const GeomFrame& fr, const Vec3& sz) {
    double M[3][3];
    state_map(fr, M);
    Vec3 sx;
    for (int i = 0; i < 3; ++i) sx[i] = M[i][0] * sz[0] + M[i][1] * sz[1] + M[i][2] * sz[2];
    return sx;
}

// Jacobian of the first straightening step, full 3x3 (J[k][i] = dy_k/dx_i).
inline void t1_jacobian(const GeomFrame& fr, double J[3][3]) {
    J[0][0] = 1.0;
    J[0][1] = 0.0;
    J[0][2] = 0.0;
    J[1][0] = 0.0;
    J[1][1] = fr.p;
    J[1][2] = -fr.w2p;
    J[2][0] = 0.0;
    J[2][1] = -fr.w2p;
    J[2][2] = 1.0;
}

// Recombination induced by the shear z1 = -y1 + sigma(z2) applied to the
// intermediate coefficient matrix a~.
inline Sym3 alpha_from_atilde(const Sym3& at, double sigp) {
    Sym3 al;
    al.m[0][0] = at.m[0][0];
    al.m[1][1] = at.m[1][1] - 2.0 * sigp * at.m[1][2] + sigp * sigp * at.m[2][2];
    al.m[2][2] = at.m[2][2];
    al.set_sym(0, 2, at.m[0][2]);
    al.set_sym(1, 2, at.m[2][2] * sigp - at.m[2][1]);
    al.set_sym(0, 1, at.m[0][2] * sigp - at.m[1][0]);
    return al;
}

// First-order coefficients produced by the straightening (the curvature of
// the horizontal wall enters here; the shear contributes none in this list).
inline Vec3 lower_from_a(const Sym3& a, const GeomFrame& fr) {
    return {0.0,
            a.m[1][1] * (fr.z2 * fr.w2ppp - fr.w2p * fr.w2pp) + 2.0 * a.m[1][2] * fr.w2pp,
            -a.m[1][1] * fr.w2pp};
}

// Full transformed coefficient set at one frame and one gradient state.
struct AlphaSet {
    Sym3 second;  // alpha_ij (indices 0=time)
    Vec3 lower;   // alpha_i
};

inline AlphaSet alpha_coeffs(const GasState& gas, const GeomFrame& fr, const Vec3& sz) {
    const Vec3 sx = state_to_x(fr, sz);
    const Sym3 a = a_matrix(gas, sx[0], {sx[1], sx[2]});
    double J[3][3];
    t1_jacobian(fr, J);
    const Sym3 at = congruence(J, a);
    return {alpha_from_atilde(at, fr.sigma_p), lower_from_a(a, fr)};
}

// Derivatives of the alpha set with respect to the straightened state
// components; analytic through the whole chain (a is polynomial in the
// physical state, the two transforms are linear recombinations).
struct AlphaJac {
    Sym3 second[3];  // d alpha_ij / d sz_k
    Vec3 lower[3];
};

inline AlphaJac alpha_state_jac(const GasState& gas, const GeomFrame& fr, const Vec3& sz) {
    const Vec3 sx = state_to_x(fr, sz);
    const double gm1 = gas.gamma - 1.0;
    double J[3][3], M[3][3];
    t1_jacobian(fr, J);
    state_map(fr, M);

    // dA/d sx_m, m = 0..2
    Sym3 dA[3];
    for (int m = 0; m < 3; ++m) {
        Sym3 d;
        // dc^2/dsx_m = -gm1 * (m==0 ? 1 : sx_m)
        const double dc2 = -gm1 * (m == 0 ? 1.0 : sx[m]);
        d.m[0][0] = 0.0;
        d.set_sym(0, 1, m == 1 ? 1.0 : 0.0);
        d.set_sym(0, 2, m == 2 ? 1.0 : 0.0);
        for (int i = 1; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                double v = (i == j ? -dc2 : 0.0);
                if (m == i) v += sx[j];
                if (m == j) v += sx[i];
                d.set_sym(i, j, v);
            }
        dA[m] = d;
    }

    AlphaJac out;
    for (int k = 0; k < 3; ++k) {
        Sym3 dsec;
        Vec3 dlow{0.0, 0.0, 0.0};
        for (int m = 0; m < 3; ++m) {
            const double w = M[m][k];  // d sx_m / d sz_k
            if (w == 0.0) continue;
            const Sym3 dat = congruence(J, dA[m]);
            const Sym3 da = alpha_from_atilde(dat, fr.sigma_p);
            const Vec3 dl = lower_from_a(dA[m], fr);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) dsec.m[i][j] += w * da.m[i][j];
            for (int i = 0; i < 3; ++i) dlow[i] += w * dl[i];
        }
        out.second[k] = dsec;
        out.lower[k] = dlow;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary coefficients of the transformed slip condition on the straightened
// vertical wall {z1 = 0}:  bbar1 d_z1 + bbar2 d_z2, with
//   bbar1 = p + (W2' + W1') sigma' + W1' W2',   bbar2 = W1' + W2',
// wall derivatives at the preimage of (0, z2).  Flat walls give (-1, 0).
struct BoundaryCoeffs {
    double b1 = -1.0;
    double b2 = 0.0;
};

inline BoundaryCoeffs boundary_coeffs(const CornerDomain& dom, double z2) {
    if (dom.is_flat()) return {-1.0, 0.0};
    const double sig = sigma(dom, z2);
    const double sigp = sigma_prime(dom, z2);
    const Vec2 x = t1_inverse(dom, {sig, z2});
    const double w1p = dom.wall1.eval(x[1], 1);
    const double w2p = dom.wall2.eval(x[0], 1);
    const double p = -1.0 - z2 * dom.wall2.eval(x[0], 2);
    return {p + (w2p + w1p) * sigp + w1p * w2p, w1p + w2p};
}

// ---------------------------------------------------------------------------
// Candidate potential satisfying both transformed slip conditions by
// construction:
//   Phi(z0,z1,z2) = g(z0) [ E(z2) + z1 R(z2) E'(z2) + z1^2 G1(z1) G2(z2) ],
// R = -bbar2/bbar1.  On z1 = 0 the oblique condition collapses exactly;
// on z2 = 0 the normal derivative vanishes because E'(0) = 0, G2'(0) = 0 and
// bbar2 vanishes at the corner.
class SlipCandidate {
  public:
    SlipCandidate(const CornerDomain& dom, double amplitude = 0.05, double k_e = 1.3,
                  double k_g = 0.9)
        : dom_(dom), amp_(amplitude), ke_(k_e), kg_(k_g) {}

    double operator()(double z0, double z1, double z2) const {
        const BoundaryCoeffs bc = boundary_coeffs(dom_, z2);
        const double R = -bc.b2 / bc.b1;
        const double E = amp_ * std::cos(ke_ * z2);
        const double Ep = -amp_ * ke_ * std::sin(ke_ * z2);
        const double G = 0.4 * amp_ * std::cos(kg_ * z1) * std::cos(kg_ * z2);
        return gfun(z0) * (E + z1 * R * Ep + z1 * z1 * G);
    }

  private:
    CornerDomain dom_;
    double amp_, ke_, kg_;

    static double gfun(double z0) { return 1.0 + 0.3 * z0 + 0.2 * z0 * z0; }
};

// ---------------------------------------------------------------------------
// Structural boundary identities of the transformed coefficients, verified
// numerically for a candidate potential satisfying the slip conditions:
//   on the horizontal boundary {z2 = 0}:  alpha_02 = alpha_12 = 0;
//   on the vertical boundary {z1 = 0}:    alpha_12 b1 - alpha_11 b2 = 0
//                                          (co-normality) and alpha_01 = 0;
//   at the corner: bbar2 and its first two z2-derivatives vanish.
struct BoundaryIdentityReport {
    double slip_residual = 0.0;       // precondition: worst slip violation
    double wall2_a02 = 0.0;           // max |alpha_02| on z2 = 0
    double wall2_a12 = 0.0;           // max |alpha_12| on z2 = 0
    double wall1_conormal = 0.0;      // max |alpha_12 b1 - alpha_11 b2| on z1 = 0
    double wall1_a01 = 0.0;           // max |alpha_01| on z1 = 0
    double corner_b2[3] = {0, 0, 0};  // |d^k b2 (0,0)|, k = 0,1,2
    double max_residual() const {
        double m = std::max({wall2_a02, wall2_a12, wall1_conormal, wall1_a01});
        for (double c : corner_b2) m = std::max(m, std::fabs(c));
        return m;
    }
};

// Differences the candidate with fourth-order stencils (step h_diff, one-sided
// where the domain ends) and evaluates the identities at `samples` points per
// boundary, spread over [0, extent].  Throws PreconditionViolated if the
// candidate fails its slip check at tolerance `slip_tol`.
template <class Cand>
BoundaryIdentityReport check_boundary_identities(const CornerDomain& dom, const GasState& gas,
                                                 const Cand& cand, double extent = 1.0,
                                                 int samples = 9, double h_diff = 0.02,
                                                 double slip_tol = 1e-5, double z0 = 0.2) {
    BoundaryIdentityReport rep;
    auto grad_z = [&](double z1, double z2) -> Vec3 {
        const bool os1 = z1 < 2.0 * h_diff;  // stay on the domain side
        const bool os2 = z2 < 2.0 * h_diff;
        const double d0 = stencil::d1_order4(
            [&](double o) { return cand(z0 + o * h_diff, z1, z2); }, h_diff, false);
        const double d1 = stencil::d1_order4(
            [&](double o) { return cand(z0, z1 + o * h_diff, z2); }, h_diff, os1);
        const double d2 = stencil::d1_order4(
            [&](double o) { return cand(z0, z1, z2 + o * h_diff); }, h_diff, os2);
        return {d0, d1, d2};
    };

    // --- vertical boundary z1 = 0: slip precondition, co-normality, alpha_01
    for (int s = 1; s <= samples; ++s) {
        const double z2 = extent * s / samples;
        const Vec3 g = grad_z(0.0, z2);
        const BoundaryCoeffs bc = boundary_coeffs(dom, z2);
        rep.slip_residual = std::max(rep.slip_residual, std::fabs(bc.b1 * g[1] + bc.b2 * g[2]));
        const AlphaSet al = alpha_coeffs(gas, frame_at(dom, {0.0, z2}), g);
        rep.wall1_conormal = std::max(
            rep.wall1_conormal, std::fabs(al.second.m[1][2] * bc.b1 - al.second.m[1][1] * bc.b2));
        rep.wall1_a01 = std::max(rep.wall1_a01, std::fabs(al.second.m[0][1]));
    }

    // --- horizontal boundary z2 = 0: normal-derivative precondition, alpha_02, alpha_12
    for (int s = 0; s <= samples; ++s) {
        const double z1 = extent * s / samples;
        const Vec3 g = grad_z(z1, 0.0);
        rep.slip_residual = std::max(rep.slip_residual, std::fabs(g[2]));
        const AlphaSet al = alpha_coeffs(gas, frame_at(dom, {z1, 0.0}), g);
        rep.wall2_a02 = std::max(rep.wall2_a02, std::fabs(al.second.m[0][2]));
        rep.wall2_a12 = std::max(rep.wall2_a12, std::fabs(al.second.m[1][2]));
    }

    if (rep.slip_residual > slip_tol)
        throw PreconditionViolated("boundary identity check: candidate violates slip condition");

    // --- corner flatness of bbar2 along the vertical boundary trace
    auto b2trace = [&](double o) { return boundary_coeffs(dom, o * h_diff).b2; };
    rep.corner_b2[0] = b2trace(0.0);
    rep.corner_b2[1] = stencil::d1_order4(b2trace, h_diff, true);
    rep.corner_b2[2] = stencil::d2_order4(b2trace, h_diff, true);
    return rep;
}

}  // namespace cornerflow
