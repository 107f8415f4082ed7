#pragma once

// Canonical solution branches of the linearized system at the singular point
// r = 0.  The four branches behave like r^{g1}, r^{-g1} (or the logarithmic
// weight tau when g1 is at or near zero), r^{g2} and r^{-g2} in their leading
// component.  Each is built by Picard iteration on a variation-of-parameters
// form: the potential terms are moved to the right-hand side and inverted
// against the Euler operator
//
//     L_g[w] = w'' + w'/r - g^2 w / r^2
//
// whose inverse is realized as two running moment integrals on a geometric
// grid (one pass per sweep, no dense solves).  Sources are interpolated in
// log r after scaling out their leading power, so the quadrature only ever
// sees slowly varying integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "fd.hpp"
#include "grid.hpp"
#include "linear_system.hpp"
#include "mode_params.hpp"
#include "profile.hpp"
#include "quadrature.hpp"

namespace vortex {

namespace detail {

inline double sinhc(double x) {
    if (std::fabs(x) < 1e-4) {
        double x2 = x * x;
        return 1 + x2 / 6 * (1 + x2 / 20);
    }
    return std::sinh(x) / x;
}

// comparison pair for the inverse of L_g written in a form that survives
// g -> 0: tau = (r^-g - r^g)/(2g) -> -log r, sigma = (r^g + r^-g)/2 -> 1
inline double tau_weight(double g, double t) { return -t * sinhc(g * t); }
inline double sigma_weight(double g, double t) { return std::cosh(g * t); }

enum class PairWeight { One, Tau, Sigma };

// Scaled source sampled on the 4 Gauss points of every log-space cell by the
// degree-5 rule through the 6 nearest nodes.  Shared by all moment integrals
// of one sweep.
struct CellSamples {
    std::vector<std::array<double, 4>> tq, gq;
    double half = 0;
};

inline CellSamples sample_cells(const std::vector<double>& t,
                                const std::vector<double>& ghat) {
    std::size_t n = t.size();
    if (n < 6) throw quadrature_failure("sample_cells: grid too short");
    CellSamples cs;
    cs.half = 0.5 * (t[1] - t[0]);
    cs.tq.resize(n - 1);
    cs.gq.resize(n - 1);
    const auto& x = GL4::nodes();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t j = (std::size_t)std::clamp((std::ptrdiff_t)k - 2,
                                                (std::ptrdiff_t)0,
                                                (std::ptrdiff_t)(n - 6));
        double mid = 0.5 * (t[k] + t[k + 1]);
        for (std::size_t q = 0; q < 4; ++q) {
            double tt = mid + cs.half * x[q];
            double val, der;
            lagrange6(&t[j], &ghat[j], tt, val, der);
            cs.tq[k][q] = tt;
            cs.gq[k][q] = val;
        }
    }
    return cs;
}

inline double pair_w(PairWeight pw, double g, double t) {
    switch (pw) {
        case PairWeight::Tau: return tau_weight(g, t);
        case PairWeight::Sigma: return sigma_weight(g, t);
        default: return 1.0;
    }
}

// P[k] = int_0^{r_k} s^{pow} w(s) ghat(s) ds, evaluated in t = log s.  The
// piece below the first node is closed analytically from the limit power of
// the integrand; pow + 1 > 0 is exactly the convergence condition for the
// construction and is enforced here.
inline std::vector<double> prefix_cumulant(const std::vector<double>& t,
                                           const CellSamples& cs, double pow,
                                           PairWeight pw, double g) {
    std::size_t n = t.size();
    if (!(pow + 1 > 0))
        throw quadrature_failure(
            "prefix_cumulant: moment integral diverges at the origin");
    // the tau/sigma weights tighten the convergence requirement by g
    double geff = pw == PairWeight::One ? 0.0 : g;
    if (!(pow + 1 - geff > 0))
        throw quadrature_failure(
            "prefix_cumulant: weighted moment integral diverges at the origin");
    const auto& w = GL4::weights();
    std::vector<double> P(n);
    // Close the piece below the grid foot analytically.  The scaled source
    // can still carry a residual power there (subdominant contributions with
    // a different exponent), so fit the local slope from the first cell's
    // samples instead of assuming it is flat.  The weight factor is kept
    // exact: approximating tau by its value at the foot leaves a homogeneous
    // admixture of a few percent of the head, which downstream residual
    // measurements can see.
    {
        double g0 = cs.gq[0][0], g3 = cs.gq[0][3];
        double mu = 0;
        if (g0 != 0 && g3 != 0 && (g0 > 0) == (g3 > 0))
            mu = std::log(g3 / g0) / (cs.tq[0][3] - cs.tq[0][0]);
        double beta = pow + 1 + mu;
        if (!(beta - geff > 0.05)) {
            mu = 0;
            beta = pow + 1;
        }
        double gfoot = g0 * std::exp(mu * (t[0] - cs.tq[0][0]));
        double head;   // int_{-inf}^{t0} e^{beta(t-t0)} w(t) dt
        double t0 = t[0], u = std::exp(g * t0);
        switch (pw) {
            case PairWeight::Sigma:
                head = 0.5 * (u / (beta + g) + 1 / (u * (beta - g)));
                break;
            case PairWeight::Tau:
                if (std::fabs(g * t0) < 1e-4)
                    head = (1 - beta * t0) / (beta * beta);
                else
                    head = -0.5 / g * (u / (beta + g) - 1 / (u * (beta - g)));
                break;
            default: head = 1 / beta;
        }
        P[0] = gfoot * std::exp((pow + 1) * t0) * head;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double cell = 0;
        for (std::size_t q = 0; q < 4; ++q)
            cell += w[q] * std::exp((pow + 1) * cs.tq[k][q]) *
                    pair_w(pw, g, cs.tq[k][q]) * cs.gq[k][q];
        P[k + 1] = P[k] + cs.half * cell;
    }
    return P;
}

// Q[k] = int_{r_k}^{R} s^{pow} w(s) ghat(s) ds; the basepoint is the top grid
// node itself, so there is no tail term.
inline std::vector<double> suffix_cumulant(const std::vector<double>& t,
                                           const CellSamples& cs, double pow,
                                           PairWeight pw, double g) {
    std::size_t n = t.size();
    const auto& w = GL4::weights();
    std::vector<double> Q(n);
    Q[n - 1] = 0;
    for (std::size_t k = n - 1; k-- > 0;) {
        double cell = 0;
        for (std::size_t q = 0; q < 4; ++q)
            cell += w[q] * std::exp((pow + 1) * cs.tq[k][q]) *
                    pair_w(pw, g, cs.tq[k][q]) * cs.gq[k][q];
        Q[k] = Q[k + 1] + cs.half * cell;
    }
    return Q;
}

struct KernelOut {
    std::vector<double> val, dval;
};

// Particular solution of L_g[out] = s^sigma ghat(s) that is regular at the
// origin (both moments accumulate from 0).  Two algebraically identical
// forms: the split-power form loses ~(sigma+2)/(2g) in cancellation as
// g -> 0, the sinh/cosh form loses ~exp(2 g span) at large g; the switch
// picks whichever is benign.
inline KernelOut inv_euler_regular(const std::vector<double>& t,
                                   const CellSamples& cs, double sigma,
                                   double g) {
    std::size_t n = t.size();
    KernelOut out;
    out.val.resize(n);
    out.dval.resize(n);
    double span = t.back() - t.front();
    if (g * span < 0.7) {
        auto S = prefix_cumulant(t, cs, sigma + 1, PairWeight::Sigma, g);
        auto T = prefix_cumulant(t, cs, sigma + 1, PairWeight::Tau, g);
        for (std::size_t k = 0; k < n; ++k) {
            double tw = tau_weight(g, t[k]), sw = sigma_weight(g, t[k]);
            double r = std::exp(t[k]);
            out.val[k] = sw * T[k] - tw * S[k];
            out.dval[k] = (-g * g * tw * T[k] + sw * S[k]) / r;
        }
    } else {
        auto Pm = prefix_cumulant(t, cs, sigma - g + 1, PairWeight::One, g);
        auto Pp = prefix_cumulant(t, cs, sigma + g + 1, PairWeight::One, g);
        for (std::size_t k = 0; k < n; ++k) {
            double eg = std::exp(g * t[k]), r = std::exp(t[k]);
            out.val[k] = 0.5 / g * (eg * Pm[k] - Pp[k] / eg);
            out.dval[k] = 0.5 * (eg * Pm[k] + Pp[k] / eg) / r;
        }
    }
    return out;
}

// Particular solution of L_g[out] = s^sigma ghat(s) carrying no r^{+g}
// multiple relative to the top node: the decaying moment accumulates from 0,
// the growing one from the top of the grid.  Diverges as g -> 0 (that limit
// has its own construction); callers keep g away from 0 here.
inline KernelOut inv_euler_bounded_top(const std::vector<double>& t,
                                       const CellSamples& cs, double sigma,
                                       double g) {
    std::size_t n = t.size();
    if (!(g > 5e-4))
        throw quadrature_failure("inv_euler_bounded_top: exponent too small");
    auto Pp = prefix_cumulant(t, cs, sigma + g + 1, PairWeight::One, g);
    auto Qm = suffix_cumulant(t, cs, sigma - g + 1, PairWeight::One, g);
    KernelOut out;
    out.val.resize(n);
    out.dval.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double eg = std::exp(g * t[k]), r = std::exp(t[k]);
        out.val[k] = -0.5 / g * (Pp[k] / eg + eg * Qm[k]);
        out.dval[k] = 0.5 * (Pp[k] / eg - eg * Qm[k]) / r;
    }
    return out;
}

} // namespace detail

// One canonical branch on its construction grid, plus (optionally) its
// continuation to larger radii by direct integration of the first-order
// system.
struct ZeroBranch {
    std::string tag;                       // a_regular, a_singular, ...
    bool tau_lead = false;                 // leading a is the log pair weight
    double exp_a = 0, exp_b = 0;           // behavior exponents of a and b
    std::vector<double> r, t, a, da, b, db;
    double R = 0;
    int iterations = 0;
    double final_delta = 0;                // scaled sup change, last sweep
    std::vector<double> delta_history;
    bool has_ext = false;
    PropagatedSolution ext;

    State state_at(std::size_t k) const {
        return {a[k], r[k] * da[k], b[k], r[k] * db[k]};
    }

    // (a, r a', b, r b') anywhere in the covered range.  On the construction
    // grid the stored arrays are interpolated after scaling out the behavior
    // exponents, so steep branches lose no accuracy to the interpolant.
    State eval(double rr) const {
        if (rr >= r.front() * (1 - 1e-12) && rr <= R * (1 + 1e-12)) {
            double tt = std::log(rr), h = t[1] - t[0];
            std::ptrdiff_t n = (std::ptrdiff_t)t.size();
            std::ptrdiff_t j = (std::ptrdiff_t)std::floor((tt - t[0]) / h) - 2;
            j = std::clamp(j, (std::ptrdiff_t)0, n - 6);
            auto interp = [&](const std::vector<double>& v, double p) {
                double sv[6];
                for (int i = 0; i < 6; ++i)
                    sv[i] = v[(std::size_t)(j + i)] *
                            std::exp(-p * t[(std::size_t)(j + i)]);
                double val, der;
                detail::lagrange6(&t[(std::size_t)j], sv, tt, val, der);
                return val * std::exp(p * tt);
            };
            return {interp(a, exp_a), rr * interp(da, exp_a - 1),
                    interp(b, exp_b), rr * interp(db, exp_b - 1)};
        }
        if (has_ext && rr > R && rr <= ext.r_to * (1 + 1e-12))
            return ext.eval(std::min(rr, ext.r_to));
        throw error("ZeroBranch::eval: radius outside the constructed range");
    }
};

namespace detail {

struct BranchRecipe {
    std::string tag;
    bool a_led = false;      // which component carries the unit lead
    bool regular = false;    // lead r^{+g} (otherwise r^{-g} or tau)
    bool tau_lead = false;
    bool a_mode_regular = true, b_mode_regular = true;  // kernel per component
    double sig_a = 0, sig_b = 0;   // leading source exponents
    double exp_a = 0, exp_b = 0;   // behavior exponents (convergence metric)
};

// One Picard solve on a fixed grid.  Returns false if the sweep-to-sweep
// change is not heading below tol within the iteration budget.
inline bool run_branch(const Profile& prof, const ModeParams& mp,
                       const BranchRecipe& rec, double R, double tol,
                       int max_iter, ZeroBranch& out) {
    double r_min = 1e-6 * R;
    std::size_t n =
        (std::size_t)std::ceil(std::log(R / r_min) / std::log(1.05)) + 1;
    out = ZeroBranch{};
    out.tag = rec.tag;
    out.tau_lead = rec.tau_lead;
    out.exp_a = rec.exp_a;
    out.exp_b = rec.exp_b;
    out.R = R;
    out.r = log_uniform_grid(r_min, R, n);
    out.t.resize(n);
    std::vector<double> f2(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.t[k] = std::log(out.r[k]);
        double f = prof.f(out.r[k]);
        f2[k] = f * f;
    }

    double g1 = mp.gamma1, g2 = mp.gamma2;
    std::vector<double> la(n), lda(n), lb(n, 0.0), ldb(n, 0.0);
    if (rec.tau_lead) {
        for (std::size_t k = 0; k < n; ++k) {
            la[k] = tau_weight(g1, out.t[k]);
            lda[k] = -sigma_weight(g1, out.t[k]) / out.r[k];
        }
    } else {
        double g = rec.a_led ? g1 : g2;
        double sgn = rec.regular ? 1.0 : -1.0;
        auto& lv = rec.a_led ? la : lb;
        auto& ldv = rec.a_led ? lda : ldb;
        if (!rec.a_led) { la.assign(n, 0.0); lda.assign(n, 0.0); }
        for (std::size_t k = 0; k < n; ++k) {
            lv[k] = std::exp(sgn * g * out.t[k]);
            ldv[k] = sgn * g * lv[k] / out.r[k];
        }
    }

    out.a = la;
    out.da = lda;
    out.b = lb;
    out.db = ldb;

    std::vector<double> ga(n), gb(n);
    double prev_delta = 0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            double c = -(1 - 2 * f2[k]);
            ga[k] = (c * out.a[k] + f2[k] * out.b[k]) *
                    std::exp(-rec.sig_a * out.t[k]);
            gb[k] = (c * out.b[k] + f2[k] * out.a[k]) *
                    std::exp(-rec.sig_b * out.t[k]);
        }
        auto csa = sample_cells(out.t, ga);
        auto csb = sample_cells(out.t, gb);
        KernelOut Ka = rec.a_mode_regular
                           ? inv_euler_regular(out.t, csa, rec.sig_a, g1)
                           : inv_euler_bounded_top(out.t, csa, rec.sig_a, g1);
        KernelOut Kb = rec.b_mode_regular
                           ? inv_euler_regular(out.t, csb, rec.sig_b, g2)
                           : inv_euler_bounded_top(out.t, csb, rec.sig_b, g2);
        double delta = 0, scale = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double na = la[k] + Ka.val[k], nb = lb[k] + Kb.val[k];
            double wa = std::exp(-rec.exp_a * out.t[k]);
            double wb = std::exp(-rec.exp_b * out.t[k]);
            delta = std::max(delta, std::fabs(na - out.a[k]) * wa);
            delta = std::max(delta, std::fabs(nb - out.b[k]) * wb);
            scale = std::max(scale, std::fabs(na) * wa);
            scale = std::max(scale, std::fabs(nb) * wb);
            out.a[k] = na;
            out.b[k] = nb;
            out.da[k] = lda[k] + Ka.dval[k];
            out.db[k] = ldb[k] + Kb.dval[k];
        }
        if (!(scale > 0) || !std::isfinite(delta))
            throw quadrature_failure("run_branch: iterate lost its scale");
        delta /= scale;
        out.delta_history.push_back(delta);
        out.iterations = it + 1;
        out.final_delta = delta;
        if (delta < tol) return true;
        // no useful progress and not converged -> let the caller shrink R
        if (it > 4 && delta > 0.5 * prev_delta && delta > 1e3 * tol)
            return false;
        prev_delta = delta;
    }
    return out.final_delta < tol;
}

} // namespace detail

struct ZeroBasis {
    ModeParams mp;
    bool alt_form = false;   // small-g1 construction (tau-led fourth branch)
    double R = 0;
    // order: a_regular, a_singular, b_regular, b_singular
    std::array<ZeroBranch, 4> branch;

    double expected_det() const {
        return alt_form ? 2 * mp.gamma2 : 4 * mp.gamma1 * mp.gamma2;
    }
    std::array<State, 4> frame(double r) const {
        return {branch[0].eval(r), branch[1].eval(r), branch[2].eval(r),
                branch[3].eval(r)};
    }
    double det(double r) const { return frame_det(frame(r)); }
};

// Build all four branches; if r_out > R the branches are continued outward by
// direct integration so the basis covers (r_min, r_out].
inline ZeroBasis zero_basis(const Profile& prof, const ModeParams& mp,
                            double r_out = 0, double tol = 1e-12,
                            int max_iter = 60) {
    if (!mp.in_domain)
        throw degenerate_basis("zero_basis: parameters outside the admissible set");
    ZeroBasis basis;
    basis.mp = mp;
    double g1 = mp.gamma1, g2 = mp.gamma2, d = mp.d;
    basis.alt_form = g1 < 0.125;
    if (basis.alt_form && !mp.in_domain2) {
        if (g1 > 1e-3)
            basis.alt_form = false;   // split-power forms still conditioned
        else
            throw degenerate_basis(
                "zero_basis: exponent gap too small for the standard "
                "construction and the alternative domain conditions fail");
    }

    std::array<detail::BranchRecipe, 4> recipes;
    recipes[0] = {"a_regular", true, true, false, true, true,
                  g1, 2 * d + g1, g1, 2 * d + g1 + 2};
    recipes[2] = {"b_regular", false, true, false, true, true,
                  2 * d + g2, g2, 2 * d + g2 + 2, g2};
    if (!basis.alt_form) {
        recipes[1] = {"a_singular", true, false, false, false, false,
                      -g1, 2 * d - g1, -g1, std::min(g2, 2 * d + 2 - g1)};
        recipes[3] = {"b_singular", false, false, false, false, false,
                      2 * d - g2, -g2, std::min(g1, 2 * d + 2 - g2), -g2};
    } else {
        recipes[1] = {"a_singular", true, false, true, true, true,
                      -g1, 2 * d - g1, -g1, 2 * d + 2 - g1};
        recipes[3] = {"b_singular", false, false, false, true, false,
                      2 * d - g2, -g2, 2 * d + 2 - g2, -g2};
    }

    double R = std::min(0.5, 1.2 / g2);
    const int max_halvings = 4;
    for (int attempt = 0;; ++attempt) {
        bool ok = true;
        for (std::size_t i = 0; i < 4 && ok; ++i)
            ok = detail::run_branch(prof, mp, recipes[i], R, tol, max_iter,
                                    basis.branch[i]);
        if (ok) break;
        if (attempt >= max_halvings)
            throw non_contraction(
                "zero_basis: sweeps stopped contracting even on the smallest "
                "construction interval");
        R /= 2;
    }
    basis.R = R;

    if (r_out > R) {
        for (auto& br : basis.branch) {
            br.ext = propagate(prof, mp, br.state_at(br.r.size() - 1), R, r_out);
            br.has_ext = true;
        }
    }
    return basis;
}

// Relative equation residual of a constructed branch, by order-6 finite
// differences of the stored samples in log r (solver derivatives unused).
// Components are scaled by their behavior exponents first so the stencils act
// on slowly varying data.
struct BranchResidual {
    double sup_rel = 0;
    std::vector<double> r, rel;
};

inline BranchResidual branch_residual(const ZeroBranch& br, const Profile& prof,
                                      const ModeParams& mp) {
    std::size_t n = br.t.size();
    double h = br.t[1] - br.t[0];
    std::vector<double> sa(n), sb(n);
    for (std::size_t k = 0; k < n; ++k) {
        sa[k] = br.a[k] * std::exp(-br.exp_a * br.t[k]);
        sb[k] = br.b[k] * std::exp(-br.exp_b * br.t[k]);
    }
    auto sa1 = fd_deriv1(sa, h), sa2 = fd_deriv2(sa, h);
    auto sb1 = fd_deriv1(sb, h), sb2 = fd_deriv2(sb, h);
    // Roundoff through the stencils bounds what this measurement can resolve:
    // sum |c| is 6.05/h^2 for the second derivative and 1.84/h for the first.
    // Rows whose equation content sits below that floor (possible when a
    // gamma vanishes and the potential term is still tiny) prove nothing
    // either way, so the floor is subtracted before a row is scored.  The
    // scaled components are built to stay order-one across the grid, which
    // lets a single global amplitude serve for the window maxima.
    double sup_sa = 0, sup_sb = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sup_sa = std::max(sup_sa, std::fabs(sa[k]));
        sup_sb = std::max(sup_sb, std::fabs(sb[k]));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    BranchResidual out;
    double g1 = mp.gamma1, g2 = mp.gamma2;
    for (std::size_t k = 3; k + 3 < n; ++k) {
        double r = br.r[k], r2 = r * r;
        double f = prof.f(r), f2 = f * f;
        double pa = br.exp_a, pb = br.exp_b;
        double ea = std::exp(pa * br.t[k]), eb = std::exp(pb * br.t[k]);
        // r^2 L_g[a] with a = e^{p t} \hat a:  e^{p t}(\hat a'' + 2p \hat a'
        // + (p^2 - g^2) \hat a), primes in t
        double La = ea * (sa2[k] + 2 * pa * sa1[k] + (pa * pa - g1 * g1) * sa[k]);
        double Lb = eb * (sb2[k] + 2 * pb * sb1[k] + (pb * pb - g2 * g2) * sb[k]);
        double pot_a = r2 * ((1 - 2 * f2) * br.a[k] - f2 * br.b[k]);
        double pot_b = r2 * ((1 - 2 * f2) * br.b[k] - f2 * br.a[k]);
        double res_a = La + pot_a, res_b = Lb + pot_b;
        double noise_a = 1.5 * eps * ea * sup_sa *
                         (6.05 / (h * h) + 2 * std::fabs(pa) * 1.84 / h +
                          std::fabs(pa * pa - g1 * g1));
        double noise_b = 1.5 * eps * eb * sup_sb *
                         (6.05 / (h * h) + 2 * std::fabs(pb) * 1.84 / h +
                          std::fabs(pb * pb - g2 * g2));
        double scale_a = std::max({std::fabs(La), std::fabs(pot_a),
                                   g1 * g1 * std::fabs(br.a[k]), 1e-300});
        double scale_b = std::max({std::fabs(Lb), std::fabs(pot_b),
                                   g2 * g2 * std::fabs(br.b[k]), 1e-300});
        // a subdominant component can sit many orders below its partner; its
        // own equation is then dominated by the partner's source, so measure
        // each row against the largest term actually present in that row
        double rel =
            std::max(std::max(0.0, std::fabs(res_a) - noise_a) / scale_a,
                     std::max(0.0, std::fabs(res_b) - noise_b) / scale_b);
        out.r.push_back(r);
        out.rel.push_back(rel);
        out.sup_rel = std::max(out.sup_rel, rel);
    }
    return out;
}

} // namespace vortex
