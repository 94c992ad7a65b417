#include "spinorbit/cassini.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <cstdio>
#include <sstream>
#include <vector>

namespace spinorbit {

namespace {

// gradient and Hessian of H restricted to (S1, S3) at sigma = 0
void grad_hess(const AveragedHamiltonian& H, double S1, double S3, Eigen::Vector2d& g,
               Eigen::Matrix2d& Jm) {
    const Jet j = H.taylor(S1, S3, 2);
    g(0) = j.coeff(1, 0, 0, 0);
    g(1) = j.coeff(0, 1, 0, 0);
    Jm(0, 0) = 2.0 * j.coeff(2, 0, 0, 0);
    Jm(1, 1) = 2.0 * j.coeff(0, 2, 0, 0);
    Jm(0, 1) = Jm(1, 0) = j.coeff(1, 1, 0, 0);
}

}  // namespace

std::string CassiniState::to_text() const {
    std::ostringstream os;
    char buf[64];
    auto w = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.16e", v);
        os << k << ' ' << buf << '\n';
    };
    w("Sigma1_star", sigma_star[0]);
    w("Sigma3_star", sigma_star[1]);
    w("K_star", K_star);
    w("eps_star", eps_star);
    w("eps_star_arcmin", eps_arcmin());
    os << "side " << (K_above_i ? "K>i" : "K<i") << '\n';
    w("residual_1", residuals[0]);
    w("residual_2", residuals[1]);
    return os.str();
}

std::string UntangledForm::to_text() const {
    std::ostringstream os;
    char buf[64];
    os << "S_matrix\n";
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            std::snprintf(buf, sizeof buf, "%.16e", S[r][c]);
            os << buf << (c == 3 ? '\n' : ' ');
        }
    }
    auto w = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.16e", v);
        os << k << ' ' << buf << '\n';
    };
    w("mu_S1", mu_prime[0]);
    w("mu_S3", mu_prime[1]);
    w("mu_s1", mu_prime[2]);
    w("mu_s3", mu_prime[3]);
    w("U1_star", U_star[0]);
    w("U3_star", U_star[1]);
    w("omega_u1_rad_day", omega_u[0]);
    w("omega_u3_rad_day", omega_u[1]);
    w("symplectic_residual", symplectic_residual);
    return os.str();
}

CassiniState find_equilibrium(const AveragedHamiltonian& H) {
    const PhysicalParams& p = H.params();
    Eigen::Vector2d x(1.5 + p.omega_dot / p.n + p.Omega_dot / p.n,
                      1.5 * (1.0 - std::cos(p.i)));
    Eigen::Vector2d g;
    Eigen::Matrix2d Jm;
    grad_hess(H, x(0), x(1), g, Jm);
    double fn = g.lpNorm<Eigen::Infinity>();
    int it = 0;
    for (; it < 100 && fn > 1e-13; ++it) {
        if (std::abs(Jm.determinant()) < 1e-30)
            throw DegenerateEquilibriumError("find_equilibrium: singular Jacobian");
        Eigen::Vector2d dx = Jm.fullPivLu().solve(-g);
        double step = 1.0;
        Eigen::Vector2d xn;
        Eigen::Vector2d gn;
        Eigen::Matrix2d Jn;
        double fnn = fn;
        // halve until the residual decreases
        for (int h = 0; h < 60; ++h) {
            xn = x + step * dx;
            if (xn(0) > 0.0 && xn(1) >= 0.0 && xn(1) < xn(0)) {
                grad_hess(H, xn(0), xn(1), gn, Jn);
                fnn = gn.lpNorm<Eigen::Infinity>();
                if (fnn < fn) break;
            }
            step *= 0.5;
        }
        if (!(fnn < fn)) {
            std::ostringstream msg;
            msg << "find_equilibrium: Newton stalled at iteration " << it << ", |f| = " << fn;
            throw EquilibriumNotFoundError(msg.str());
        }
        x = xn;
        g = gn;
        Jm = Jn;
        fn = fnn;
    }
    if (fn > 1e-12) {
        std::ostringstream msg;
        msg << "find_equilibrium: no convergence after " << it << " iterations, |f| = " << fn;
        throw EquilibriumNotFoundError(msg.str());
    }
    CassiniState st;
    st.sigma_star = {x(0), x(1)};
    st.residuals = {g(0), g(1)};
    st.iterations = it;
    const double cK = (x(0) - x(1)) / x(0);
    st.K_star = std::acos(std::clamp(cK, -1.0, 1.0));
    st.eps_star = std::abs(st.K_star - p.i);
    st.K_above_i = st.K_star > p.i;
    return st;
}

Jet taylor_expand(const AveragedHamiltonian& H, const CassiniState& eq, int order) {
    if (order < 2) throw ConfigError("taylor_expand: order must be >= 2");
    const int degree = order + 2;
    if (degree > jdetail::kMaxExponent)
        throw ConfigError("taylor_expand: requested order exceeds jet capability");
    const Jet full = H.taylor(eq.sigma_star[0], eq.sigma_star[1], degree);
    const double lin = std::max(
        std::max(std::abs(full.coeff(1, 0, 0, 0)), std::abs(full.coeff(0, 1, 0, 0))),
        std::max(std::abs(full.coeff(0, 0, 1, 0)), std::abs(full.coeff(0, 0, 0, 1))));
    if (lin > 1e-10)
        throw NumericalError("taylor_expand: linear terms at the equilibrium exceed 1e-10");
    return full.without_constant_and_linear();
}

namespace {

struct ModeColumns {
    Eigen::Vector2d a;  // Sigma-direction
    Eigen::Vector2d b;  // sigma-direction
    double omega;
};

}  // namespace

UntangledForm untangle(const Jet& expansion, double n_rad_day, UntangleScaling scaling) {
    // quadratic coefficient matrices: H2 = Sig^T P Sig + sig^T Q sig (+ cross)
    Eigen::Matrix2d P, Q;
    P(0, 0) = expansion.coeff(2, 0, 0, 0);
    P(1, 1) = expansion.coeff(0, 2, 0, 0);
    P(0, 1) = P(1, 0) = 0.5 * expansion.coeff(1, 1, 0, 0);
    Q(0, 0) = expansion.coeff(0, 0, 2, 0);
    Q(1, 1) = expansion.coeff(0, 0, 0, 2);
    Q(0, 1) = Q(1, 0) = 0.5 * expansion.coeff(0, 0, 1, 1);
    const double scale = std::max({std::abs(P(0, 0)), std::abs(P(1, 1)), std::abs(Q(0, 0)),
                                   std::abs(Q(1, 1)), 1e-30});
    double cross = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
            cross = std::max(cross, std::abs(expansion.coeff(a == 0 ? 1 : 0, a == 1 ? 1 : 0,
                                                             c == 0 ? 1 : 0, c == 1 ? 1 : 0)));
    if (cross > 1e-12 * scale)
        throw DomainError("untangle: Sigma-sigma cross terms present (H not even in sigma?)");

    // linearized flow: d(Sig)/dt = -2 Q sig ; d(sig)/dt = 2 P Sig
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A.block<2, 2>(0, 2) = -2.0 * Q;
    A.block<2, 2>(2, 0) = 2.0 * P;
    Eigen::EigenSolver<Eigen::Matrix4d> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("untangle: eigensolver failed");

    std::vector<ModeColumns> modes;
    const double anorm = A.norm();
    for (int k = 0; k < 4; ++k) {
        const std::complex<double> lam = es.eigenvalues()(k);
        if (std::abs(lam.real()) > 1e-9 * std::max(anorm, std::abs(lam)))
            throw NotEllipticError(
                "untangle: complex-unstable eigenvalue; parameters left the stable Cassini "
                "regime");
        if (lam.imag() <= 0.0) continue;  // keep one of each conjugate pair
        Eigen::Vector4cd w = es.eigenvectors().col(k);
        // rotate the phase so the Sigma-part is real and the sigma-part imaginary
        int j0 = 0;
        double best = 0.0;
        for (int j = 0; j < 2; ++j)
            if (std::abs(w(j)) > best) {
                best = std::abs(w(j));
                j0 = j;
            }
        std::complex<double> phase = std::polar(1.0, -std::arg(w(j0)));
        if (best < 1e-12) {  // Sigma-part vanishes; align on the sigma-part instead
            for (int j = 2; j < 4; ++j)
                if (std::abs(w(j)) > best) {
                    best = std::abs(w(j));
                    j0 = j;
                }
            phase = std::polar(1.0, -std::arg(w(j0)) + M_PI_2);
        }
        w *= phase;
        const double structural = std::max(std::abs(w(0).imag()), std::abs(w(1).imag())) +
                                  std::max(std::abs(w(2).real()), std::abs(w(3).real()));
        if (structural > 1e-8 * w.norm())
            throw NumericalError("untangle: eigenvector lacks the block structure");
        ModeColumns m;
        m.a = Eigen::Vector2d(w(0).real(), w(1).real());
        m.b = Eigen::Vector2d(w(2).imag(), w(3).imag());
        m.omega = lam.imag();
        double s = m.a.dot(m.b);
        if (s < 0) {
            m.b = -m.b;
            s = -s;
        }
        if (s < 1e-300) throw NotEllipticError("untangle: degenerate symplectic pairing");
        m.a /= std::sqrt(s);
        m.b /= std::sqrt(s);
        // start from unit sigma'-columns (librations in radians)
        const double nb = m.b.norm();
        m.b /= nb;
        m.a *= nb;
        // deterministic sign: dominant sigma'-component positive
        const int jd = std::abs(m.b(0)) >= std::abs(m.b(1)) ? 0 : 1;
        if (m.b(jd) < 0) {
            m.b = -m.b;
            m.a = -m.a;
        }
        modes.push_back(m);
    }
    if (modes.size() != 2)
        throw NotEllipticError("untangle: expected two elliptic modes, found " +
                               std::to_string(modes.size()));
    if (scaling == UntangleScaling::Balanced) {
        // consume the per-mode scale freedom by equalizing U* across modes
        double us[2];
        for (int mi = 0; mi < 2; ++mi) {
            const double muS = modes[mi].a.dot(P * modes[mi].a);
            const double mus = modes[mi].b.dot(Q * modes[mi].b);
            us[mi] = std::sqrt(std::abs(muS / mus));
        }
        const double ubar = std::sqrt(us[0] * us[1]);
        for (int mi = 0; mi < 2; ++mi) {
            const double alpha = std::sqrt(ubar / us[mi]);
            modes[mi].a *= alpha;
            modes[mi].b /= alpha;
        }
    }
    if (std::abs(modes[0].omega - modes[1].omega) <
        1e-9 * std::max(std::abs(modes[0].omega), std::abs(modes[1].omega)))
        throw ResonantQuadraticError("untangle: near-degenerate quadratic frequencies");
    // longitudinal mode (dominant sigma_1 content) first
    if (std::abs(modes[0].b(0)) < std::abs(modes[1].b(0))) std::swap(modes[0], modes[1]);

    Eigen::Matrix4d T = Eigen::Matrix4d::Zero();
    for (int mi = 0; mi < 2; ++mi) {
        T.block<2, 1>(0, mi) = modes[mi].a;
        T.block<2, 1>(2, 2 + mi) = modes[mi].b;
    }
    Eigen::Matrix4d Om = Eigen::Matrix4d::Zero();
    Om.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
    Om.block<2, 2>(2, 0) = -Eigen::Matrix2d::Identity();
    const double symp_resid = (T.transpose() * Om * T - Om).cwiseAbs().maxCoeff();
    if (symp_resid > 1e-12)
        throw NumericalError("untangle: symplectic normalization residual too large");

    // transformed quadratic form
    Eigen::Matrix4d Hq = Eigen::Matrix4d::Zero();
    Hq.block<2, 2>(0, 0) = P;
    Hq.block<2, 2>(2, 2) = Q;
    const Eigen::Matrix4d Hp = T.transpose() * Hq * T;
    double offdiag = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int cc = 0; cc < 4; ++cc)
            if (r != cc) offdiag = std::max(offdiag, std::abs(Hp(r, cc)));
    if (offdiag > 1e-10 * scale)
        throw NumericalError("untangle: mixed quadratic terms survive the transformation");

    UntangledForm form;
    for (int r = 0; r < 4; ++r)
        for (int cc = 0; cc < 4; ++cc) form.S[r][cc] = T(r, cc);
    for (int d = 0; d < 4; ++d) form.mu_prime[d] = Hp(d, d);
    form.symplectic_residual = symp_resid;
    for (int mi = 0; mi < 2; ++mi) {
        const double muS = Hp(mi, mi);
        const double mus = Hp(2 + mi, 2 + mi);
        if (muS * mus <= 0.0)
            throw NotEllipticError("untangle: mu'_Sigma mu'_sigma product not positive");
        form.U_star[mi] = std::sqrt(muS / mus);
        form.omega_scaled[mi] = 2.0 * std::copysign(std::sqrt(muS * mus), muS);
        form.omega_u[mi] = form.omega_scaled[mi] * n_rad_day;
    }
    return form;
}

Jet expand_untangled(const AveragedHamiltonian& H, const CassiniState& eq,
                     const UntangledForm& form, int order) {
    const int degree = order + 2;
    if (degree > jdetail::kMaxExponent)
        throw ConfigError("expand_untangled: requested order exceeds jet capability");
    const Jet full =
        H.taylor_composed(eq.sigma_star[0], eq.sigma_star[1], form.S, degree);
    const double lin = std::max(
        std::max(std::abs(full.coeff(1, 0, 0, 0)), std::abs(full.coeff(0, 1, 0, 0))),
        std::max(std::abs(full.coeff(0, 0, 1, 0)), std::abs(full.coeff(0, 0, 0, 1))));
    if (lin > 1e-10)
        throw NumericalError("expand_untangled: linear terms at the equilibrium exceed 1e-10");
    return full.without_constant_and_linear();
}

namespace {

// cos^a u sin^c u reduced to harmonics: list of (k, is_sin, coeff)
struct TrigEntry {
    int k;
    bool is_sin;
    double coeff;
};

const std::vector<TrigEntry>& trig_power_table(int a, int c) {
    static std::vector<std::vector<std::vector<TrigEntry>>> cache;  // [a][c]
    const std::size_t ua = static_cast<std::size_t>(a), uc = static_cast<std::size_t>(c);
    if (cache.size() > ua && cache[ua].size() > uc && !cache[ua][uc].empty())
        return cache[ua][uc];
    if (cache.size() <= ua) cache.resize(ua + 1);
    if (cache[ua].size() <= uc) cache[ua].resize(uc + 1);
    std::vector<TrigEntry>& out = cache[ua][uc];
    if (a == 0 && c == 0) {
        out = {{0, false, 1.0}};
        return out;
    }
    const bool mul_sin = (a == 0);
    const std::vector<TrigEntry>& base =
        mul_sin ? trig_power_table(a, c - 1) : trig_power_table(a - 1, c);
    std::map<std::pair<int, bool>, double> acc;
    auto put = [&acc](int k, bool is_sin, double coeff) {
        if (k < 0) {
            k = -k;
            if (is_sin) coeff = -coeff;
        }
        if (k == 0 && is_sin) return;
        acc[{k, is_sin}] += coeff;
    };
    for (const TrigEntry& t : base) {
        const double h = 0.5 * t.coeff;
        if (!mul_sin) {  // multiply by cos u
            put(t.k + 1, t.is_sin, h);
            put(t.k - 1, t.is_sin, h);
        } else if (!t.is_sin) {  // cos(k) * sin = .5 sin(k+1) - .5 sin(k-1)
            put(t.k + 1, true, h);
            put(t.k - 1, true, -h);
        } else {  // sin(k) * sin = .5 cos(k-1) - .5 cos(k+1)
            put(t.k - 1, false, h);
            put(t.k + 1, false, -h);
        }
    }
    for (const auto& [key, coeff] : acc)
        if (coeff != 0.0) out.push_back({key.first, key.second, coeff});
    return out;
}

}  // namespace

PoissonSeries to_action_angle(const UntangledForm& form, const Jet& untangled_expansion) {
    const int bound = untangled_expansion.degree();
    SeriesAccum acc(bound);
    for (const auto& t : untangled_expansion.terms()) {
        int a1, a3, c1, c3;
        jdetail::junpack(t.key, a1, a3, c1, c3);
        // S'_j^a s'_j^c -> (2/U*)^{a/2} (2U*)^{c/2} U^{(a+c)/2} cos^a u sin^c u
        const double pref = t.coeff *
                            std::pow(2.0 / form.U_star[0], 0.5 * a1) *
                            std::pow(2.0 * form.U_star[0], 0.5 * c1) *
                            std::pow(2.0 / form.U_star[1], 0.5 * a3) *
                            std::pow(2.0 * form.U_star[1], 0.5 * c3);
        const int l1 = a1 + c1, l3 = a3 + c3;
        for (const TrigEntry& t1 : trig_power_table(a1, c1)) {
            for (const TrigEntry& t3 : trig_power_table(a3, c3)) {
                const double c = pref * t1.coeff * t3.coeff * 0.5;
                // product of trig(k1 u1) and trig(k3 u3)
                if (!t1.is_sin && !t3.is_sin) {
                    acc.add(l1, l3, t1.k, -t3.k, false, c);
                    acc.add(l1, l3, t1.k, t3.k, false, c);
                } else if (t1.is_sin && t3.is_sin) {
                    acc.add(l1, l3, t1.k, -t3.k, false, c);
                    acc.add(l1, l3, t1.k, t3.k, false, -c);
                } else if (t1.is_sin) {
                    acc.add(l1, l3, t1.k, t3.k, true, c);
                    acc.add(l1, l3, t1.k, -t3.k, true, c);
                } else {
                    acc.add(l1, l3, t1.k, t3.k, true, c);
                    acc.add(l1, l3, t1.k, -t3.k, true, -c);
                }
            }
        }
    }
    PoissonSeries raw = acc.freeze();
    // the rescaling sends the quadratic block exactly to omega.U; what is
    // left besides the two diagonal terms is pure roundoff -- verify, drop
    const PoissonSeries q = raw.homogeneous_block(2);
    const double w1 = q.coeff(2, 0, 0, 0, false);
    const double w3 = q.coeff(0, 2, 0, 0, false);
    const double wscale = std::max(std::abs(w1), std::abs(w3));
    SeriesAccum clean(bound);
    for (const Monomial& m : raw.monomials()) {
        if (m.twice_pow[0] + m.twice_pow[1] != 2) {
            clean.add(m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1], m.is_sin,
                      m.coeff);
            continue;
        }
        const bool diag = !m.is_sin && m.harmonic[0] == 0 && m.harmonic[1] == 0 &&
                          (m.twice_pow[0] == 2 || m.twice_pow[1] == 2);
        if (diag) {
            clean.add(m.twice_pow[0], m.twice_pow[1], 0, 0, false, m.coeff);
        } else if (std::abs(m.coeff) > 1e-10 * wscale) {
            throw NumericalError(
                "to_action_angle: quadratic block not reduced to omega.U (residual above "
                "1e-10 relative)");
        }
    }
    return clean.freeze();
}

std::array<double, 4> from_action_angle_point(const UntangledForm& form,
                                              const std::array<double, 2>& U,
                                              const std::array<double, 2>& u) {
    if (U[0] < 0.0 || U[1] < 0.0) throw DomainError("from_action_angle_point: negative action");
    std::array<double, 4> zp{};
    for (int j = 0; j < 2; ++j) {
        zp[j] = std::sqrt(2.0 * U[j] / form.U_star[j]) * std::cos(u[j]);
        zp[2 + j] = std::sqrt(2.0 * U[j] * form.U_star[j]) * std::sin(u[j]);
    }
    std::array<double, 4> z{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) z[r] += form.S[r][c] * zp[c];
    return z;
}

}  // namespace spinorbit
