#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "spinorbit/birkhoff.hpp"
#include "spinorbit/cassini.hpp"

using namespace spinorbit;

namespace {

PoissonSeries mercury_H0(int bound, UntangledForm* form_out = nullptr) {
    const PhysicalParams p = mercury_params();
    const AveragedHamiltonian H = build_averaged_hamiltonian(p);
    const CassiniState eq = find_equilibrium(H);
    const UntangledForm form = untangle(taylor_expand(H, eq, 2), p.n);
    const Jet full = expand_untangled(H, eq, form, bound - 2);
    if (form_out) *form_out = form;
    return to_action_angle(form, full);
}

double max_abs_coeff(const PoissonSeries& f) {
    double m = 0.0;
    for (const auto& t : f.terms()) m = std::max(m, std::abs(t.coeff));
    return m;
}

}  // namespace

TEST_CASE("homological_solve: single harmonic, kernel, divisor floor") {
    const std::array<double, 2> omega{0.7, 0.11};
    // block = U1^{3/2} cos u1 -> Z = 0, chi = (1/omega1) U1^{3/2} sin u1
    const PoissonSeries block = PoissonSeries::single(3, 0, 1, 0, false, 1.0, 10);
    const HomologicalSolution sol = homological_solve(block, omega, 1e-12);
    CHECK(sol.Z.empty());
    CHECK(sol.chi.size() == 1);
    CHECK(sol.chi.coeff(3, 0, 1, 0, true) == doctest::Approx(1.0 / 0.7).epsilon(1e-15));
    CHECK(sol.min_divisor == doctest::Approx(0.7));

    // angle-free block passes through: Z = block, chi = 0
    const PoissonSeries flat = PoissonSeries::single(4, 2, 0, 0, false, 2.5, 10);
    const HomologicalSolution sol2 = homological_solve(flat, omega, 1e-12);
    CHECK(sol2.chi.empty());
    CHECK(sol2.Z == flat);

    // resonant divisor names k
    const std::array<double, 2> res_omega{1.0, 1.0};
    const PoissonSeries bad = PoissonSeries::single(2, 2, 1, -1, false, 1.0, 10);
    CHECK_THROWS_AS(homological_solve(bad, res_omega, 1e-10), ResonantDivisorError);
    try {
        homological_solve(bad, res_omega, 1e-10);
    } catch (const ResonantDivisorError& e) {
        CHECK(e.k1 == 1);
        CHECK(e.k3 == -1);
    }
}

TEST_CASE("homological re-substitution: omega.dchi/du + Z = block") {
    std::mt19937 rng(77);
    std::uniform_int_distribution<int> harm(-3, 3), par(0, 1), pw(0, 3);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0), wdist(0.1, 2.0);
    for (int it = 0; it < 300; ++it) {
        const std::array<double, 2> omega{wdist(rng), 0.17 * wdist(rng)};
        // random homogeneous block of twice-degree 6
        std::vector<Monomial> ms;
        for (int t = 0; t < 5; ++t) {
            Monomial m;
            const int l1 = 2 * pw(rng);
            m.twice_pow = {l1, 6 - l1};
            m.harmonic = {harm(rng), harm(rng)};
            m.is_sin = par(rng) != 0;
            m.coeff = coeff(rng);
            ms.push_back(m);
        }
        const PoissonSeries block = PoissonSeries::from_monomials(ms, 12);
        const HomologicalSolution sol = homological_solve(block, omega, 1e-14);
        // omega . dchi/du: recover with bracket_with_action (= -dchi/du_j)
        SeriesAccum acc(12);
        acc.add(bracket_with_action(sol.chi, 0, 12), -omega[0]);
        acc.add(bracket_with_action(sol.chi, 1, 12), -omega[1]);
        acc.add(sol.Z);
        acc.add(block, -1.0);
        CHECK(max_abs_coeff(acc.freeze()) < 1e-13);
    }
}

TEST_CASE("normalize: synthetic one-degree-of-freedom pendulum-like model") {
    // H = w1 U1 + w3 U3 + eps U1^2 cos 2u1; hand normal form gives
    // Z2 = 0 and Z4 = -eps^2 U1^3 / w1.
    const double w1 = 0.9, w3 = 0.13, eps = 0.05;
    const int bound = 10;
    SeriesAccum acc(bound);
    acc.add(2, 0, 0, 0, false, w1);
    acc.add(0, 2, 0, 0, false, w3);
    acc.add(4, 0, 2, 0, false, eps);
    const PoissonSeries H0 = acc.freeze();
    const NormalForm nf = normalize(H0, {w1, w3}, 4);
    CHECK(nf.r == 4);
    CHECK(!nf.resonance);
    CHECK(nf.Z[1].empty());
    CHECK(nf.Z[2].empty());  // angle average of eps U1^2 cos 2u1 is zero
    CHECK(nf.Z[3].empty());
    CHECK(nf.Z[4].size() == 1);
    CHECK(nf.Z[4].coeff(6, 0, 0, 0, false) ==
          doctest::Approx(-eps * eps / w1).epsilon(1e-14));
    // generator of order 2 as derived by hand: (eps/(2 w1)) U1^2 sin 2u1
    CHECK(nf.generators[1].coeff(4, 0, 2, 0, true) ==
          doctest::Approx(eps / (2.0 * w1)).epsilon(1e-14));
}

TEST_CASE("normalize: resonant divisor stops at the last safe order") {
    const int bound = 10;
    SeriesAccum acc(bound);
    acc.add(2, 0, 0, 0, false, 1.0);
    acc.add(0, 2, 0, 0, false, 1.0);          // omega = (1, 1): 1:1 resonance
    acc.add(3, 0, 1, 0, false, 0.1);          // normalizable block s = 1
    acc.add(2, 2, 1, -1, false, 0.05);        // hits k.omega = 0 at s = 2
    const PoissonSeries H0 = acc.freeze();
    const NormalForm nf = normalize(H0, {1.0, 1.0}, 6);
    CHECK(nf.requested_r == 6);
    CHECK(nf.r == 1);
    REQUIRE(nf.resonance.has_value());
    CHECK(nf.resonance->order == 2);
    CHECK(nf.resonance->k1 == 1);
    CHECK(nf.resonance->k3 == -1);
}

TEST_CASE("Mercury normal form at r = 8: structure and identity") {
    const int r = 8, K = 4;
    const int bound = normalization_bound(r, K);
    UntangledForm form;
    const PoissonSeries H0 = mercury_H0(bound, &form);
    const NormalForm nf = normalize(H0, form.omega_scaled, r);
    CHECK(nf.r == r);
    CHECK(!nf.resonance);
    CHECK(nf.min_divisor_seen > 0.0);
    CHECK(nf.small_divisor_floor > 0.0);

    // odd blocks identically zero, even blocks angle-free
    for (int s = 1; s <= r; s += 2) CHECK(nf.Z[s].empty());
    for (int s = 0; s <= r; s += 2)
        for (const Monomial& m : nf.Z[s].monomials()) {
            CHECK(m.harmonic[0] == 0);
            CHECK(m.harmonic[1] == 0);
            CHECK_FALSE(m.is_sin);
        }

    // remainder blocks: K of them, homogeneous of twice-degree s+2
    REQUIRE(nf.remainder.size() == static_cast<std::size_t>(K));
    for (const auto& [s, block] : nf.remainder)
        for (const Monomial& m : block.monomials())
            CHECK(m.twice_pow[0] + m.twice_pow[1] == s + 2);

    // normal-form identity: re-apply the generators to the original series
    PoissonSeries Hc = truncate_degree(H0, bound);
    for (const PoissonSeries& chi : nf.generators) Hc = lie_transform(Hc, chi, bound);
    double scale = 0.0;
    for (int s = 0; s <= r; ++s) scale = std::max(scale, max_abs_coeff(nf.Z[s]));
    for (int s = 1; s <= r; ++s) {
        SeriesAccum diff(bound);
        diff.add(Hc.homogeneous_block(s + 2));
        diff.add(nf.Z[s], -1.0);
        CHECK(max_abs_coeff(diff.freeze()) < 1e-10 * scale);
    }

    // action conservation under the Z-only flow: Z is angle-free, so the
    // bracket {U_j, Z} vanishes identically
    for (int s = 0; s <= r; ++s)
        for (int j = 0; j < 2; ++j)
            CHECK(bracket_with_action(nf.Z[s], j, bound).empty());
}

TEST_CASE("normalize_orders snapshots equal dedicated runs") {
    const int bound = normalization_bound(8, 4);
    UntangledForm form;
    const PoissonSeries H0 = mercury_H0(bound, &form);
    const auto multi = normalize_orders(H0, form.omega_scaled, {4, 8});
    const NormalForm solo = normalize(H0, form.omega_scaled, 4);
    const NormalForm& snap = multi.at(4);
    REQUIRE(snap.Z.size() == solo.Z.size());
    for (std::size_t s = 0; s < solo.Z.size(); ++s) CHECK(snap.Z[s] == solo.Z[s]);
    REQUIRE(snap.generators.size() == solo.generators.size());
    for (std::size_t s = 0; s < solo.generators.size(); ++s)
        CHECK(snap.generators[s] == solo.generators[s]);
    REQUIRE(snap.remainder.size() == solo.remainder.size());
    for (std::size_t k = 0; k < solo.remainder.size(); ++k) {
        CHECK(snap.remainder[k].first == solo.remainder[k].first);
        CHECK(snap.remainder[k].second == solo.remainder[k].second);
    }
}

TEST_CASE("remainder_norms: definition and rescaling law") {
    const int r = 6, K = 4;
    const int bound = normalization_bound(r, K);
    UntangledForm form;
    const PoissonSeries H0 = mercury_H0(bound, &form);
    NormalForm nf = normalize(H0, form.omega_scaled, r);
    const std::array<double, 2> R{3e-5, 8e-5};
    const auto n1 = remainder_norms(nf, R);
    const auto n2 = remainder_norms(nf, {2.0 * R[0], 2.0 * R[1]});
    REQUIRE(n1.size() == n2.size());
    for (std::size_t k = 0; k < n1.size(); ++k) {
        const int s = n1[k].s;
        for (int j = 0; j < 2; ++j) {
            if (n1[k].b[j] == 0.0) {
                CHECK(n2[k].b[j] == 0.0);
                continue;
            }
            // {U_j, R_s} keeps the U-powers of R_s: norm scales by 2^{(s+2)/2}
            CHECK(n2[k].b[j] / n1[k].b[j] ==
                  doctest::Approx(std::pow(2.0, 0.5 * (s + 2))).epsilon(1e-12));
        }
    }
    // explicit agreement with the bracket-then-norm route
    for (const auto& [s, block] : nf.remainder) {
        for (int j = 0; j < 2; ++j) {
            const double direct =
                weighted_norm_total(poisson_bracket(
                                        PoissonSeries::single(2 * (j == 0), 2 * (j == 1), 0, 0,
                                                              false, 1.0, bound),
                                        block, bound),
                                    R);
            double stored = 0.0;
            for (const auto& rn : remainder_norms(nf, R))
                if (rn.s == s) stored = rn.b[j];
            CHECK(stored == doctest::Approx(direct).epsilon(1e-12));
        }
    }
    // zero remainder: all norms vanish
    nf.remainder.clear();
    nf.remainder.emplace_back(r + 1, PoissonSeries(bound));
    const auto nz = remainder_norms(nf, R);
    CHECK(nz.size() == 1);
    CHECK(nz[0].b[0] == 0.0);
    CHECK(nz[0].b[1] == 0.0);
}

TEST_CASE("normal form serialization round-trip") {
    const int r = 4, K = 4;
    const int bound = normalization_bound(r, K);
    UntangledForm form;
    const PoissonSeries H0 = mercury_H0(bound, &form);
    NormalForm nf = normalize(H0, form.omega_scaled, r);
    nf.n_rad_day = mercury_params().n;
    std::ostringstream os;
    nf.save(os);
    std::istringstream is(os.str());
    const NormalForm back = NormalForm::load(is);
    CHECK(back.r == nf.r);
    CHECK(back.K == nf.K);
    CHECK(back.truncation == nf.truncation);
    CHECK(back.omega[0] == nf.omega[0]);
    CHECK(back.omega[1] == nf.omega[1]);
    CHECK(back.n_rad_day == nf.n_rad_day);
    REQUIRE(back.Z.size() == nf.Z.size());
    for (std::size_t s = 0; s < nf.Z.size(); ++s) CHECK(back.Z[s] == nf.Z[s]);
    REQUIRE(back.generators.size() == nf.generators.size());
    for (std::size_t s = 0; s < nf.generators.size(); ++s)
        CHECK(back.generators[s] == nf.generators[s]);
    REQUIRE(back.remainder.size() == nf.remainder.size());
    for (std::size_t k = 0; k < nf.remainder.size(); ++k) {
        CHECK(back.remainder[k].first == nf.remainder[k].first);
        CHECK(back.remainder[k].second == nf.remainder[k].second);
    }
}
