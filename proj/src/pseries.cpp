#include "spinorbit/pseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace spinorbit {

namespace {

constexpr double kPruneThreshold = 1e-300;
constexpr int kMaxHarmonic = detail::kHarmOffset - 1;
constexpr int kMaxTwicePow = 511;

void check_ranges(int l1, int l3, int k1, int k3) {
    if (l1 < 0 || l3 < 0)
        throw DomainError("PoissonSeries: negative action power");
    if (l1 > kMaxTwicePow || l3 > kMaxTwicePow)
        throw DomainError("PoissonSeries: action power exceeds representable range");
    if (std::abs(k1) > kMaxHarmonic || std::abs(k3) > kMaxHarmonic)
        throw DomainError("PoissonSeries: harmonic exceeds representable range");
}

}  // namespace

struct SeriesAccum::Impl {
    std::unordered_map<std::uint64_t, double> cells;
};

SeriesAccum::SeriesAccum(int max_twice_degree) : impl_(new Impl), bound_(max_twice_degree) {
    impl_->cells.reserve(256);
}

SeriesAccum::~SeriesAccum() { delete impl_; }

void SeriesAccum::add(int l1, int l3, int k1, int k3, bool is_sin, double coeff) {
    if (coeff == 0.0) return;
    if (l1 + l3 > bound_) return;
    check_ranges(l1, l3, k1, k3);
    if (k1 < 0 || (k1 == 0 && k3 < 0)) {
        k1 = -k1;
        k3 = -k3;
        if (is_sin) coeff = -coeff;
    }
    if (is_sin && k1 == 0 && k3 == 0) return;  // identically zero
    impl_->cells[detail::pack_key(l1, l3, k1, k3, is_sin)] += coeff;
}

void SeriesAccum::add(const PoissonSeries& s, double scale) {
    if (scale == 0.0) return;
    for (const auto& t : s.terms()) {
        if (detail::key_twice_degree(t.key) > bound_) continue;
        impl_->cells[t.key] += scale * t.coeff;
    }
}

PoissonSeries SeriesAccum::freeze() {
    PoissonSeries out(bound_);
    out.terms_.reserve(impl_->cells.size());
    for (const auto& [key, c] : impl_->cells)
        if (std::abs(c) > kPruneThreshold) out.terms_.push_back({key, c});
    impl_->cells.clear();
    std::sort(out.terms_.begin(), out.terms_.end(),
              [](const PoissonSeries::Term& a, const PoissonSeries::Term& b) { return a.key < b.key; });
    return out;
}

PoissonSeries PoissonSeries::from_monomials(const std::vector<Monomial>& terms,
                                            int max_twice_degree) {
    SeriesAccum acc(max_twice_degree);
    for (const auto& m : terms)
        acc.add(m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1], m.is_sin, m.coeff);
    return acc.freeze();
}

PoissonSeries PoissonSeries::single(int l1, int l3, int k1, int k3, bool is_sin, double coeff,
                                    int max_twice_degree) {
    SeriesAccum acc(max_twice_degree);
    acc.add(l1, l3, k1, k3, is_sin, coeff);
    return acc.freeze();
}

PoissonSeries PoissonSeries::constant(double value, int max_twice_degree) {
    return single(0, 0, 0, 0, false, value, max_twice_degree);
}

std::vector<Monomial> PoissonSeries::monomials() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        Monomial m;
        detail::unpack_key(t.key, m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1],
                           m.is_sin);
        m.coeff = t.coeff;
        out.push_back(m);
    }
    return out;
}

PoissonSeries PoissonSeries::homogeneous_block(int deg) const {
    PoissonSeries out(max_twice_degree_);
    const std::uint64_t lo = static_cast<std::uint64_t>(deg) << 36;
    const std::uint64_t hi = static_cast<std::uint64_t>(deg + 1) << 36;
    auto first = std::lower_bound(terms_.begin(), terms_.end(), lo,
                                  [](const Term& t, std::uint64_t v) { return t.key < v; });
    auto last = std::lower_bound(first, terms_.end(), hi,
                                 [](const Term& t, std::uint64_t v) { return t.key < v; });
    out.terms_.assign(first, last);
    return out;
}

int PoissonSeries::top_twice_degree() const {
    return terms_.empty() ? 0 : detail::key_twice_degree(terms_.back().key);
}

double PoissonSeries::coeff(int l1, int l3, int k1, int k3, bool is_sin) const {
    double sign = 1.0;
    if (k1 < 0 || (k1 == 0 && k3 < 0)) {
        k1 = -k1;
        k3 = -k3;
        if (is_sin) sign = -1.0;
    }
    const std::uint64_t key = detail::pack_key(l1, l3, k1, k3, is_sin);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, std::uint64_t v) { return t.key < v; });
    if (it != terms_.end() && it->key == key) return sign * it->coeff;
    return 0.0;
}

void PoissonSeries::dump(std::ostream& os) const {
    char buf[64];
    for (const auto& t : terms_) {
        int l1, l3, k1, k3;
        bool is_sin;
        detail::unpack_key(t.key, l1, l3, k1, k3, is_sin);
        std::snprintf(buf, sizeof buf, "%.16e", t.coeff);
        os << l1 << ' ' << l3 << ' ' << k1 << ' ' << k3 << ' ' << (is_sin ? 's' : 'c') << ' '
           << buf << '\n';
    }
}

PoissonSeries PoissonSeries::parse(std::istream& is, int max_twice_degree) {
    SeriesAccum acc(max_twice_degree);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int l1, l3, k1, k3;
        char parity;
        double coeff;
        if (!(ls >> l1 >> l3 >> k1 >> k3 >> parity >> coeff))
            throw DomainError("PoissonSeries::parse: malformed term line: " + line);
        acc.add(l1, l3, k1, k3, parity == 's', coeff);
    }
    return acc.freeze();
}

namespace {

// Product of trig factors T_p(a.u) * T_q(b.u) -> two halves via product-to-sum;
// emits into the accumulator with the given action powers and coefficient.
inline void emit_trig_product(SeriesAccum& acc, int l1, int l3, int a1, int a3, bool pa, int b1,
                              int b3, bool pb, double c) {
    const double h = 0.5 * c;
    if (!pa && !pb) {          // cos cos = .5 cos(a-b) + .5 cos(a+b)
        acc.add(l1, l3, a1 - b1, a3 - b3, false, h);
        acc.add(l1, l3, a1 + b1, a3 + b3, false, h);
    } else if (pa && pb) {     // sin sin = .5 cos(a-b) - .5 cos(a+b)
        acc.add(l1, l3, a1 - b1, a3 - b3, false, h);
        acc.add(l1, l3, a1 + b1, a3 + b3, false, -h);
    } else if (pa && !pb) {    // sin cos = .5 sin(a+b) + .5 sin(a-b)
        acc.add(l1, l3, a1 + b1, a3 + b3, true, h);
        acc.add(l1, l3, a1 - b1, a3 - b3, true, h);
    } else {                   // cos sin = .5 sin(a+b) - .5 sin(a-b)
        acc.add(l1, l3, a1 + b1, a3 + b3, true, h);
        acc.add(l1, l3, a1 - b1, a3 - b3, true, -h);
    }
}

}  // namespace

PoissonSeries series_mul(const PoissonSeries& f, const PoissonSeries& g, int bound) {
    SeriesAccum acc(bound);
    for (const auto& tf : f.terms()) {
        const int df = detail::key_twice_degree(tf.key);
        if (df > bound) break;
        int fl1, fl3, fk1, fk3;
        bool fp;
        detail::unpack_key(tf.key, fl1, fl3, fk1, fk3, fp);
        for (const auto& tg : g.terms()) {
            const int dg = detail::key_twice_degree(tg.key);
            if (df + dg > bound) break;  // g sorted by degree
            int gl1, gl3, gk1, gk3;
            bool gp;
            detail::unpack_key(tg.key, gl1, gl3, gk1, gk3, gp);
            emit_trig_product(acc, fl1 + gl1, fl3 + gl3, fk1, fk3, fp, gk1, gk3, gp,
                              tf.coeff * tg.coeff);
        }
    }
    return acc.freeze();
}

PoissonSeries poisson_bracket(const PoissonSeries& f, const PoissonSeries& g, int bound) {
    SeriesAccum acc(bound);
    for (const auto& tf : f.terms()) {
        int fl[2], fk[2];
        bool fp;
        detail::unpack_key(tf.key, fl[0], fl[1], fk[0], fk[1], fp);
        const int df = detail::key_twice_degree(tf.key);
        for (const auto& tg : g.terms()) {
            const int dg = detail::key_twice_degree(tg.key);
            if (df + dg - 2 > bound) break;
            int gl[2], gk[2];
            bool gp;
            detail::unpack_key(tg.key, gl[0], gl[1], gk[0], gk[1], gp);
            for (int j = 0; j < 2; ++j) {
                int nl1 = fl[0] + gl[0], nl3 = fl[1] + gl[1];
                (j == 0 ? nl1 : nl3) -= 2;
                // df/du_j * dg/dU_j : trig parity of f flips, sign -1 for cos source
                if (fk[j] != 0 && gl[j] != 0) {
                    const double c =
                        tf.coeff * fk[j] * (fp ? 1.0 : -1.0) * tg.coeff * (0.5 * gl[j]);
                    if (nl1 < 0 || nl3 < 0)
                        throw DomainError(
                            "poisson_bracket: negative action power (input outside the "
                            "Lie-transform domain; malformed generator)");
                    emit_trig_product(acc, nl1, nl3, fk[0], fk[1], !fp, gk[0], gk[1], gp, c);
                }
                // - df/dU_j * dg/du_j
                if (fl[j] != 0 && gk[j] != 0) {
                    const double c =
                        -tf.coeff * (0.5 * fl[j]) * tg.coeff * gk[j] * (gp ? 1.0 : -1.0);
                    if (nl1 < 0 || nl3 < 0)
                        throw DomainError(
                            "poisson_bracket: negative action power (input outside the "
                            "Lie-transform domain; malformed generator)");
                    emit_trig_product(acc, nl1, nl3, fk[0], fk[1], fp, gk[0], gk[1], !gp, c);
                }
            }
        }
    }
    return acc.freeze();
}

PoissonSeries series_add(const PoissonSeries& f, const PoissonSeries& g, double scale) {
    SeriesAccum acc(std::max(f.max_twice_degree(), g.max_twice_degree()));
    acc.add(f);
    acc.add(g, scale);
    return acc.freeze();
}

PoissonSeries series_scale(const PoissonSeries& f, double scale) {
    SeriesAccum acc(f.max_twice_degree());
    acc.add(f, scale);
    return acc.freeze();
}

std::map<int, double> weighted_norm(const PoissonSeries& f, const std::array<double, 2>& R) {
    if (R[0] <= 0.0 || R[1] <= 0.0)
        throw DomainError("weighted_norm: domain radii must be positive");
    std::map<int, double> out;
    for (const auto& t : f.terms()) {
        int l1, l3, k1, k3;
        bool is_sin;
        detail::unpack_key(t.key, l1, l3, k1, k3, is_sin);
        const int s = l1 + l3 - 2;  // block index: U-degree s/2+1
        out[s] += std::abs(t.coeff) * std::pow(R[0], 0.5 * l1) * std::pow(R[1], 0.5 * l3);
    }
    return out;
}

double weighted_norm_total(const PoissonSeries& f, const std::array<double, 2>& R) {
    if (R[0] <= 0.0 || R[1] <= 0.0)
        throw DomainError("weighted_norm: domain radii must be positive");
    double tot = 0.0;
    for (const auto& t : f.terms()) {
        int l1, l3, k1, k3;
        bool is_sin;
        detail::unpack_key(t.key, l1, l3, k1, k3, is_sin);
        tot += std::abs(t.coeff) * std::pow(R[0], 0.5 * l1) * std::pow(R[1], 0.5 * l3);
    }
    return tot;
}

double evaluate(const PoissonSeries& f, const std::array<double, 2>& U,
                const std::array<double, 2>& u) {
    if (U[0] < 0.0 || U[1] < 0.0)
        throw DomainError("evaluate: negative action value");
    double tot = 0.0;
    for (const auto& t : f.terms()) {
        int l1, l3, k1, k3;
        bool is_sin;
        detail::unpack_key(t.key, l1, l3, k1, k3, is_sin);
        const double phase = k1 * u[0] + k3 * u[1];
        const double trig = is_sin ? std::sin(phase) : std::cos(phase);
        tot += t.coeff * std::pow(U[0], 0.5 * l1) * std::pow(U[1], 0.5 * l3) * trig;
    }
    return tot;
}

PoissonSeries truncate_degree(const PoissonSeries& f, int bound) {
    SeriesAccum acc(bound);
    acc.add(f);
    return acc.freeze();
}

PoissonSeries bracket_with_action(const PoissonSeries& f, int j, int bound) {
    // {U_j, f} = -df/du_j
    SeriesAccum acc(bound);
    for (const auto& t : f.terms()) {
        int l1, l3, k1, k3;
        bool is_sin;
        detail::unpack_key(t.key, l1, l3, k1, k3, is_sin);
        const int kj = (j == 0) ? k1 : k3;
        if (kj == 0) continue;
        // d/du cos = -sin, d/du sin = +cos; overall minus sign for {U_j, .}
        acc.add(l1, l3, k1, k3, !is_sin, -t.coeff * kj * (is_sin ? 1.0 : -1.0));
    }
    return acc.freeze();
}

}  // namespace spinorbit
