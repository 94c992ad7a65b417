#include "spinorbit/jet.hpp"

#include <algorithm>
#include <unordered_map>

namespace spinorbit {

namespace {
constexpr double kPruneThreshold = 1e-300;
}

class JetAccum {
public:
    explicit JetAccum(int degree) : degree_(degree) { cells_.reserve(128); }

    void add(std::uint32_t key, double c) {
        if (c == 0.0) return;
        cells_[key] += c;
    }

    Jet freeze() {
        Jet out(degree_);
        out.terms_.reserve(cells_.size());
        for (const auto& [k, c] : cells_)
            if (std::abs(c) > kPruneThreshold) out.terms_.push_back({k, c});
        std::sort(out.terms_.begin(), out.terms_.end(),
                  [](const Jet::Term& a, const Jet::Term& b) { return a.key < b.key; });
        return out;
    }

private:
    int degree_;
    std::unordered_map<std::uint32_t, double> cells_;
};

Jet Jet::constant(double v, int degree) {
    Jet j(degree);
    if (std::abs(v) > kPruneThreshold) j.terms_.push_back({jdetail::jpack(0, 0, 0, 0), v});
    return j;
}

Jet Jet::variable(int i, double center, int degree) {
    std::array<double, 4> c{0, 0, 0, 0};
    c[i] = 1.0;
    return linear_form(center, c, degree);
}

Jet Jet::linear_form(double center, const std::array<double, 4>& coeffs, int degree) {
    JetAccum acc(degree);
    acc.add(jdetail::jpack(0, 0, 0, 0), center);
    if (degree >= 1) {
        acc.add(jdetail::jpack(1, 0, 0, 0), coeffs[0]);
        acc.add(jdetail::jpack(0, 1, 0, 0), coeffs[1]);
        acc.add(jdetail::jpack(0, 0, 1, 0), coeffs[2]);
        acc.add(jdetail::jpack(0, 0, 0, 1), coeffs[3]);
    }
    return acc.freeze();
}

double Jet::coeff(int a, int b, int c, int d) const {
    const std::uint32_t key = jdetail::jpack(a, b, c, d);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, std::uint32_t v) { return t.key < v; });
    if (it != terms_.end() && it->key == key) return it->coeff;
    return 0.0;
}

Jet Jet::operator+(const Jet& o) const {
    JetAccum acc(std::max(degree_, o.degree_));
    for (const auto& t : terms_) acc.add(t.key, t.coeff);
    for (const auto& t : o.terms_) acc.add(t.key, t.coeff);
    return acc.freeze();
}

Jet Jet::operator-(const Jet& o) const {
    JetAccum acc(std::max(degree_, o.degree_));
    for (const auto& t : terms_) acc.add(t.key, t.coeff);
    for (const auto& t : o.terms_) acc.add(t.key, -t.coeff);
    return acc.freeze();
}

Jet Jet::operator*(const Jet& o) const {
    const int D = std::min(degree_, o.degree_);
    JetAccum acc(D);
    for (const auto& ta : terms_) {
        const int da = jdetail::jdeg(ta.key);
        if (da > D) break;
        for (const auto& tb : o.terms_) {
            if (da + jdetail::jdeg(tb.key) > D) break;  // sorted by degree
            int a1, b1, c1, d1, a2, b2, c2, d2;
            jdetail::junpack(ta.key, a1, b1, c1, d1);
            jdetail::junpack(tb.key, a2, b2, c2, d2);
            if (a1 + a2 > jdetail::kMaxExponent || b1 + b2 > jdetail::kMaxExponent ||
                c1 + c2 > jdetail::kMaxExponent || d1 + d2 > jdetail::kMaxExponent)
                throw DomainError("Jet: exponent exceeds representable range");
            acc.add(jdetail::jpack(a1 + a2, b1 + b2, c1 + c2, d1 + d2), ta.coeff * tb.coeff);
        }
    }
    return acc.freeze();
}

Jet Jet::operator+(double s) const {
    JetAccum acc(degree_);
    for (const auto& t : terms_) acc.add(t.key, t.coeff);
    acc.add(jdetail::jpack(0, 0, 0, 0), s);
    return acc.freeze();
}

Jet Jet::operator-(double s) const { return *this + (-s); }

Jet Jet::operator*(double s) const {
    JetAccum acc(degree_);
    for (const auto& t : terms_) acc.add(t.key, t.coeff * s);
    return acc.freeze();
}

Jet Jet::without_constant_and_linear() const {
    Jet out(degree_);
    out.terms_.reserve(terms_.size());
    for (const auto& t : terms_)
        if (jdetail::jdeg(t.key) >= 2) out.terms_.push_back(t);
    return out;
}

double Jet::eval(const std::array<double, 4>& x) const {
    double tot = 0.0;
    for (const auto& t : terms_) {
        int a, b, c, d;
        jdetail::junpack(t.key, a, b, c, d);
        double m = t.coeff;
        for (int i = 0; i < a; ++i) m *= x[0];
        for (int i = 0; i < b; ++i) m *= x[1];
        for (int i = 0; i < c; ++i) m *= x[2];
        for (int i = 0; i < d; ++i) m *= x[3];
        tot += m;
    }
    return tot;
}

Jet Jet::compose(const std::vector<double>& coeffs) const {
    // hat part (constant removed)
    Jet hat(degree_);
    hat.terms_.reserve(terms_.size());
    for (const auto& t : terms_)
        if (jdetail::jdeg(t.key) >= 1) hat.terms_.push_back(t);
    Jet out = Jet::constant(coeffs.empty() ? 0.0 : coeffs[0], degree_);
    Jet acc = Jet::constant(1.0, degree_);
    for (std::size_t m = 1; m < coeffs.size(); ++m) {
        acc = acc * hat;
        if (acc.empty()) break;
        if (coeffs[m] != 0.0) out = out + acc * coeffs[m];
    }
    return out;
}

Jet recip(const Jet& j) {
    const double g0 = j.constant_part();
    if (g0 == 0.0) throw DomainError("Jet recip: zero constant part");
    std::vector<double> co(static_cast<std::size_t>(j.degree()) + 1);
    double c = 1.0 / g0;
    for (int m = 0; m <= j.degree(); ++m) {
        co[m] = c;
        c *= -1.0 / g0;
    }
    return j.compose(co);
}

Jet Jet::operator/(const Jet& o) const { return *this * recip(o); }

Jet sqrt(const Jet& j) {
    const double g0 = j.constant_part();
    if (g0 <= 0.0) throw DomainError("Jet sqrt: non-positive constant part");
    std::vector<double> co(static_cast<std::size_t>(j.degree()) + 1);
    double c = std::sqrt(g0);
    for (int m = 0; m <= j.degree(); ++m) {
        co[m] = c;
        c *= (0.5 - m) / ((m + 1.0) * g0);
    }
    return j.compose(co);
}

Jet sin(const Jet& j) {
    const double w0 = j.constant_part();
    const double s0 = std::sin(w0), c0 = std::cos(w0);
    std::vector<double> co(static_cast<std::size_t>(j.degree()) + 1);
    double fact = 1.0;
    for (int m = 0; m <= j.degree(); ++m) {
        if (m > 0) fact /= m;
        // d^m sin at w0 cycles s0, c0, -s0, -c0
        const double val = (m % 4 == 0) ? s0 : (m % 4 == 1) ? c0 : (m % 4 == 2) ? -s0 : -c0;
        co[m] = val * fact;
    }
    return j.compose(co);
}

Jet cos(const Jet& j) {
    const double w0 = j.constant_part();
    const double s0 = std::sin(w0), c0 = std::cos(w0);
    std::vector<double> co(static_cast<std::size_t>(j.degree()) + 1);
    double fact = 1.0;
    for (int m = 0; m <= j.degree(); ++m) {
        if (m > 0) fact /= m;
        const double val = (m % 4 == 0) ? c0 : (m % 4 == 1) ? -s0 : (m % 4 == 2) ? -c0 : s0;
        co[m] = val * fact;
    }
    return j.compose(co);
}

}  // namespace spinorbit
