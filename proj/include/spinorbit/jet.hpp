#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spinorbit/errors.hpp"

namespace spinorbit {

// Truncated Taylor polynomials in four variables, used as jets of the averaged
// Hamiltonian.  Exponents pack into one uint32 with the total degree in the
// top bits so term lists sort by degree and truncated products can break early.

namespace jdetail {

inline std::uint32_t jpack(int a, int b, int c, int d) {
    return (static_cast<std::uint32_t>(a + b + c + d) << 24) |
           (static_cast<std::uint32_t>(a) << 18) | (static_cast<std::uint32_t>(b) << 12) |
           (static_cast<std::uint32_t>(c) << 6) | static_cast<std::uint32_t>(d);
}

inline void junpack(std::uint32_t key, int& a, int& b, int& c, int& d) {
    a = static_cast<int>((key >> 18) & 0x3f);
    b = static_cast<int>((key >> 12) & 0x3f);
    c = static_cast<int>((key >> 6) & 0x3f);
    d = static_cast<int>(key & 0x3f);
}

inline int jdeg(std::uint32_t key) { return static_cast<int>(key >> 24); }

constexpr int kMaxExponent = 63;

}  // namespace jdetail

/// Sparse truncated multivariate Taylor polynomial (4 variables).
class Jet {
public:
    struct Term {
        std::uint32_t key;
        double coeff;
    };

    Jet() : degree_(0) {}
    explicit Jet(int degree) : degree_(degree) {}

    static Jet constant(double v, int degree);
    /// center + x_i as a jet.
    static Jet variable(int i, double center, int degree);
    /// center + sum_j coeffs[j] x_j.
    static Jet linear_form(double center, const std::array<double, 4>& coeffs, int degree);

    int degree() const { return degree_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    double coeff(int a, int b, int c, int d) const;
    double constant_part() const { return coeff(0, 0, 0, 0); }

    Jet operator+(const Jet& o) const;
    Jet operator-(const Jet& o) const;
    Jet operator*(const Jet& o) const;
    Jet operator+(double s) const;
    Jet operator-(double s) const;
    Jet operator*(double s) const;
    friend Jet operator+(double s, const Jet& j) { return j + s; }
    friend Jet operator-(double s, const Jet& j) { return (j * -1.0) + s; }
    friend Jet operator*(double s, const Jet& j) { return j * s; }
    Jet operator-() const { return *this * -1.0; }
    Jet operator/(const Jet& o) const;
    Jet operator/(double s) const { return *this * (1.0 / s); }

    /// Drop constant and linear terms (exact removal).
    Jet without_constant_and_linear() const;

    double eval(const std::array<double, 4>& x) const;

    friend Jet sqrt(const Jet& j);
    friend Jet sin(const Jet& j);
    friend Jet cos(const Jet& j);
    friend Jet recip(const Jet& j);

private:
    friend class JetAccum;
    /// sum_m coeffs[m] * (j - j0)^m where j0 is the constant part.
    Jet compose(const std::vector<double>& coeffs) const;

    int degree_;
    std::vector<Term> terms_;  // sorted by key (degree-major)
};

/// Value plus gradient in 4 variables; cheap scalar for ODE right-hand sides.
struct Dual4 {
    double v = 0.0;
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};

    Dual4() = default;
    Dual4(double value) : v(value) {}  // NOLINT: implicit by design
    static Dual4 variable(int i, double value) {
        Dual4 r(value);
        r.d[i] = 1.0;
        return r;
    }

    // hidden friends so a double on either side converts
    friend Dual4 operator+(const Dual4& a, const Dual4& b) {
        Dual4 r(a.v + b.v);
        for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
        return r;
    }
    friend Dual4 operator-(const Dual4& a, const Dual4& b) {
        Dual4 r(a.v - b.v);
        for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
        return r;
    }
    friend Dual4 operator*(const Dual4& a, const Dual4& b) {
        Dual4 r(a.v * b.v);
        for (int i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        return r;
    }
    friend Dual4 operator/(const Dual4& a, const Dual4& b) {
        Dual4 r(a.v / b.v);
        const double inv2 = 1.0 / (b.v * b.v);
        for (int i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
        return r;
    }
    Dual4 operator-() const {
        Dual4 r(-v);
        for (int i = 0; i < 4; ++i) r.d[i] = -d[i];
        return r;
    }
    friend Dual4 sqrt(const Dual4& a) {
        Dual4 r(std::sqrt(a.v));
        const double f = 0.5 / r.v;
        for (int i = 0; i < 4; ++i) r.d[i] = f * a.d[i];
        return r;
    }
    friend Dual4 sin(const Dual4& a) {
        Dual4 r(std::sin(a.v));
        const double c = std::cos(a.v);
        for (int i = 0; i < 4; ++i) r.d[i] = c * a.d[i];
        return r;
    }
    friend Dual4 cos(const Dual4& a) {
        Dual4 r(std::cos(a.v));
        const double s = -std::sin(a.v);
        for (int i = 0; i < 4; ++i) r.d[i] = s * a.d[i];
        return r;
    }
    friend Dual4 recip(const Dual4& a) { return Dual4(1.0) / a; }
};

inline double recip(double x) { return 1.0 / x; }

}  // namespace spinorbit
