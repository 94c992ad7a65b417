#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spinorbit/errors.hpp"

namespace spinorbit {

// Truncated Taylor-Fourier series in two action-angle pairs (U1,u1), (U3,u3):
//   f = sum  c * U1^{l1/2} U3^{l3/2} * {cos|sin}(k1 u1 + k3 u3)
// Action powers are stored doubled (l = 2*power), so half-integer powers stay
// exact integers and the total twice-degree l1+l3 is the grading used for
// truncation.  Harmonics are kept in a canonical representative: k1 > 0, or
// k1 == 0 and k3 >= 0; a sine term with k = (0,0) is identically zero and is
// never stored.  Coefficients below 1e-300 in magnitude are pruned.

/// One term of a PoissonSeries, unpacked form.
struct Monomial {
    std::array<int, 2> twice_pow;  // (l1, l3), non-negative
    std::array<int, 2> harmonic;   // (k1, k3), canonical representative
    bool is_sin;                   // parity: false = cos, true = sin
    double coeff;
};

namespace detail {

// packed key layout (high to low): [deg:9][l1:9][k1+4096:13][k3+4096:13][parity:1]
constexpr int kHarmOffset = 4096;
constexpr std::uint64_t kParityBit = 1;

inline std::uint64_t pack_key(int l1, int l3, int k1, int k3, bool is_sin) {
    return (static_cast<std::uint64_t>(l1 + l3) << 36) |
           (static_cast<std::uint64_t>(l1) << 27) |
           (static_cast<std::uint64_t>(k1 + kHarmOffset) << 14) |
           (static_cast<std::uint64_t>(k3 + kHarmOffset) << 1) |
           (is_sin ? kParityBit : 0);
}

inline void unpack_key(std::uint64_t key, int& l1, int& l3, int& k1, int& k3, bool& is_sin) {
    const int deg = static_cast<int>(key >> 36);
    l1 = static_cast<int>((key >> 27) & 0x1ff);
    l3 = deg - l1;
    k1 = static_cast<int>((key >> 14) & 0x1fff) - kHarmOffset;
    k3 = static_cast<int>((key >> 1) & 0x1fff) - kHarmOffset;
    is_sin = (key & kParityBit) != 0;
}

inline int key_twice_degree(std::uint64_t key) { return static_cast<int>(key >> 36); }

}  // namespace detail

/// Sparse immutable Poisson series; terms kept sorted by (degree, l1, k).
class PoissonSeries {
public:
    struct Term {
        std::uint64_t key;
        double coeff;
    };

    PoissonSeries() : max_twice_degree_(0) {}
    explicit PoissonSeries(int max_twice_degree) : max_twice_degree_(max_twice_degree) {}

    /// Build from unpacked monomials; canonicalizes, merges, prunes, truncates.
    static PoissonSeries from_monomials(const std::vector<Monomial>& terms, int max_twice_degree);

    /// Series consisting of a single term (canonicalized).
    static PoissonSeries single(int l1, int l3, int k1, int k3, bool is_sin, double coeff,
                                int max_twice_degree);

    static PoissonSeries constant(double value, int max_twice_degree);

    const std::vector<Term>& terms() const { return terms_; }
    int max_twice_degree() const { return max_twice_degree_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    std::vector<Monomial> monomials() const;

    /// Terms of total twice-degree exactly `deg` (contiguous in storage).
    PoissonSeries homogeneous_block(int deg) const;

    /// Largest twice-degree present (0 for the empty series).
    int top_twice_degree() const;

    /// Coefficient of a given canonical cell (0 if absent).
    double coeff(int l1, int l3, int k1, int k3, bool is_sin) const;

    bool operator==(const PoissonSeries& other) const {
        return terms_.size() == other.terms_.size() &&
               std::equal(terms_.begin(), terms_.end(), other.terms_.begin(),
                          [](const Term& a, const Term& b) {
                              return a.key == b.key && a.coeff == b.coeff;
                          });
    }

    /// Line-oriented text dump, one term per line: `2l1 2l3 k1 k3 parity coeff`.
    void dump(std::ostream& os) const;
    static PoissonSeries parse(std::istream& is, int max_twice_degree);

private:
    friend class SeriesAccum;
    std::vector<Term> terms_;
    int max_twice_degree_;
};

/// Accumulator used by all algebra kernels: canonicalizes and merges terms,
/// then freezes into a sorted immutable series.  Accumulation order is the
/// iteration order of the callers, so results are deterministic.
class SeriesAccum {
public:
    explicit SeriesAccum(int max_twice_degree);
    ~SeriesAccum();

    void add(int l1, int l3, int k1, int k3, bool is_sin, double coeff);
    void add(const PoissonSeries& s, double scale = 1.0);
    PoissonSeries freeze();

    int max_twice_degree() const { return bound_; }

private:
    struct Impl;
    Impl* impl_;
    int bound_;
};

/// f*g with trig products linearized, truncated at twice-degree `bound`.
PoissonSeries series_mul(const PoissonSeries& f, const PoissonSeries& g, int bound);

/// {f,g} = sum_j df/du_j dg/dU_j - df/dU_j dg/du_j, truncated at `bound`.
/// Throws DomainError if a term with a negative action power would survive.
PoissonSeries poisson_bracket(const PoissonSeries& f, const PoissonSeries& g, int bound);

/// f + scale*g (no truncation beyond the larger of the two bounds).
PoissonSeries series_add(const PoissonSeries& f, const PoissonSeries& g, double scale = 1.0);

PoissonSeries series_scale(const PoissonSeries& f, double scale);

/// Weighted norm per homogeneous block: block s (U-degree s/2+1, twice-degree
/// s+2) maps to sum |c| R1^{l1/2} R3^{l3/2}.  Keys of the result are s.
std::map<int, double> weighted_norm(const PoissonSeries& f, const std::array<double, 2>& R);

/// Weighted norm of a single homogeneous series (all terms pooled).
double weighted_norm_total(const PoissonSeries& f, const std::array<double, 2>& R);

/// Numerical value at (U, u); U components must be non-negative.
double evaluate(const PoissonSeries& f, const std::array<double, 2>& U,
                const std::array<double, 2>& u);

/// Drop all terms with twice-degree > bound; idempotent.
PoissonSeries truncate_degree(const PoissonSeries& f, int bound);

/// -d f/du_j (the bracket {U_j, f}); j is 0 or 1.
PoissonSeries bracket_with_action(const PoissonSeries& f, int j, int bound);

}  // namespace spinorbit
