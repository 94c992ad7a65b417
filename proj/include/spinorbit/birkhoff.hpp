#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "spinorbit/pseries.hpp"

namespace spinorbit {

/// Diagnostics of a resonant small divisor.
struct ResonantInfo {
    int order;  // the order s that could not be normalized
    int k1;
    int k3;
    double divisor;
};

/// Result of homological_solve at one order.
struct HomologicalSolution {
    PoissonSeries Z;        // angle-free part of the block
    PoissonSeries chi;      // generator solving omega . dchi/du = block - Z
    double min_divisor;     // smallest |k.omega| used (inf when chi empty)
};

/// Birkhoff normal form at order r with K retained remainder blocks.
struct NormalForm {
    int r = 0;                  // order achieved
    int requested_r = 0;
    int K = 4;
    int truncation = 0;                           // twice-degree bound of the run
    std::array<double, 2> omega{};                // scaled frequencies (units of n)
    double n_rad_day = 0.0;                       // mean motion, for time conversion
    std::vector<PoissonSeries> Z;                 // Z[s], s = 0..r (odd entries empty)
    std::vector<PoissonSeries> generators;        // chi[s-1] for s = 1..r
    std::vector<std::pair<int, PoissonSeries>> remainder;  // (s, R_s), s = r+1..r+K
    double small_divisor_floor = 0.0;             // floor used (absolute)
    double min_divisor_seen = 0.0;                // smallest |k.omega| encountered
    std::optional<ResonantInfo> resonance;        // set when the run stopped early

    void save(std::ostream& os) const;
    static NormalForm load(std::istream& is);
};

struct NormalizeOptions {
    int K = 4;
    double divisor_floor_rel = 1e-10;     // floor = rel * max |omega_j|
    std::size_t term_budget = 80'000'000;  // safety net
};

/// Angle-average + generator for one homogeneous block.
/// Throws ResonantDivisorError naming k when |k.omega| < divisor_floor.
HomologicalSolution homological_solve(const PoissonSeries& block,
                                      const std::array<double, 2>& omega,
                                      double divisor_floor);

/// exp(L_chi) f truncated at twice-degree bound: f + {f,chi} + {{f,chi},chi}/2! + ...
PoissonSeries lie_transform(const PoissonSeries& f, const PoissonSeries& chi, int bound);

/// Iterative Lie-series normalization of H0_series up to order r.  On a
/// resonant divisor the run stops and reports the last safe order in the
/// returned form (resonance diagnostics filled).
NormalForm normalize(const PoissonSeries& H0_series, const std::array<double, 2>& omega_scaled,
                     int r, const NormalizeOptions& opts = {});

/// One pass to max(orders) with snapshots at each requested order; the
/// snapshot at r' is bit-identical to a dedicated run at r' under the same
/// truncation bound.
std::map<int, NormalForm> normalize_orders(const PoissonSeries& H0_series,
                                           const std::array<double, 2>& omega_scaled,
                                           std::vector<int> orders,
                                           const NormalizeOptions& opts = {});

/// Componentwise weighted norms of {U_j, R_s} for every retained block.
struct RemainderNorms {
    int s;
    std::array<double, 2> b;  // per action component
};
std::vector<RemainderNorms> remainder_norms(const NormalForm& nf, const std::array<double, 2>& R);

/// Twice-degree truncation bound used for a normalization run: 2(floor((r+K)/2)+1).
inline int normalization_bound(int r, int K) { return 2 * ((r + K) / 2 + 1); }

}  // namespace spinorbit
