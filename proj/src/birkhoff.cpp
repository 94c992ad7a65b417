#include "spinorbit/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <cstdlib>

namespace spinorbit {

HomologicalSolution homological_solve(const PoissonSeries& block,
                                      const std::array<double, 2>& omega,
                                      double divisor_floor) {
    HomologicalSolution sol;
    sol.min_divisor = std::numeric_limits<double>::infinity();
    const int bound = block.max_twice_degree();
    SeriesAccum zacc(bound), cacc(bound);
    for (const Monomial& m : block.monomials()) {
        if (m.harmonic[0] == 0 && m.harmonic[1] == 0) {
            zacc.add(m.twice_pow[0], m.twice_pow[1], 0, 0, m.is_sin, m.coeff);
            continue;
        }
        const double kw = m.harmonic[0] * omega[0] + m.harmonic[1] * omega[1];
        if (std::abs(kw) < divisor_floor) {
            std::ostringstream msg;
            msg << "homological_solve: resonant divisor k = (" << m.harmonic[0] << ", "
                << m.harmonic[1] << "), |k.omega| = " << std::abs(kw) << " < floor "
                << divisor_floor;
            throw ResonantDivisorError(msg.str(), m.harmonic[0], m.harmonic[1], kw);
        }
        sol.min_divisor = std::min(sol.min_divisor, std::abs(kw));
        // a cos(k.u) -> (a/k.omega) sin(k.u);  a sin(k.u) -> -(a/k.omega) cos(k.u)
        if (!m.is_sin)
            cacc.add(m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1], true,
                     m.coeff / kw);
        else
            cacc.add(m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1], false,
                     -m.coeff / kw);
    }
    sol.Z = zacc.freeze();
    sol.chi = cacc.freeze();
    return sol;
}

PoissonSeries lie_transform(const PoissonSeries& f, const PoissonSeries& chi, int bound) {
    if (chi.empty()) return truncate_degree(f, bound);
    SeriesAccum acc(bound);
    acc.add(f);
    PoissonSeries term = truncate_degree(f, bound);
    for (int m = 1; !term.empty(); ++m) {
        term = series_scale(poisson_bracket(term, chi, bound), 1.0 / m);
        acc.add(term);
        if (m > 4 * bound)
            throw NumericalError("lie_transform: series fails to terminate (degree bug?)");
    }
    return acc.freeze();
}

namespace {

NormalForm snapshot(const PoissonSeries& H, int r, int requested_r,
                    const std::vector<PoissonSeries>& Z,
                    const std::vector<PoissonSeries>& gens,
                    const std::array<double, 2>& omega, const NormalizeOptions& opts,
                    int bound, double floor_abs, double min_div,
                    const std::optional<ResonantInfo>& res) {
    NormalForm nf;
    nf.r = r;
    nf.requested_r = requested_r;
    nf.K = opts.K;
    nf.truncation = bound;
    nf.omega = omega;
    nf.Z.assign(Z.begin(), Z.begin() + std::min<std::size_t>(Z.size(), r + 1));
    nf.Z.resize(r + 1, PoissonSeries(bound));
    nf.generators.assign(gens.begin(), gens.begin() + std::min<std::size_t>(gens.size(), r));
    nf.small_divisor_floor = floor_abs;
    nf.min_divisor_seen = min_div;
    nf.resonance = res;
    const int last = std::min(r + opts.K, bound - 2);
    for (int s = r + 1; s <= last; ++s)
        nf.remainder.emplace_back(s, H.homogeneous_block(s + 2));
    return nf;
}

}  // namespace

std::map<int, NormalForm> normalize_orders(const PoissonSeries& H0_series,
                                           const std::array<double, 2>& omega_scaled,
                                           std::vector<int> orders,
                                           const NormalizeOptions& opts) {
    if (orders.empty()) throw ConfigError("normalize: no orders requested");
    std::sort(orders.begin(), orders.end());
    for (int r : orders)
        if (r < 1) throw ConfigError("normalize: order must be >= 1");
    const int rmax = orders.back();
    const int bound = normalization_bound(rmax, opts.K);
    const double floor_abs =
        opts.divisor_floor_rel * std::max(std::abs(omega_scaled[0]), std::abs(omega_scaled[1]));

    PoissonSeries H = truncate_degree(H0_series, bound);
    std::vector<PoissonSeries> Z;   // Z[s], s = 0..
    std::vector<PoissonSeries> gens;
    Z.push_back(H.homogeneous_block(2));  // Z_0 = omega . U
    double min_div = std::numeric_limits<double>::infinity();
    std::map<int, NormalForm> out;
    std::optional<ResonantInfo> res;
    std::size_t next_order_idx = 0;

    int s = 1;
    for (; s <= rmax; ++s) {
        const PoissonSeries block = H.homogeneous_block(s + 2);
        HomologicalSolution sol;
        try {
            sol = homological_solve(block, omega_scaled, floor_abs);
        } catch (const ResonantDivisorError& err) {
            res = ResonantInfo{s, err.k1, err.k3, err.divisor};
            break;
        }
        min_div = std::min(min_div, sol.min_divisor);
        Z.push_back(sol.Z);
        gens.push_back(sol.chi);
        if (!sol.chi.empty()) {
            H = lie_transform(H, sol.chi, bound);
            if (H.size() > opts.term_budget)
                throw ResourceError("normalize: term budget exceeded", s);
            // the transform cancels the angle part of block s exactly; replace
            // the block by its normal part to drop the O(eps_mach) residue
            H = [&] {
                SeriesAccum a2(bound);
                for (const Monomial& m : H.monomials())
                    if (m.twice_pow[0] + m.twice_pow[1] != s + 2)
                        a2.add(m.twice_pow[0], m.twice_pow[1], m.harmonic[0], m.harmonic[1],
                               m.is_sin, m.coeff);
                a2.add(sol.Z);
                return a2.freeze();
            }();
        }
        // snapshot when this order completes a requested r
        while (next_order_idx < orders.size() && orders[next_order_idx] == s) {
            out.emplace(s, snapshot(H, s, s, Z, gens, omega_scaled, opts, bound, floor_abs,
                                    min_div, std::nullopt));
            ++next_order_idx;
        }
    }
    if (res) {
        const int safe = res->order - 1;
        while (next_order_idx < orders.size()) {
            const int want = orders[next_order_idx];
            out.emplace(want, snapshot(H, std::min(want, safe), want, Z, gens, omega_scaled,
                                       opts, bound, floor_abs, min_div, res));
            ++next_order_idx;
        }
    }
    return out;
}

NormalForm normalize(const PoissonSeries& H0_series, const std::array<double, 2>& omega_scaled,
                     int r, const NormalizeOptions& opts) {
    auto m = normalize_orders(H0_series, omega_scaled, {r}, opts);
    return std::move(m.begin()->second);
}

std::vector<RemainderNorms> remainder_norms(const NormalForm& nf,
                                            const std::array<double, 2>& R) {
    std::vector<RemainderNorms> out;
    out.reserve(nf.remainder.size());
    for (const auto& [s, block] : nf.remainder) {
        RemainderNorms rn;
        rn.s = s;
        for (int j = 0; j < 2; ++j)
            rn.b[j] = weighted_norm_total(bracket_with_action(block, j, nf.truncation), R);
        out.push_back(rn);
    }
    return out;
}

void NormalForm::save(std::ostream& os) const {
    os << "[meta] r " << r << " requested_r " << requested_r << " K " << K << " truncation "
       << truncation << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e %.16e", omega[0], omega[1]);
    os << "[omega] " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.16e", n_rad_day);
    os << "[n_rad_day] " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.16e %.16e", small_divisor_floor, min_divisor_seen);
    os << "[divisors] " << buf << '\n';
    if (resonance) {
        os << "[resonance] " << resonance->order << ' ' << resonance->k1 << ' ' << resonance->k3
           << ' ';
        std::snprintf(buf, sizeof buf, "%.16e", resonance->divisor);
        os << buf << '\n';
    }
    for (std::size_t s = 0; s < Z.size(); ++s) {
        os << "[Z " << s << "]\n";
        Z[s].dump(os);
    }
    for (std::size_t s = 0; s < generators.size(); ++s) {
        os << "[chi " << (s + 1) << "]\n";
        generators[s].dump(os);
    }
    for (const auto& [s, block] : remainder) {
        os << "[R " << s << "]\n";
        block.dump(os);
    }
}

NormalForm NormalForm::load(std::istream& is) {
    NormalForm nf;
    std::string line;
    enum class Section { None, Z, Chi, R } sec = Section::None;
    int sec_idx = 0;
    SeriesAccum* acc = nullptr;
    std::unique_ptr<SeriesAccum> cur;
    auto flush = [&]() {
        if (!cur) return;
        PoissonSeries s = cur->freeze();
        if (sec == Section::Z) {
            if (static_cast<int>(nf.Z.size()) <= sec_idx) nf.Z.resize(sec_idx + 1);
            nf.Z[sec_idx] = s;
        } else if (sec == Section::Chi) {
            if (static_cast<int>(nf.generators.size()) <= sec_idx - 1)
                nf.generators.resize(sec_idx);
            nf.generators[sec_idx - 1] = s;
        } else if (sec == Section::R) {
            nf.remainder.emplace_back(sec_idx, s);
        }
        cur.reset();
        acc = nullptr;
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '[') {
            std::istringstream ls(line);
            std::string tag;
            ls >> tag;
            if (tag == "[meta]") {
                flush();
                std::string k;
                while (ls >> k) {
                    if (k == "r") ls >> nf.r;
                    else if (k == "requested_r") ls >> nf.requested_r;
                    else if (k == "K") ls >> nf.K;
                    else if (k == "truncation") ls >> nf.truncation;
                }
                sec = Section::None;
            } else if (tag == "[omega]") {
                flush();
                ls >> nf.omega[0] >> nf.omega[1];
                sec = Section::None;
            } else if (tag == "[n_rad_day]") {
                flush();
                ls >> nf.n_rad_day;
                sec = Section::None;
            } else if (tag == "[divisors]") {
                flush();
                std::string a, b;
                ls >> a >> b;  // strtod-based: accepts inf
                nf.small_divisor_floor = std::strtod(a.c_str(), nullptr);
                nf.min_divisor_seen = std::strtod(b.c_str(), nullptr);
                sec = Section::None;
            } else if (tag == "[resonance]") {
                flush();
                ResonantInfo ri{};
                ls >> ri.order >> ri.k1 >> ri.k3 >> ri.divisor;
                nf.resonance = ri;
                sec = Section::None;
            } else if (tag == "[Z" || tag == "[chi" || tag == "[R") {
                flush();
                ls >> sec_idx;
                sec = (tag == "[Z") ? Section::Z : (tag == "[chi") ? Section::Chi : Section::R;
                cur = std::make_unique<SeriesAccum>(nf.truncation);
                acc = cur.get();
            } else {
                throw DomainError("NormalForm::load: unknown section tag: " + tag);
            }
            continue;
        }
        if (!acc) throw DomainError("NormalForm::load: term line outside a section");
        std::istringstream ls(line);
        int l1, l3, k1, k3;
        char parity;
        double coeff;
        if (!(ls >> l1 >> l3 >> k1 >> k3 >> parity >> coeff))
            throw DomainError("NormalForm::load: malformed term line: " + line);
        acc->add(l1, l3, k1, k3, parity == 's', coeff);
    }
    flush();
    return nf;
}

}  // namespace spinorbit
