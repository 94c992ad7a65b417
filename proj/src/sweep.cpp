#include "spinorbit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "spinorbit/stability.hpp"

namespace spinorbit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* sweep_param_token(SweepParam p) {
    switch (p) {
        case SweepParam::C: return "c";
        case SweepParam::Om1Dot: return "om1dot";
        case SweepParam::Om2Dot: return "om2dot";
        case SweepParam::Ecc: return "ecc";
        case SweepParam::Incl: return "incl";
    }
    return "?";
}

SweepParam sweep_param_from_token(const std::string& token) {
    if (token == "c") return SweepParam::C;
    if (token == "om1dot") return SweepParam::Om1Dot;
    if (token == "om2dot") return SweepParam::Om2Dot;
    if (token == "ecc") return SweepParam::Ecc;
    if (token == "incl") return SweepParam::Incl;
    throw ConfigError("unknown sweep parameter '" + token +
                      "' (expected c, om1dot, om2dot, ecc or incl)");
}

std::array<double, 2> sweep_param_range(SweepParam p) {
    switch (p) {
        case SweepParam::C: return {0.3, 0.4};
        case SweepParam::Om1Dot: return {1e-7, 2e-7};
        case SweepParam::Om2Dot: return {-9e-8, -4e-8};
        case SweepParam::Ecc: return {0.0, 0.4};
        case SweepParam::Incl: return {0.05, 0.2};
    }
    return {0.0, 0.0};
}

void apply_sweep_param(PhysicalParams& params, SweepParam which, double value) {
    switch (which) {
        case SweepParam::C: params.c = value; break;
        case SweepParam::Om1Dot: params.omega_dot = value; break;
        case SweepParam::Om2Dot: params.Omega_dot = value; break;
        case SweepParam::Ecc: params.e = value; break;
        case SweepParam::Incl: params.i = value; break;
    }
}

void SweepPlan::validate() const {
    if (x == y) throw ConfigError("sweep plan: the two swept parameters must differ");
    if (grid != 11) throw ConfigError("sweep plan: grid is fixed at 11 points per axis");
    if (r < 1) throw ConfigError("sweep plan: r must be >= 1");
    base.validate();
}

std::string SweepPlan::name() const {
    return std::string("sweep_") + sweep_param_token(x) + "-" + sweep_param_token(y);
}

const char* cell_flag_name(CellFlag f) {
    switch (f) {
        case CellFlag::Ok: return "ok";
        case CellFlag::Degenerate: return "degenerate";
        case CellFlag::Failed: return "failed";
    }
    return "?";
}

CellFlag cell_flag_from_name(const std::string& s) {
    if (s == "ok") return CellFlag::Ok;
    if (s == "degenerate") return CellFlag::Degenerate;
    if (s == "failed") return CellFlag::Failed;
    throw DomainError("unknown cell flag: " + s);
}

namespace {

PhysicalParams cell_params(const SweepPlan& plan, double xv, double yv) {
    PhysicalParams p = plan.base;
    apply_sweep_param(p, plan.x, xv);
    apply_sweep_param(p, plan.y, yv);
    return p;
}

CellResult compute_cell(const SweepPlan& plan, double xv, double yv) {
    CellResult cell;
    cell.log10T = kNaN;
    cell.eps_arcmin = kNaN;
    PhysicalParams p = cell_params(plan, xv, yv);
    try {
        const AveragedHamiltonian H = build_averaged_hamiltonian(p);
        const CassiniState eq = find_equilibrium(H);
        cell.eps_arcmin = eq.eps_arcmin();
        if (p.e == 0.0) {
            cell.flag = CellFlag::Degenerate;  // longitudinal stiffness vanishes
            return cell;
        }
        const Jet quad = taylor_expand(H, eq, 2);
        const UntangledForm form = untangle(quad);
        const int bound = normalization_bound(plan.r, plan.K);
        const Jet full = expand_untangled(H, eq, form, bound - 2);
        const PoissonSeries H0 = to_action_angle(form, full);
        NormalizeOptions opts;
        opts.K = plan.K;
        opts.divisor_floor_rel = plan.divisor_floor_rel;
        NormalForm nf = normalize(H0, form.omega_scaled, plan.r, opts);
        nf.n_rad_day = p.n;
        const auto R = domain_radii(form, plan.libration_bound);
        std::map<int, NormalForm> byr;
        byr.emplace(nf.r, std::move(nf));
        const StabilityReport rep = effective_time(plan.rho0, byr, R);
        cell.log10T = std::log10(rep.T_years);
        cell.flag = CellFlag::Ok;
    } catch (const NotEllipticError&) {
        cell.flag = CellFlag::Degenerate;
    } catch (const Error&) {
        cell.flag = CellFlag::Failed;
    }
    return cell;
}

/// eps* (arcmin) along the equilibrium route; NaN on failure.
double eps_equilibrium_arcmin(const PhysicalParams& p) {
    try {
        const AveragedHamiltonian H = build_averaged_hamiltonian(p);
        return find_equilibrium(H).eps_arcmin();
    } catch (const Error&) {
        return kNaN;
    }
}

}  // namespace

SweepResult run_grid(const SweepPlan& plan) {
    plan.validate();
    SweepResult res;
    res.plan = plan;
    const auto xr = sweep_param_range(plan.x);
    const auto yr = sweep_param_range(plan.y);
    for (int k = 0; k < plan.grid; ++k) {
        res.xs.push_back(xr[0] + (xr[1] - xr[0]) * k / (plan.grid - 1));
        res.ys.push_back(yr[0] + (yr[1] - yr[0]) * k / (plan.grid - 1));
    }
    const int ncell = plan.grid * plan.grid;
    res.cells.resize(ncell);
    unsigned nthreads = plan.threads > 0 ? static_cast<unsigned>(plan.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(ncell));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int idx = next.fetch_add(1); idx < ncell; idx = next.fetch_add(1)) {
            const int ix = idx % plan.grid, iy = idx / plan.grid;
            res.cells[idx] = compute_cell(plan, res.xs[ix], res.ys[iy]);
        }
    };
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    int any_valid_eps = 0;
    res.summary.eps_min = kInf;
    res.summary.eps_max = -kInf;
    res.summary.log10T_min = kInf;
    res.summary.log10T_max = -kInf;
    for (const CellResult& c : res.cells) {
        switch (c.flag) {
            case CellFlag::Ok: ++res.summary.ok; break;
            case CellFlag::Degenerate: ++res.summary.degenerate; break;
            case CellFlag::Failed: ++res.summary.failed; break;
        }
        if (std::isfinite(c.eps_arcmin)) {
            ++any_valid_eps;
            res.summary.eps_min = std::min(res.summary.eps_min, c.eps_arcmin);
            res.summary.eps_max = std::max(res.summary.eps_max, c.eps_arcmin);
        }
        if (c.flag == CellFlag::Ok && std::isfinite(c.log10T)) {
            res.summary.log10T_min = std::min(res.summary.log10T_min, c.log10T);
            res.summary.log10T_max = std::max(res.summary.log10T_max, c.log10T);
        }
    }
    if (res.summary.ok == 0 && any_valid_eps == 0)
        throw NumericalError("run_grid: all cells failed");
    res.iso = iso_obliquity_curve(res, 2.06, 0.05);
    return res;
}

namespace {

// bisection along a grid edge for eps*(t) = level, t in [0,1]
double refine_edge_crossing(const SweepPlan& plan, double x0, double y0, double x1, double y1,
                            double e0, double e1, double level) {
    double lo = 0.0, hi = 1.0, flo = e0 - level;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double em = eps_equilibrium_arcmin(
            cell_params(plan, x0 + (x1 - x0) * mid, y0 + (y1 - y0) * mid));
        if (!std::isfinite(em)) return (level - e0) / (e1 - e0);  // fall back to linear
        const double fm = em - level;
        if (fm == 0.0) return mid;
        if ((flo > 0) == (fm > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<IsoCurve> iso_obliquity_curve(const SweepResult& result, double target_arcmin,
                                          double band) {
    const SweepPlan& plan = result.plan;
    std::vector<double> levels{target_arcmin};
    if (band > 0.0) {
        levels.push_back(target_arcmin * (1.0 - band));
        levels.push_back(target_arcmin * (1.0 + band));
    }
    const int G = plan.grid;
    std::vector<IsoCurve> out;
    for (double level : levels) {
        IsoCurve curve;
        curve.level_arcmin = level;
        double emin = kInf, emax = -kInf;
        for (const CellResult& c : result.cells)
            if (std::isfinite(c.eps_arcmin)) {
                emin = std::min(emin, c.eps_arcmin);
                emax = std::max(emax, c.eps_arcmin);
            }
        if (!(level >= emin && level <= emax)) {
            curve.out_of_range = true;  // notice: target outside the grid's eps range
            out.push_back(std::move(curve));
            continue;
        }
        auto eps_at = [&](int ix, int iy) { return result.at(ix, iy).eps_arcmin; };
        auto emit = [&](double x, double y) {
            PhysicalParams p = cell_params(plan, x, y);
            double check;
            try {
                check = obliquity_implicit(p) * (180.0 * 60.0 / M_PI);
            } catch (const Error&) {
                ++curve.rejected;
                return;
            }
            if (std::abs(check - level) / level <= 0.01)
                curve.points.push_back({x, y});
            else
                ++curve.rejected;
        };
        // horizontal edges
        for (int iy = 0; iy < G; ++iy)
            for (int ix = 0; ix + 1 < G; ++ix) {
                const double e0 = eps_at(ix, iy), e1 = eps_at(ix + 1, iy);
                if (!std::isfinite(e0) || !std::isfinite(e1)) continue;
                if ((e0 - level) * (e1 - level) < 0.0) {
                    const double t =
                        refine_edge_crossing(plan, result.xs[ix], result.ys[iy],
                                             result.xs[ix + 1], result.ys[iy], e0, e1, level);
                    emit(result.xs[ix] + (result.xs[ix + 1] - result.xs[ix]) * t,
                         result.ys[iy]);
                }
            }
        // vertical edges
        for (int iy = 0; iy + 1 < G; ++iy)
            for (int ix = 0; ix < G; ++ix) {
                const double e0 = eps_at(ix, iy), e1 = eps_at(ix, iy + 1);
                if (!std::isfinite(e0) || !std::isfinite(e1)) continue;
                if ((e0 - level) * (e1 - level) < 0.0) {
                    const double t =
                        refine_edge_crossing(plan, result.xs[ix], result.ys[iy], result.xs[ix],
                                             result.ys[iy + 1], e0, e1, level);
                    emit(result.xs[ix],
                         result.ys[iy] + (result.ys[iy + 1] - result.ys[iy]) * t);
                }
            }
        out.push_back(std::move(curve));
    }
    return out;
}

void export_contours(const SweepResult& result, const std::string& prefix) {
    char buf[128];
    {
        std::ofstream os(prefix + "_grid.csv");
        if (!os) throw ConfigError("export_contours: cannot write " + prefix + "_grid.csv");
        os << "x,y,log10T,eps_arcmin,flag\n";
        for (int iy = 0; iy < result.plan.grid; ++iy)
            for (int ix = 0; ix < result.plan.grid; ++ix) {
                const CellResult& c = result.at(ix, iy);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", result.xs[ix],
                              result.ys[iy], c.log10T, c.eps_arcmin);
                os << buf << cell_flag_name(c.flag) << '\n';
            }
    }
    {
        std::ofstream os(prefix + "_iso.csv");
        if (!os) throw ConfigError("export_contours: cannot write " + prefix + "_iso.csv");
        os << "level_arcmin,x,y\n";
        for (const IsoCurve& curve : result.iso)
            for (const auto& pt : curve.points) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", curve.level_arcmin, pt[0],
                              pt[1]);
                os << buf;
            }
    }
    {
        nlohmann::ordered_json j;
        j["x_param"] = sweep_param_token(result.plan.x);
        j["y_param"] = sweep_param_token(result.plan.y);
        j["r"] = result.plan.r;
        j["rho0"] = result.plan.rho0;
        j["eps_min_arcmin"] = result.summary.eps_min;
        j["eps_max_arcmin"] = result.summary.eps_max;
        j["log10T_min"] = result.summary.log10T_min;
        j["log10T_max"] = result.summary.log10T_max;
        j["cells_ok"] = result.summary.ok;
        j["cells_degenerate"] = result.summary.degenerate;
        j["cells_failed"] = result.summary.failed;
        std::ofstream os(prefix + "_summary.json");
        if (!os)
            throw ConfigError("export_contours: cannot write " + prefix + "_summary.json");
        os << j.dump(2) << '\n';
    }
}

GridFile import_grid_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("import_grid_csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "x,y,log10T,eps_arcmin,flag")
        throw DomainError("import_grid_csv: bad header in " + path);
    GridFile g;
    auto push_unique = [](std::vector<double>& v, double x) {
        if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 5) throw DomainError("import_grid_csv: malformed row: " + line);
        auto num = [&](const std::string& f) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);  // accepts inf and nan
            if (end == f.c_str()) throw DomainError("import_grid_csv: bad number: " + f);
            return v;
        };
        push_unique(g.xs, num(fields[0]));
        push_unique(g.ys, num(fields[1]));
        CellResult c;
        c.log10T = num(fields[2]);
        c.eps_arcmin = num(fields[3]);
        c.flag = cell_flag_from_name(fields[4]);
        g.cells.push_back(c);
    }
    return g;
}

}  // namespace spinorbit
