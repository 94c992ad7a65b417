#pragma once

#include <array>
#include <string>
#include <vector>

#include "spinorbit/params.hpp"

namespace spinorbit {

enum class SweepParam { C, Om1Dot, Om2Dot, Ecc, Incl };

const char* sweep_param_token(SweepParam p);
SweepParam sweep_param_from_token(const std::string& token);
/// Sweep range per parameter (c, omega_dot, Omega_dot, e, i in working units).
std::array<double, 2> sweep_param_range(SweepParam p);
void apply_sweep_param(PhysicalParams& params, SweepParam which, double value);

/// An 11x11 parameter-pair study around a fixed base set.
struct SweepPlan {
    SweepParam x = SweepParam::Om2Dot;
    SweepParam y = SweepParam::Incl;
    PhysicalParams base;             // remaining parameters
    int grid = 11;
    int r = 10;                      // normalization order per cell
    int K = 4;
    double rho0 = 1.0;
    double libration_bound = 0.1;
    double divisor_floor_rel = 1e-10;
    int threads = 0;                 // 0 = hardware concurrency

    void validate() const;
    std::string name() const;  // "sweep_<x>-<y>"
};

enum class CellFlag { Ok, Degenerate, Failed };
const char* cell_flag_name(CellFlag f);
CellFlag cell_flag_from_name(const std::string& s);

struct CellResult {
    double log10T = 0.0;       // NaN unless flag == Ok
    double eps_arcmin = 0.0;   // NaN when the equilibrium itself failed
    CellFlag flag = CellFlag::Failed;
};

struct IsoCurve {
    double level_arcmin = 0.0;
    std::vector<std::array<double, 2>> points;  // (x, y) in sweep coordinates
    bool out_of_range = false;
    int rejected = 0;  // points failing the implicit-formula re-verification
};

struct SweepSummary {
    double eps_min = 0.0, eps_max = 0.0;      // arcmin, over cells with valid eps
    double log10T_min = 0.0, log10T_max = 0.0;  // over Ok cells
    int ok = 0, degenerate = 0, failed = 0;
};

struct SweepResult {
    SweepPlan plan;
    std::vector<double> xs, ys;
    std::vector<CellResult> cells;  // row-major, index iy*grid + ix
    std::vector<IsoCurve> iso;      // target and target*(1 +- band)
    SweepSummary summary;

    const CellResult& at(int ix, int iy) const { return cells[iy * plan.grid + ix]; }
};

/// Full pipeline per cell with per-cell failure isolation; cells run on a
/// small worker pool (deterministic assembly).
SweepResult run_grid(const SweepPlan& plan);

/// Marching squares on the eps* grid with per-edge refinement along the
/// equilibrium route; every point re-verified against obliquity_implicit (1%).
std::vector<IsoCurve> iso_obliquity_curve(const SweepResult& result, double target_arcmin = 2.06,
                                          double band = 0.05);

/// Writes <prefix>_grid.csv, <prefix>_iso.csv, <prefix>_summary.json.
void export_contours(const SweepResult& result, const std::string& prefix);

/// Re-read an exported grid (round-trip checks).
struct GridFile {
    std::vector<double> xs, ys;
    std::vector<CellResult> cells;
};
GridFile import_grid_csv(const std::string& path);

}  // namespace spinorbit
