#ifndef NLPERIM_EXPERIMENTS_HPP
#define NLPERIM_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nlperim/kernel.hpp"

namespace nlperim {

/// Seeded experiment suites reproducing the scaling claims at desk scale.
/// Identical config + seed produces byte-identical CSV output.
struct ExperimentConfig {
  std::string id;
  std::string kernel_path;  // empty: per-experiment default kernel
  std::vector<double> r_list;
  std::vector<int> rho_cells;  // bitmap pixel sizes, in fine cells
  double s = 0.5;
  int trials = 2;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int threads = 0;
};

struct BitmapRow {
  double rho = 0, d_s = 0, per_classical = 0, gap = 0;
};
struct BitmapResult {
  std::vector<BitmapRow> rows;
  double slope = 0;        // log-log fit of D_s vs rho
  double gap_finest = 0;   // classical-perimeter gap at the smallest rho
  double ptilde_ideal = 0; // extrapolated fine-grid reference
  std::string csv;
};
/// Rasterizes the 45-degree unit square at pixel sizes rho = m h and
/// compares fractional in-in energies against the mesh-extrapolated ideal on
/// the common fine grid.
BitmapResult exp_bitmap_discrepancy(double s, const std::vector<int>& rho_cells,
                                    std::uint64_t seed, int fine_n = 896, double h = 1.0 / 512);

struct BvScalingRow {
  std::string family;
  int trial = 0;
  double R = 0;
  double per_over = 0;  // Per_{B_R}(E_min) / R^{n-1}
  double pk_over = 0;   // P_{K,B_R}(E_min) / R^{n-s}
};
struct BvScalingResult {
  std::vector<BvScalingRow> rows;
  double max_family_ratio_per = 0;  // worst max/min across R within a family
  double max_family_ratio_pk = 0;
  std::string csv;
};
BvScalingResult exp_bv_scaling(const Kernel& kernel, const std::vector<double>& r_list,
                               int trials, std::uint64_t seed, int world_n = 256,
                               double h = 0.3, int cutoff = 8);

struct FlatnessDecayRow {
  int trial = 0;
  double R = 0;
  double symdiff = 0;  // to the best halfspace in the central unit ball
};
struct FlatnessDecayResult {
  std::vector<FlatnessDecayRow> rows;
  double fitted_exponent = 0;      // of symdiff ~ R^{-q}
  bool nonincreasing = true;       // within one cell of measure
  std::string csv;
};
/// Minimizers in B_R with seeded wiggly-halfplane exterior data; fixed
/// kernel and mesh, growing R (cells(Omega) = cells_per_unit * R).
FlatnessDecayResult exp_flatness_decay(const Kernel& kernel, const std::vector<double>& r_list,
                                       int trials, std::uint64_t seed, int cells_per_unit = 4,
                                       int cutoff = 8);

struct PerturbationRow {
  std::string set_id, variant;
  double R = 0, t = 0;
  double vx = 0, vy = 0;
  double lhs = 0, rhs = 0, defect = 0;
};
struct PerturbationResult {
  std::vector<PerturbationRow> rows;
  double slack = 0;            // calibrated allowance: defect <= slack * (1 + rhs)
  double refinement_ratio = 0; // defect(h/2)/defect(h) on the calibration case
  bool all_within_slack = true;
  std::string csv;
};
PerturbationResult exp_perturbation(const Kernel& kernel, const std::vector<double>& r_list,
                                    const std::vector<double>& t_multipliers, std::uint64_t seed,
                                    int world_n = 176, double h = 0.2, int cutoff = 10);

struct ProductBoundRow {
  int instance = 0;
  double per_b1 = 0;   // Per_{B_1}(E_min)
  double pk_star = 0;  // P_{K*,B_4}(E_min)
  double rhs = 0;      // sqrt(2) n sqrt(P*) + |S^{n-1}|
  bool pass = false;
};
struct ProductBoundResult {
  std::vector<ProductBoundRow> rows;
  int failures = 0;
  std::string csv;
};
/// BV-estimate check for minimizers in B_4 (10% rasterization slack).
ProductBoundResult exp_stable_product_bound(const Kernel& kernel, int trials, std::uint64_t seed,
                                            int world_n = 144, int cutoff = 24);

/// Writes `csv` to <out_dir>/<name>.csv and a manifest JSON alongside
/// (config hash, kernel hash, code version).  Returns the csv path.
std::string write_experiment_output(const std::string& out_dir, const std::string& name,
                                    const std::string& csv, const std::string& config_desc,
                                    const std::string& kernel_json);

/// CLI entry: dispatch by config.id ("bitmap", "bv-scaling", "flatness",
/// "perturbation", "product-bound").  Returns 0 on pass, 1 on assertion
/// failure.
int run_experiment(const ExperimentConfig& config);

}  // namespace nlperim

#endif
