#include "nlperim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "nlperim/energy.hpp"
#include "nlperim/geometry.hpp"
#include "nlperim/mincut.hpp"
#include "nlperim/stability.hpp"

namespace nlperim {

namespace {

std::string fmt_row(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// wiggly halfplane exterior: y <= a1 sin(w1 x + p1) + a2 sin(w2 x + p2)
GridSet wiggly_halfplane(const GridGeometry& g, std::uint64_t seed, double a1 = 1.2,
                         double a2 = 0.8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * 3.14159265358979323846);
  double p1 = uni(rng), p2 = uni(rng);
  GridSet s(g);
  for (int y = 0; y < g.ny; ++y)
    for (int x = 0; x < g.nx; ++x) {
      Vec c = g.center(x, y, 0);
      double b = a1 * std::sin(0.8 * c[0] + p1) + a2 * std::sin(1.7 * c[0] + p2);
      s.bits[g.index(x, y, 0)] = c[1] <= b ? 1 : 0;
    }
  return s;
}

GridSet blob_union(const GridGeometry& g, std::uint64_t seed, int add = 4, int cut = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  GridSet s = rasterize_halfplane(g, {0, 1, 0}, 0.0);
  double half = 0.5 * g.h * (g.nx - 1);
  auto paint = [&](std::uint8_t val) {
    double cx = (2 * uni(rng) - 1) * 0.8 * half;
    double cy = (2 * uni(rng) - 1) * 0.8 * half;
    double r = 1.0 + 2.0 * uni(rng);
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        Vec c = g.center(x, y, 0);
        double dx = c[0] - cx, dy = c[1] - cy;
        if (dx * dx + dy * dy < r * r) s.bits[g.index(x, y, 0)] = val;
      }
  };
  for (int i = 0; i < add; ++i) paint(1);
  for (int i = 0; i < cut; ++i) paint(0);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Motivation A: bitmap discrepancy

BitmapResult exp_bitmap_discrepancy(double s, const std::vector<int>& rho_cells,
                                    std::uint64_t seed, int fine_n, double h) {
  (void)seed;  // fully deterministic geometry
  GridGeometry g = make_world(2, fine_n, h);
  const double rad = std::sqrt(2.0) / 2.0;
  // tiny center offset keeps pixel centers off the ideal boundary
  const double cx = 0.31 * h, cy = 0.17 * h;
  auto inside = [&](double px, double py) {
    return std::fabs(px - cx) + std::fabs(py - cy) <= rad;
  };
  double lo_x = g.origin[0] - 0.5 * h, lo_y = g.origin[1] - 0.5 * h;
  auto raster = [&](int m) {
    GridSet e(g);
    int blocks = fine_n / m;
    for (int bj = 0; bj < blocks; ++bj)
      for (int bi = 0; bi < blocks; ++bi) {
        double px = lo_x + m * h * (bi + 0.5), py = lo_y + m * h * (bj + 0.5);
        if (!inside(px, py)) continue;
        for (int y = bj * m; y < (bj + 1) * m; ++y)
          for (int x = bi * m; x < (bi + 1) * m; ++x) e.bits[g.index(x, y, 0)] = 1;
      }
    return e;
  };

  Kernel kern = make_kernel(KernelFamily::Fractional, 2, {.s = s});
  InteractionWeights W = build_weights(kern, g, fine_n);
  std::vector<double> ones(std::size_t(g.cells()), 1.0);
  auto conv_ones = convolve_stencil(ones, W, InteractionMethod::Convolution);

  auto ptilde = [&](const GridSet& e) {
    std::vector<double> u(e.bits.begin(), e.bits.end());
    auto conv_u = convolve_stencil(u, W, InteractionMethod::Convolution);
    Accum acc;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (e.bits[i]) acc.add(conv_ones[i] - conv_u[i]);
    return acc.value();
  };

  double p1 = ptilde(raster(1));
  double p2 = ptilde(raster(2));
  BitmapResult res;
  res.ptilde_ideal = p1 + (p1 - p2) / (std::pow(2.0, 1.0 - s) - 1.0);

  DomainMask full = make_full_domain(g);
  res.csv = "rho,d_s,per_classical,gap\n";
  std::vector<double> xs, ys;
  for (int m : rho_cells) {
    if (fine_n % m != 0) throw std::invalid_argument("rho must divide the fine resolution");
    GridSet em = raster(m);
    BitmapRow row;
    row.rho = m * h;
    row.d_s = std::fabs(res.ptilde_ideal - ptilde(em));
    row.per_classical = classical_perimeter(em, full);
    row.gap = row.per_classical - 4.0;
    res.rows.push_back(row);
    xs.push_back(row.rho);
    ys.push_back(row.d_s);
    res.csv += fmt_row("%.17g,%.17g,%.17g,%.17g\n", row.rho, row.d_s, row.per_classical, row.gap);
  }
  res.slope = loglog_slope(xs, ys);
  res.gap_finest = res.rows.empty() ? 0.0 : res.rows.front().gap;
  for (const auto& r : res.rows)
    if (r.rho < res.rows.front().rho) res.gap_finest = r.gap;
  return res;
}

// ---------------------------------------------------------------------------
// BV scaling of minimizers

BvScalingResult exp_bv_scaling(const Kernel& kernel, const std::vector<double>& r_list,
                               int trials, std::uint64_t seed, int world_n, double h,
                               int cutoff) {
  GridGeometry g = make_world(2, world_n, h);
  InteractionWeights W = build_weights(kernel, g, cutoff);
  BvScalingResult res;
  res.csv = "family,trial,R,per_over_R,pk_over_R\n";
  const char* families[] = {"halfplane", "wiggly", "blobs"};
  res.max_family_ratio_per = 1.0;
  res.max_family_ratio_pk = 1.0;
  for (int fi = 0; fi < 3; ++fi) {
    int fam_trials = fi == 0 ? 1 : trials;
    for (int tr = 0; tr < fam_trials; ++tr) {
      std::vector<double> pers, pks;
      for (double R : r_list) {
        GridSet ext;
        std::uint64_t ts = stream_seed(seed, std::uint64_t(fi) * 1000 + tr);
        if (fi == 0)
          ext = rasterize_halfplane(g, {0, 1, 0}, 0.0);
        else if (fi == 1)
          ext = wiggly_halfplane(g, ts);
        else
          ext = blob_union(g, ts);
        DomainMask dom = make_ball_domain(g, {0, 0, 0}, R, ext);
        MinimizeResult mr = minimize(dom, W);
        BvScalingRow row;
        row.family = families[fi];
        row.trial = tr;
        row.R = R;
        row.per_over = classical_perimeter(mr.e_min, dom) / std::pow(R, g.dim - 1.0);
        row.pk_over = mr.energy / std::pow(R, g.dim - kernel.s);
        res.rows.push_back(row);
        pers.push_back(row.per_over);
        pks.push_back(row.pk_over);
        res.csv += fmt_row("%s,%d,%.17g,%.17g,%.17g\n", families[fi], tr, R, row.per_over,
                           row.pk_over);
      }
      auto ratio = [](const std::vector<double>& v) {
        double lo = 1e300, hi = 0;
        for (double x : v) {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        if (hi <= 1e-12) return 1.0;  // degenerate family (e.g. all ones)
        return hi / std::max(lo, 1e-300);
      };
      res.max_family_ratio_per = std::max(res.max_family_ratio_per, ratio(pers));
      res.max_family_ratio_pk = std::max(res.max_family_ratio_pk, ratio(pks));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// flatness decay

FlatnessDecayResult exp_flatness_decay(const Kernel& kernel, const std::vector<double>& r_list,
                                       int trials, std::uint64_t seed, int cells_per_unit,
                                       int cutoff) {
  FlatnessDecayResult res;
  res.csv = "trial,R,symdiff\n";
  double h = 1.0 / cells_per_unit;
  std::vector<std::vector<double>> per_trial(trials);
  for (int tr = 0; tr < trials; ++tr) {
    std::uint64_t ts = stream_seed(seed, tr);
    for (double R : r_list) {
      int rho_cells = int(std::lround(R * cells_per_unit));
      int world_n = 2 * rho_cells + 2 * (cutoff + 4);
      GridGeometry g = make_world(2, world_n, h);
      InteractionWeights W = build_weights(kernel, g, cutoff);
      GridSet ext = wiggly_halfplane(g, ts, 1.5, 0.9);
      DomainMask dom = make_ball_domain(g, {0, 0, 0}, R, ext);
      MinimizeResult mr = minimize(dom, W);
      DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, ext);
      HalfspaceFit fit = best_halfspace_fit(mr.e_min, b1, 64);
      FlatnessDecayRow row{tr, R, fit.symdiff};
      res.rows.push_back(row);
      per_trial[tr].push_back(fit.symdiff);
      res.csv += fmt_row("%d,%.17g,%.17g\n", tr, R, fit.symdiff);
    }
  }
  // nonincreasing within one cell of measure; exponent fit on trial means
  double cell = h * h;
  std::vector<double> mean(r_list.size(), 0.0);
  for (int tr = 0; tr < trials; ++tr)
    for (std::size_t i = 0; i < r_list.size(); ++i) {
      mean[i] += per_trial[tr][i] / trials;
      if (i > 0 && per_trial[tr][i] > per_trial[tr][i - 1] + cell + 1e-12)
        res.nonincreasing = false;
    }
  std::vector<double> xs(r_list.begin(), r_list.end()), ys;
  for (double m : mean) ys.push_back(std::max(m, 1e-12));
  res.fitted_exponent = -loglog_slope(xs, ys);
  return res;
}

// ---------------------------------------------------------------------------
// perturbation defects (Lemma-2A harness)

PerturbationResult exp_perturbation(const Kernel& kernel, const std::vector<double>& r_list,
                                    const std::vector<double>& t_multipliers, std::uint64_t seed,
                                    int world_n, double h, int cutoff) {
  PerturbationResult res;
  res.csv = "set,variant,R,t,vx,vy,lhs,rhs,defect\n";

  auto run_rows = [&](const GridGeometry& g, const InteractionWeights& W,
                      const InteractionWeights& Wstar, const GridSet& e, const std::string& id,
                      std::vector<PerturbationRow>& out) {
    for (auto variant : {PerturbVariant::Linear, PerturbVariant::Log})
      for (double R : r_list)
        for (double tm : t_multipliers)
          for (int axis = 0; axis < 2; ++axis) {
            Vec v = axis == 0 ? Vec{0, 1, 0} : Vec{1, 0, 0};
            double t = tm * g.h;
            if (std::fabs(t) >= 1.0) continue;
            auto d = lemma2a_defect(e, R, t, v, variant, W, Wstar);
            PerturbationRow row;
            row.set_id = id;
            row.variant = variant == PerturbVariant::Linear ? "linear" : "log";
            row.R = R;
            row.t = t;
            row.vx = v[0];
            row.vy = v[1];
            row.lhs = d.lhs;
            row.rhs = d.rhs;
            row.defect = d.defect;
            out.push_back(row);
          }
  };

  GridGeometry g = make_world(2, world_n, h);
  InteractionWeights W = build_weights(kernel, g, cutoff);
  InteractionWeights Wstar = build_weights(kernel, g, cutoff, /*use_kstar=*/true);

  // calibration family fixes the slack; the test family must stay inside it
  std::vector<PerturbationRow> calib;
  for (int c = 0; c < 2; ++c) {
    GridSet e = blob_union(g, stream_seed(seed, 900 + c));
    run_rows(g, W, Wstar, e, "calib" + std::to_string(c), calib);
  }
  double slack = 0.02;
  for (const auto& r : calib)
    slack = std::max(slack, 1.25 * r.defect / (1.0 + std::fabs(r.rhs)));
  res.slack = slack;

  std::vector<GridSet> sets;
  std::vector<std::string> ids;
  sets.push_back(rasterize_halfplane(g, {0, 1, 0}, 0.0));
  ids.push_back("halfplane");
  {
    GridSet bump = sets[0];
    GridSet ball = rasterize_ball(g, {1.3, 0.2, 0}, 2.0);
    for (std::size_t i = 0; i < bump.bits.size(); ++i) bump.bits[i] |= ball.bits[i];
    sets.push_back(bump);
    ids.push_back("halfplane_bump");
  }
  sets.push_back(blob_union(g, stream_seed(seed, 1)));
  ids.push_back("blob");

  for (std::size_t i = 0; i < sets.size(); ++i) run_rows(g, W, Wstar, sets[i], ids[i], res.rows);
  for (const auto& r : res.rows) {
    res.csv += fmt_row("%s,%s,%.17g,%.17g,%g,%g,%.17g,%.17g,%.17g\n", r.set_id.c_str(),
                       r.variant.c_str(), r.R, r.t, r.vx, r.vy, r.lhs, r.rhs, r.defect);
    if (r.defect > slack * (1.0 + std::fabs(r.rhs))) res.all_within_slack = false;
  }

  // mesh-refinement pair on one calibration case
  {
    double R = r_list.front(), t = 2.0 * h;
    GridSet e_h = blob_union(g, stream_seed(seed, 900));
    auto d_h = lemma2a_defect(e_h, R, t, {0, 1, 0}, PerturbVariant::Linear, W, Wstar);
    GridGeometry g2 = make_world(2, world_n * 2, h / 2);
    InteractionWeights W2 = build_weights(kernel, g2, cutoff * 2);
    InteractionWeights W2s = build_weights(kernel, g2, cutoff * 2, true);
    GridSet e_h2 = blob_union(g2, stream_seed(seed, 900));
    auto d_h2 = lemma2a_defect(e_h2, R, t, {0, 1, 0}, PerturbVariant::Linear, W2, W2s);
    double a = std::max(d_h.defect, 0.0), b = std::max(d_h2.defect, 0.0);
    res.refinement_ratio = a > 0 ? b / a : 0.0;
  }
  return res;
}

// ---------------------------------------------------------------------------
// BV-estimate product bound

ProductBoundResult exp_stable_product_bound(const Kernel& kernel, int trials, std::uint64_t seed,
                                            int world_n, int cutoff) {
  double h = 9.0 / world_n;
  GridGeometry g = make_world(2, world_n, h);
  InteractionWeights W = build_weights(kernel, g, cutoff);
  InteractionWeights Wstar = build_weights(kernel, g, cutoff, true);
  const double two_pi = 2.0 * 3.14159265358979323846;

  ProductBoundResult res;
  res.csv = "instance,per_b1,pk_star_b4,rhs,pass\n";
  for (int i = 0; i < trials; ++i) {
    std::uint64_t ts = stream_seed(seed, i);
    GridSet ext;
    switch (i % 3) {
      case 0: ext = wiggly_halfplane(g, ts); break;
      case 1: ext = blob_union(g, ts); break;
      default: ext = random_set(g, 0.5, ts); break;
    }
    DomainMask b4 = make_ball_domain(g, {0, 0, 0}, 4.0, ext);
    MinimizeResult mr = minimize(b4, W);
    DomainMask b1 = make_ball_domain(g, {0, 0, 0}, 1.0, ext);
    ProductBoundRow row;
    row.instance = i;
    row.per_b1 = classical_perimeter(mr.e_min, b1);
    row.pk_star = k_perimeter(mr.e_min, b4, Wstar).total;
    row.rhs = std::sqrt(2.0) * g.dim * std::sqrt(row.pk_star) + two_pi;
    row.pass = row.per_b1 <= 1.1 * row.rhs;
    if (!row.pass) ++res.failures;
    res.rows.push_back(row);
    res.csv += fmt_row("%d,%.17g,%.17g,%.17g,%d\n", i, row.per_b1, row.pk_star, row.rhs,
                       int(row.pass));
  }
  return res;
}

// ---------------------------------------------------------------------------
// output plumbing

std::string write_experiment_output(const std::string& out_dir, const std::string& name,
                                    const std::string& csv, const std::string& config_desc,
                                    const std::string& kernel_json) {
  std::filesystem::create_directories(out_dir);
  std::string path = out_dir + "/" + name + ".csv";
  {
    std::ofstream out(path, std::ios::binary);
    out << csv;
  }
  nlohmann::json man;
  man["experiment"] = name;
  man["config"] = config_desc;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)fnv1a(config_desc));
  man["config_hash"] = hex;
  std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)fnv1a(kernel_json));
  man["kernel_hash"] = hex;
  man["code_version"] = "nlperim 0.1.0";
  std::ofstream mout(out_dir + "/" + name + ".manifest.json", std::ios::binary);
  mout << man.dump(2) << "\n";
  return path;
}

int run_experiment(const ExperimentConfig& cfg) {
  Kernel kern;
  if (!cfg.kernel_path.empty()) {
    std::ifstream in(cfg.kernel_path);
    if (!in) throw std::runtime_error("cannot open kernel file " + cfg.kernel_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    kern = Kernel::from_json(text);
  } else {
    kern = make_kernel(KernelFamily::Fractional, 2, {.s = cfg.s});
  }
  std::string desc = "id=" + cfg.id + " s=" + std::to_string(cfg.s) +
                     " seed=" + std::to_string(cfg.seed) + " trials=" + std::to_string(cfg.trials);

  if (cfg.id == "bitmap") {
    std::vector<int> rho = cfg.rho_cells.empty() ? std::vector<int>{8, 16, 32, 64, 128}
                                                 : cfg.rho_cells;
    auto r = exp_bitmap_discrepancy(cfg.s, rho, cfg.seed);
    write_experiment_output(cfg.out_dir, "bitmap_s" + std::to_string(cfg.s), r.csv, desc,
                            kern.to_json());
    double lo = 1.0 - cfg.s - 0.15, hi = 1.0 - cfg.s + 0.15;
    bool ok = r.slope >= lo && r.slope <= hi &&
              std::fabs(r.gap_finest - (4.0 * std::sqrt(2.0) - 4.0)) <=
                  0.05 * (4.0 * std::sqrt(2.0) - 4.0);
    std::printf("bitmap: slope=%.4f (target %.2f..%.2f) gap=%.4f -> %s\n", r.slope, lo, hi,
                r.gap_finest, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  if (cfg.id == "bv-scaling") {
    auto rl = cfg.r_list.empty() ? std::vector<double>{8, 16, 32} : cfg.r_list;
    auto r = exp_bv_scaling(kern, rl, cfg.trials, cfg.seed);
    write_experiment_output(cfg.out_dir, "bv_scaling", r.csv, desc, kern.to_json());
    bool ok = r.max_family_ratio_per <= 3.0 && r.max_family_ratio_pk <= 3.0;
    std::printf("bv-scaling: per-ratio=%.3f pk-ratio=%.3f (limit 3) -> %s\n",
                r.max_family_ratio_per, r.max_family_ratio_pk, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  if (cfg.id == "flatness") {
    auto rl = cfg.r_list.empty() ? std::vector<double>{8, 16, 32, 64} : cfg.r_list;
    auto r = exp_flatness_decay(kern, rl, cfg.trials, cfg.seed);
    write_experiment_output(cfg.out_dir, "flatness_decay", r.csv, desc, kern.to_json());
    bool ok = r.nonincreasing && r.fitted_exponent >= kern.s / 2.0 - 0.2;
    std::printf("flatness: exponent=%.3f (floor %.3f, target %.3f) nonincreasing=%d -> %s\n",
                r.fitted_exponent, kern.s / 2.0 - 0.2, kern.s / 2.0, int(r.nonincreasing),
                ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  if (cfg.id == "perturbation") {
    auto rl = cfg.r_list.empty() ? std::vector<double>{8, 16} : cfg.r_list;
    auto r = exp_perturbation(kern, rl, {1, 2, 4}, cfg.seed);
    write_experiment_output(cfg.out_dir, "perturbation", r.csv, desc, kern.to_json());
    bool ok = r.all_within_slack && r.refinement_ratio < 0.7;
    std::printf("perturbation: slack=%.4f refinement=%.3f -> %s\n", r.slack, r.refinement_ratio,
                ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
  }
  if (cfg.id == "product-bound") {
    auto r = exp_stable_product_bound(kern, cfg.trials, cfg.seed);
    write_experiment_output(cfg.out_dir, "product_bound", r.csv, desc, kern.to_json());
    std::printf("product-bound: %d/%zu pass -> %s\n", int(r.rows.size()) - r.failures,
                r.rows.size(), r.failures == 0 ? "pass" : "FAIL");
    return r.failures == 0 ? 0 : 1;
  }
  throw std::invalid_argument("unknown experiment id: " + cfg.id);
}

}  // namespace nlperim
