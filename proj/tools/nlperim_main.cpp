// nlperim: nonlocal (fractional and general-kernel) perimeter laboratory.
//
// Subcommands: perimeter, minimize, flow, certify, crofton, audit-kernel,
// experiment, make-kernel.  Text formats only (PBM P1, JSON, CSV).
// Exit codes: 0 success, 1 assertion failure, 2 validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlperim/energy.hpp"
#include "nlperim/experiments.hpp"
#include "nlperim/flow.hpp"
#include "nlperim/geometry.hpp"
#include "nlperim/mincut.hpp"
#include "nlperim/stability.hpp"

using namespace nlperim;

namespace {

Kernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open kernel file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Kernel::from_json(text);
}

// "ball:cx,cy,R" (2d), "ball:cx,cy,cz,R" (3d), "box:lox,loy,hix,hiy", "full"
DomainMask parse_omega(const std::string& spec, const GridSet& exterior) {
  const auto& g = exterior.geom;
  if (spec == "full" || spec.empty()) {
    DomainMask d = make_full_domain(g);
    d.exterior = exterior;
    return d;
  }
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("bad --omega spec: " + spec);
  std::string kind = spec.substr(0, colon);
  std::vector<double> nums;
  std::stringstream ss(spec.substr(colon + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) nums.push_back(std::stod(tok));
  if (kind == "ball") {
    if (g.dim == 2 && nums.size() == 3)
      return make_ball_domain(g, {nums[0], nums[1], 0}, nums[2], exterior);
    if (g.dim == 3 && nums.size() == 4)
      return make_ball_domain(g, {nums[0], nums[1], nums[2]}, nums[3], exterior);
  } else if (kind == "box") {
    if (g.dim == 2 && nums.size() == 4)
      return make_box_domain(g, {nums[0], nums[1], 0}, {nums[2], nums[3], 0}, exterior);
    if (g.dim == 3 && nums.size() == 6)
      return make_box_domain(g, {nums[0], nums[1], nums[2]}, {nums[3], nums[4], nums[5]},
                             exterior);
  }
  throw std::invalid_argument("bad --omega spec: " + spec);
}

int default_cutoff(const GridGeometry& g, int requested) {
  if (requested > 0) return requested;
  return std::max({g.nx, g.ny, g.nz}) / 2;
}

KernelFamily family_from_flag(const std::string& f) {
  if (f == "fractional") return KernelFamily::Fractional;
  if (f == "anisotropic") return KernelFamily::AnisotropicFractional;
  if (f == "truncated") return KernelFamily::Truncated;
  if (f == "integrable") return KernelFamily::Integrable;
  if (f == "regularized") return KernelFamily::Regularized;
  throw std::invalid_argument("unknown family: " + f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal perimeter laboratory"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: hardware)");

  // --- make-kernel
  auto* mk = app.add_subcommand("make-kernel", "write a kernel spec JSON");
  std::string mk_family = "fractional", mk_out = "kernel.json", mk_base = "fractional";
  double mk_s = 0.5, mk_eps = 0.0;
  int mk_dim = 2, mk_cutoff = 0;
  mk->add_option("--family", mk_family);
  mk->add_option("--s", mk_s);
  mk->add_option("--dim", mk_dim);
  mk->add_option("--epsilon", mk_eps);
  mk->add_option("--base", mk_base);
  mk->add_option("--cutoff", mk_cutoff);
  mk->add_option("--out", mk_out);

  // --- perimeter
  auto* per = app.add_subcommand("perimeter", "energy report for a PBM set");
  std::string per_set, per_kernel, per_omega = "full", per_id = "set";
  int per_cutoff = 0;
  per->add_option("--set", per_set)->required();
  per->add_option("--kernel", per_kernel)->required();
  per->add_option("--omega", per_omega);
  per->add_option("--cutoff", per_cutoff);
  per->add_option("--set-id", per_id);

  // --- minimize
  auto* min = app.add_subcommand("minimize", "exact minimization with fixed exterior data");
  std::string min_ext, min_kernel, min_omega, min_out = ".";
  int min_cutoff = 0;
  min->add_option("--exterior", min_ext)->required();
  min->add_option("--kernel", min_kernel)->required();
  min->add_option("--omega", min_omega)->required();
  min->add_option("--cutoff", min_cutoff);
  min->add_option("--out", min_out);

  // --- flow
  auto* fl = app.add_subcommand("flow", "threshold dynamics");
  std::string fl_kernel, fl_init = "ball:1.0", fl_schedule = "frac:0.5", fl_out = ".";
  double fl_tau = 1e-5, fl_h = 0.125;
  int fl_steps = 20, fl_world = 64, fl_cutoff = 0, fl_snap = 0;
  fl->add_option("--kernel", fl_kernel)->required();
  fl->add_option("--tau", fl_tau);
  fl->add_option("--steps", fl_steps);
  fl->add_option("--schedule", fl_schedule, "frac:<s> | super:<s> | custom:<omega>");
  fl->add_option("--world", fl_world);
  fl->add_option("--cell", fl_h, "cell size h");
  fl->add_option("--init", fl_init, "ball:<r> | halfplane | pbm:<path>");
  fl->add_option("--cutoff", fl_cutoff);
  fl->add_option("--snapshots", fl_snap, "write a PBM every k steps");
  fl->add_option("--out", fl_out);

  // --- certify
  auto* ce = app.add_subcommand("certify", "flatness certificate in the unit ball");
  std::string ce_set, ce_out = ".";
  double ce_radius = 1.0;
  int ce_dirs = 180;
  ce->add_option("--set", ce_set)->required();
  ce->add_option("--radius", ce_radius);
  ce->add_option("--directions", ce_dirs);
  ce->add_option("--out", ce_out);

  // --- crofton
  auto* cr = app.add_subcommand("crofton", "Monte Carlo Cauchy-Crofton perimeter estimate");
  std::string cr_set, cr_omega = "full";
  std::int64_t cr_lines = 100000;
  std::uint64_t cr_seed = 1;
  cr->add_option("--set", cr_set)->required();
  cr->add_option("--omega", cr_omega);
  cr->add_option("--lines", cr_lines);
  cr->add_option("--seed", cr_seed);

  // --- audit-kernel
  auto* au = app.add_subcommand("audit-kernel", "companion-kernel and integrability audits");
  std::string au_kernel;
  int au_samples = 2000;
  std::uint64_t au_seed = 1;
  au->add_option("--kernel", au_kernel)->required();
  au->add_option("--samples", au_samples);
  au->add_option("--seed", au_seed);

  // --- experiment
  auto* ex = app.add_subcommand("experiment", "seeded experiment suites");
  std::string ex_id, ex_kernel, ex_out = ".";
  double ex_s = 0.5;
  int ex_trials = 2;
  std::uint64_t ex_seed = 1;
  ex->add_option("id", ex_id,
                 "bitmap | bv-scaling | flatness | perturbation | product-bound")
      ->required();
  ex->add_option("--kernel", ex_kernel);
  ex->add_option("--s", ex_s);
  ex->add_option("--trials", ex_trials);
  ex->add_option("--seed", ex_seed);
  ex->add_option("--out", ex_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*mk) {
      KernelParams p;
      p.s = mk_s;
      p.epsilon = mk_eps;
      p.base_family = family_from_flag(mk_base);
      Kernel k = make_kernel(family_from_flag(mk_family), mk_dim, p);
      k.suggested_cutoff = mk_cutoff;
      std::ofstream out(mk_out);
      out << k.to_json() << "\n";
      std::printf("wrote %s\n", mk_out.c_str());
      return 0;
    }

    if (*per) {
      Kernel k = load_kernel(per_kernel);
      GridSet e = read_pbm(per_set);
      DomainMask om = parse_omega(per_omega, e);
      int cut = per_cutoff > 0 ? per_cutoff
                               : (k.suggested_cutoff > 0 ? k.suggested_cutoff
                                                         : default_cutoff(e.geom, 0));
      InteractionWeights W = build_weights(k, e.geom, cut, false, 6,
                                           std::size_t(2) << 30, threads);
      auto rep = k_perimeter(e, om, W);
      std::printf("%s\n%s\n", EnergyReport::csv_header().c_str(),
                  rep.csv_row(per_id, per_kernel, om.radius).c_str());
      return 0;
    }

    if (*min) {
      Kernel k = load_kernel(min_kernel);
      GridSet ext = read_pbm(min_ext);
      DomainMask om = parse_omega(min_omega, ext);
      int cut = min_cutoff > 0 ? min_cutoff
                               : (k.suggested_cutoff > 0 ? k.suggested_cutoff
                                                         : default_cutoff(ext.geom, 0));
      InteractionWeights W = build_weights(k, ext.geom, cut, false, 6,
                                           std::size_t(2) << 30, threads);
      auto mr = minimize(om, W);
      std::filesystem::create_directories(min_out);
      write_pbm(mr.e_min, min_out + "/emin.pbm");
      write_pbm(mr.e_max, min_out + "/emax.pbm");
      std::ofstream csv(min_out + "/minimize.csv", std::ios::binary);
      csv << EnergyReport::csv_header() << "\n"
          << k_perimeter(mr.e_min, om, W).csv_row("emin", min_kernel, om.radius) << "\n";
      std::printf("energy=%.12g cut=%.12g nodes=%lld arcs=%lld seconds=%.3f\n", mr.energy,
                  mr.cut_value, (long long)mr.nodes, (long long)mr.arcs, mr.seconds);
      return 0;
    }

    if (*fl) {
      Kernel k = load_kernel(fl_kernel);
      GridGeometry g = make_world(k.dim, fl_world, fl_h);
      GridSet init(g);
      if (fl_init == "halfplane") {
        init = rasterize_halfplane(g, {0, 1, 0}, 0.0);
      } else if (fl_init.rfind("ball:", 0) == 0) {
        init = rasterize_ball(g, {0, 0, 0}, std::stod(fl_init.substr(5)));
      } else if (fl_init.rfind("pbm:", 0) == 0) {
        init = read_pbm(fl_init.substr(4));
        g = init.geom;
      } else {
        throw std::invalid_argument("bad --init: " + fl_init);
      }
      Schedule sched;
      if (fl_schedule.rfind("frac:", 0) == 0)
        sched = {ScheduleKind::FractionalSub1, std::stod(fl_schedule.substr(5)), 0.0};
      else if (fl_schedule.rfind("super:", 0) == 0)
        sched = {ScheduleKind::FractionalSuper1, std::stod(fl_schedule.substr(6)), 0.0};
      else if (fl_schedule.rfind("custom:", 0) == 0)
        sched = {ScheduleKind::Custom, 0.0, std::stod(fl_schedule.substr(7))};
      else
        throw std::invalid_argument("bad --schedule: " + fl_schedule);
      int cut = fl_cutoff > 0 ? fl_cutoff : std::max(4, fl_world / 8);
      InteractionWeights W = build_weights(k, g, cut, false, 6, std::size_t(2) << 30, threads);

      std::filesystem::create_directories(fl_out);
      if (fl_snap > 0) {
        FlowState st = make_flow_state(init, fl_tau, sched);
        std::string csv = "step,volume,symdiff_initial,symdiff_prev,interface_position\n";
        GridSet prev = init;
        DomainMask full = make_full_domain(g);
        write_pbm(init, fl_out + "/flow_000000.pbm");
        for (int i = 1; i <= fl_steps; ++i) {
          st = mbo_step(st, W);
          char row[256];
          std::snprintf(row, sizeof(row), "%d,%.17g,%.17g,%.17g,%.17g\n", st.step,
                        st.set.measure(), symmetric_difference_measure(st.set, init, full),
                        symmetric_difference_measure(st.set, prev, full), 0.0);
          csv += row;
          if (i % fl_snap == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "/flow_%06d.pbm", i);
            write_pbm(st.set, fl_out + name);
          }
          prev = st.set;
        }
        std::ofstream out(fl_out + "/flow.csv", std::ios::binary);
        out << csv;
      } else {
        auto traj = run_flow(init, W, fl_tau, fl_steps, sched);
        std::ofstream out(fl_out + "/flow.csv", std::ios::binary);
        out << traj.csv();
        write_pbm(traj.final_set, fl_out + "/flow_final.pbm");
        std::printf("steps=%zu extinct=%d fixed_point=%d\n", traj.rows.size(),
                    int(traj.extinct), int(traj.fixed_point));
      }
      return 0;
    }

    if (*ce) {
      GridSet e = read_pbm(ce_set);
      DomainMask b1 = make_ball_domain(e.geom, {0, 0, 0}, ce_radius, e);
      auto cert = flatness_certificate(e, b1, ce_dirs);
      std::filesystem::create_directories(ce_out);
      std::ofstream j(ce_out + "/certificate.json", std::ios::binary);
      char buf[1024];
      std::snprintf(buf, sizeof(buf),
                    "{\n  \"frame\": [[%.17g,%.17g,%.17g],[%.17g,%.17g,%.17g],[%.17g,%.17g,%.17g]],\n"
                    "  \"mu\": %.17g,\n  \"eps\": %.17g,\n  \"bad_measure\": %.17g,\n"
                    "  \"t_star\": %.17g,\n  \"osc_g\": %.17g,\n  \"symdiff\": %.17g,\n"
                    "  \"per_rescaled\": %.17g\n}\n",
                    cert.frame[0][0], cert.frame[0][1], cert.frame[0][2], cert.frame[1][0],
                    cert.frame[1][1], cert.frame[1][2], cert.frame[2][0], cert.frame[2][1],
                    cert.frame[2][2], cert.mu, cert.eps, cert.bad_measure, cert.t_star,
                    cert.osc_g, cert.symdiff, cert.per_rescaled);
      j << buf;
      std::ofstream gcsv(ce_out + "/certificate_g.csv", std::ios::binary);
      gcsv << "offset,g\n";
      for (std::size_t i = 0; i < cert.g_values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", cert.g_offsets[i], cert.g_values[i]);
        gcsv << buf;
      }
      std::printf("mu=%.6g eps=%.6g bad=%.6g symdiff=%.6g\n", cert.mu, cert.eps,
                  cert.bad_measure, cert.symdiff);
      return 0;
    }

    if (*cr) {
      GridSet e = read_pbm(cr_set);
      DomainMask om = parse_omega(cr_omega, e);
      auto est = crofton_perimeter(e, om, cr_lines, cr_seed);
      std::printf("estimate=%.12g stderr=%.12g lines=%lld mean_count=%.6g classical=%.12g\n",
                  est.estimate, est.stderr_, (long long)est.lines, est.mean_count,
                  classical_perimeter(e, om));
      return 0;
    }

    if (*au) {
      Kernel k = load_kernel(au_kernel);
      auto rep = kstar_audit(k, au_samples, au_seed);
      auto integ = integrability_audit(k);
      std::printf("kstar audit: max_ratio=%.6g (first=%.6g second=%.6g) samples=%d -> %s\n",
                  rep.max_ratio, rep.max_first_ratio, rep.max_second_ratio, rep.samples,
                  rep.pass() ? "pass" : "exceeds 1+tol");
      std::printf("integrability: inside_b1=%.9g tail=%.9g total=%.9g%s\n", integ.inside_b1,
                  integ.tail, integ.total, integ.divergent ? " DIVERGENT" : "");
      return 0;
    }

    if (*ex) {
      ExperimentConfig cfg;
      cfg.id = ex_id;
      cfg.kernel_path = ex_kernel;
      cfg.s = ex_s;
      cfg.trials = ex_trials;
      cfg.seed = ex_seed;
      cfg.out_dir = ex_out;
      cfg.threads = threads;
      return run_experiment(cfg);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
