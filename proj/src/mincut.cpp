#include "nlperim/mincut.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "nlperim/geometry.hpp"

namespace nlperim {

namespace {

/// Push-relabel (FIFO, gap + periodic global relabel) on the interaction
/// stencil.  Pair capacities are shared per offset, so flow is stored per
/// (node, half-offset) and arcs never materialize.
class StencilFlow {
 public:
  StencilFlow(const DomainMask& dom, const InteractionWeights& W) : dom_(dom), W_(W) {
    const auto& g = dom.geom;
    node_of_.assign(std::size_t(g.cells()), -1);
    for (int z = 0; z < g.nz; ++z)
      for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x) {
          auto idx = g.index(x, y, z);
          if (dom.inside(idx)) {
            node_of_[idx] = int(cells_.size());
            cells_.push_back({x, y, z});
          }
        }
    n_ = int(cells_.size());

    // half stencil (lexicographically positive offsets with positive weight)
    int c = W.cutoff, zc = g.dim == 3 ? c : 0;
    for (int kz = -zc; kz <= zc; ++kz)
      for (int ky = -c; ky <= c; ++ky)
        for (int kx = -c; kx <= c; ++kx) {
          if (kx == 0 && ky == 0 && kz == 0) continue;
          bool pos = kz > 0 || (kz == 0 && (ky > 0 || (ky == 0 && kx > 0)));
          if (!pos) continue;
          double w = W.at(kx, ky, kz);
          if (w < 0) throw std::runtime_error("negative weight");
          if (w > 0) {
            half_.push_back({kx, ky, kz});
            wcap_.push_back(w);
          }
        }
    H_ = int(half_.size());
    flow_.assign(std::size_t(n_) * H_, 0.0);
    cap_src_.assign(n_, 0.0);
    cap_snk_.assign(n_, 0.0);

    // terminal capacities aggregate interactions with fixed exterior cells
    double maxcap = 0;
    for (double w : wcap_) maxcap = std::max(maxcap, w);
    for (int v = 0; v < n_; ++v) {
      const auto& cc = cells_[v];
      Accum s1, s0;
      for (int kz = -zc; kz <= zc; ++kz) {
        int bz = cc[2] + kz;
        if (bz < 0 || bz >= g.nz) continue;
        for (int ky = -c; ky <= c; ++ky) {
          int by = cc[1] + ky;
          if (by < 0 || by >= g.ny) continue;
          for (int kx = -c; kx <= c; ++kx) {
            if (kx == 0 && ky == 0 && kz == 0) continue;
            int bx = cc[0] + kx;
            if (bx < 0 || bx >= g.nx) continue;
            auto bidx = g.index(bx, by, bz);
            if (dom.inside(bidx)) continue;
            double w = W.at(kx, ky, kz);
            if (dom.exterior.bits[bidx])
              s1.add(w);
            else
              s0.add(w);
          }
        }
      }
      cap_src_[v] = s1.value();
      cap_snk_[v] = s0.value();
      maxcap = std::max({maxcap, cap_src_[v], cap_snk_[v]});
      if (!std::isfinite(maxcap)) throw std::runtime_error("capacity overflow");
    }
    eps_ = 1e-14 * std::max(maxcap, 1e-300);
  }

  std::int64_t pair_arcs() const { return std::int64_t(n_) * H_; }
  int nodes() const { return n_; }

  long double run() {
    height_.assign(n_, 0);
    hcount_.assign(2 * n_ + 3, 0);
    excess_.assign(n_, 0.0L);
    snk_flow_.assign(n_, 0.0);
    src_return_.assign(n_, 0.0);
    current_.assign(n_, 0);
    in_queue_.assign(n_, 0);

    global_relabel();
    for (int v = 0; v < n_; ++v) {
      excess_[v] = cap_src_[v];
      if (excess_[v] > eps_) enqueue(v);
    }
    std::int64_t work = 0, relabel_budget = std::int64_t(n_) * (H_ + 2) + 1000;
    std::int64_t discharges = 0;
    while (!queue_.empty()) {
      int v = queue_.front();
      queue_.pop_front();
      in_queue_[v] = 0;
      work += discharge(v);
      ++discharges;
      if ((discharges & 0xfffff) == 0 && std::getenv("NLPERIM_FLOW_DEBUG")) {
        long double tot = 0;
        for (int u = 0; u < n_; ++u) tot += excess_[u];
        std::fprintf(stderr, "[flow] discharges=%lld queue=%zu excess=%Lg eps=%g\n",
                     (long long)discharges, queue_.size(), tot, eps_);
        for (int u = 0; u < n_; ++u)
          if (excess_[u] > eps_)
            std::fprintf(stderr, "  node %d h=%d excess=%Lg cap_src=%g ret=%g cap_snk=%g snk=%g\n",
                         u, height_[u], excess_[u], cap_src_[u], src_return_[u], cap_snk_[u],
                         snk_flow_[u]);
      }
      if (work > relabel_budget) {
        work = 0;
        global_relabel();
      }
    }
    long double value = 0;
    for (int v = 0; v < n_; ++v) value += snk_flow_[v];
    return value;
  }

  std::vector<std::uint8_t> source_side_min() const {
    std::vector<std::uint8_t> vis(n_, 0);
    std::deque<int> bfs;
    for (int v = 0; v < n_; ++v)
      if (src_return_[v] > eps_) {
        vis[v] = 1;
        bfs.push_back(v);
      }
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop_front();
      for (int j = 0; j < 2 * H_; ++j) {
        int v = neighbor(u, j);
        if (v < 0 || vis[v]) continue;
        if (residual(u, j) > eps_) {
          vis[v] = 1;
          bfs.push_back(v);
        }
      }
    }
    return vis;
  }

  std::vector<std::uint8_t> sink_side() const {  // nodes that can reach t
    std::vector<std::uint8_t> vis(n_, 0);
    std::deque<int> bfs;
    for (int v = 0; v < n_; ++v)
      if (cap_snk_[v] - snk_flow_[v] > eps_) {
        vis[v] = 1;
        bfs.push_back(v);
      }
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop_front();
      // v reaches t through u when residual(v -> u) > 0
      for (int j = 0; j < 2 * H_; ++j) {
        int v = neighbor(u, j);
        if (v < 0 || vis[v]) continue;
        if (residual(v, reverse_arc(j)) > eps_) {
          vis[v] = 1;
          bfs.push_back(v);
        }
      }
    }
    return vis;
  }

  const std::vector<Offset>& cells() const { return cells_; }

 private:
  // directed arc j in [0, 2H): j < H is +half_[j], else -half_[j - H]
  int reverse_arc(int j) const { return j < H_ ? j + H_ : j - H_; }

  int neighbor(int u, int j) const {
    const auto& g = dom_.geom;
    const Offset& k = half_[j < H_ ? j : j - H_];
    int sgn = j < H_ ? 1 : -1;
    int x = cells_[u][0] + sgn * k[0], y = cells_[u][1] + sgn * k[1],
        z = cells_[u][2] + sgn * k[2];
    if (!g.inside(x, y, z)) return -1;
    return node_of_[g.index(x, y, z)];
  }

  double residual(int u, int j) const {
    // net flow along +half is stored at the tail of the + direction
    if (j < H_) return wcap_[j] - flow_[std::size_t(u) * H_ + j];
    int v = neighbor(u, j);
    return wcap_[j - H_] + flow_[std::size_t(v) * H_ + (j - H_)];
  }

  void push_arc(int u, int j, double amount) {
    if (j < H_)
      flow_[std::size_t(u) * H_ + j] += amount;
    else
      flow_[std::size_t(neighbor(u, j)) * H_ + (j - H_)] -= amount;
  }

  void enqueue(int v) {
    if (!in_queue_[v]) {
      in_queue_[v] = 1;
      queue_.push_back(v);
    }
  }

  std::int64_t discharge(int v) {
    std::int64_t work = 0;
    while (excess_[v] > eps_) {
      if (height_[v] >= 2 * n_ + 1) {
        // heights stay below 2n in exact arithmetic; this only absorbs
        // eps-level residue left by the float thresholds
        double r = cap_src_[v] - src_return_[v];
        double amt = double(std::min<long double>(excess_[v], (long double)std::max(r, 0.0)));
        src_return_[v] += amt;
        excess_[v] -= amt;
        leak_ += double(excess_[v]);
        excess_[v] = 0;
        break;
      }
      bool pushed = false;
      // sink arc
      if (height_[v] == 1) {
        double r = cap_snk_[v] - snk_flow_[v];
        if (r > eps_) {
          double amt = double(std::min<long double>(excess_[v], (long double)r));
          snk_flow_[v] += amt;
          excess_[v] -= amt;
          pushed = true;
          if (excess_[v] <= eps_) break;
        }
      }
      // source arc: height n+1 sends flow back to s
      if (height_[v] == n_ + 1) {
        double r = cap_src_[v] - src_return_[v];
        if (r > eps_) {
          double amt = double(std::min<long double>(excess_[v], (long double)r));
          src_return_[v] += amt;
          excess_[v] -= amt;
          if (excess_[v] <= eps_) break;
        }
      }
      int j = current_[v];
      for (; j < 2 * H_; ++j) {
        ++work;
        int u = neighbor(v, j);
        if (u < 0) continue;
        if (height_[v] != height_[u] + 1) continue;
        double r = residual(v, j);
        if (r <= eps_) continue;
        double amt = double(std::min<long double>(excess_[v], (long double)r));
        push_arc(v, j, amt);
        excess_[v] -= amt;
        excess_[u] += amt;
        enqueue(u);
        pushed = true;
        if (excess_[v] <= eps_) break;
      }
      current_[v] = j < 2 * H_ ? j : 0;
      if (excess_[v] <= eps_) break;
      if (j >= 2 * H_) {
        // relabel
        int old = height_[v];
        int best = 2 * n_ + 1;
        if (cap_snk_[v] - snk_flow_[v] > eps_) best = std::min(best, 1);
        if (cap_src_[v] - src_return_[v] > eps_) best = std::min(best, n_ + 1);
        for (int a = 0; a < 2 * H_; ++a) {
          ++work;
          int u = neighbor(v, a);
          if (u < 0) continue;
          if (residual(v, a) > eps_) best = std::min(best, height_[u] + 1);
        }
        if (best <= old) best = old + 1;  // progress even with label ties
        --hcount_[old];
        height_[v] = best;
        ++hcount_[best];
        current_[v] = 0;
        if (old < n_ && hcount_[old] == 0) {  // gap
          for (int u = 0; u < n_; ++u)
            if (height_[u] > old && height_[u] <= n_) {
              --hcount_[height_[u]];
              height_[u] = n_ + 1;
              ++hcount_[n_ + 1];
            }
        }
        if (!pushed && height_[v] >= 2 * n_ + 1) continue;
      }
    }
    if (excess_[v] > eps_) enqueue(v);
    return work;
  }

  void global_relabel() {
    // exact distances: to t for nodes that can still reach it, n + dist to s
    // for the rest (returning excess), drain height when neither works
    const int unset = 2 * n_ + 1;
    std::fill(height_.begin(), height_.end(), unset);
    std::deque<int> bfs;
    for (int v = 0; v < n_; ++v)
      if (cap_snk_[v] - snk_flow_[v] > eps_) {
        height_[v] = 1;
        bfs.push_back(v);
      }
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop_front();
      for (int j = 0; j < 2 * H_; ++j) {
        int v = neighbor(u, j);
        if (v < 0 || height_[v] != unset) continue;
        if (residual(v, reverse_arc(j)) > eps_) {
          height_[v] = height_[u] + 1;
          bfs.push_back(v);
        }
      }
    }
    for (int v = 0; v < n_; ++v)
      if (height_[v] == unset && cap_src_[v] - src_return_[v] > eps_) {
        height_[v] = n_ + 1;
        bfs.push_back(v);
      }
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop_front();
      for (int j = 0; j < 2 * H_; ++j) {
        int v = neighbor(u, j);
        if (v < 0 || height_[v] != unset) continue;
        if (residual(v, reverse_arc(j)) > eps_) {
          height_[v] = height_[u] + 1;
          bfs.push_back(v);
        }
      }
    }
    std::fill(hcount_.begin(), hcount_.end(), 0);
    for (int v = 0; v < n_; ++v) ++hcount_[std::min(height_[v], 2 * n_ + 2)];
    std::fill(current_.begin(), current_.end(), 0);
  }

  const DomainMask& dom_;
  const InteractionWeights& W_;
  int n_ = 0, H_ = 0;
  std::vector<int> node_of_;
  std::vector<Offset> cells_;
  std::vector<Offset> half_;
  std::vector<double> wcap_;
  std::vector<double> flow_;
  std::vector<double> cap_src_, cap_snk_, snk_flow_, src_return_;
  std::vector<long double> excess_;
  std::vector<int> height_, current_, hcount_;
  std::vector<std::uint8_t> in_queue_;
  std::deque<int> queue_;
  double eps_ = 0;
  double leak_ = 0;
};

}  // namespace

MinimizeResult minimize(const DomainMask& dom, const InteractionWeights& W) {
  auto t0 = std::chrono::steady_clock::now();
  StencilFlow solver(dom, W);
  long double cut = solver.run();

  auto src_min = solver.source_side_min();
  auto to_sink = solver.sink_side();
  const auto& cells = solver.cells();
  const auto& g = dom.geom;

  std::vector<std::uint8_t> emin_bits(std::size_t(g.cells()), 0);
  std::vector<std::uint8_t> emax_bits(std::size_t(g.cells()), 0);
  for (std::size_t v = 0; v < cells.size(); ++v) {
    auto idx = g.index(cells[v][0], cells[v][1], cells[v][2]);
    emin_bits[idx] = src_min[v];
    emax_bits[idx] = src_min[v] || !to_sink[v];
  }

  MinimizeResult res;
  res.e_min = dom.compose(emin_bits);
  res.e_max = dom.compose(emax_bits);
  res.cut_value = double(cut);
  res.energy = k_perimeter(res.e_min, dom, W).total;
  res.nodes = solver.nodes();
  res.arcs = solver.pair_arcs();
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

EnumerationResult enumerate_minimum(const DomainMask& dom, const InteractionWeights& W,
                                    double tie_tol) {
  const auto& g = dom.geom;
  std::vector<std::int64_t> cells;
  for (std::int64_t i = 0; i < g.cells(); ++i)
    if (dom.inside(i)) cells.push_back(i);
  int m = int(cells.size());
  if (m > 25) throw std::invalid_argument("enumeration limited to 25 interior cells");

  // reduce to unary + pairwise form once
  int c = W.cutoff, zc = g.dim == 3 ? c : 0;
  std::vector<double> s_one(m, 0.0), s_zero(m, 0.0);
  std::vector<std::vector<double>> pw(m, std::vector<double>(m, 0.0));
  for (int a = 0; a < m; ++a) {
    std::int64_t ia = cells[a];
    int az = int(ia / (std::int64_t(g.nx) * g.ny));
    int ay = int((ia / g.nx) % g.ny), ax = int(ia % g.nx);
    Accum s1, s0;
    for (int kz = -zc; kz <= zc; ++kz)
      for (int ky = -c; ky <= c; ++ky)
        for (int kx = -c; kx <= c; ++kx) {
          if (kx == 0 && ky == 0 && kz == 0) continue;
          int bx = ax + kx, by = ay + ky, bz = az + kz;
          if (!g.inside(bx, by, bz)) continue;
          auto ib = g.index(bx, by, bz);
          double w = W.at(kx, ky, kz);
          if (dom.inside(ib)) {
            int b = int(std::lower_bound(cells.begin(), cells.end(), ib) - cells.begin());
            if (b > a) pw[a][b] = w;
          } else if (dom.exterior.bits[ib]) {
            s1.add(w);
          } else {
            s0.add(w);
          }
        }
    s_one[a] = s0.value();   // cost of u_a = 1 against exterior zeros
    s_zero[a] = s1.value();  // cost of u_a = 0 against exterior ones
  }

  auto state_energy = [&](std::uint32_t st) {
    Accum acc;
    for (int a = 0; a < m; ++a) {
      bool ua = (st >> a) & 1;
      acc.add(ua ? s_one[a] : s_zero[a]);
      for (int b = a + 1; b < m; ++b)
        if (((st >> b) & 1) != ua) acc.add(pw[a][b]);
    }
    return acc.value();
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> arg;
  std::uint64_t total = 1ull << m;
  for (std::uint64_t st = 0; st < total; ++st) {
    double e = state_energy(std::uint32_t(st));
    if (e < best - tie_tol) {
      best = std::min(best, e);
      arg.clear();
    }
    if (e <= best + tie_tol) {
      if (e < best) best = e;
      arg.push_back(std::uint32_t(st));
    }
  }
  // re-filter against the final minimum
  EnumerationResult res;
  res.min_energy = best;
  for (auto st : arg) {
    if (state_energy(st) > best + tie_tol) continue;
    std::vector<std::uint8_t> bits(std::size_t(g.cells()), 0);
    for (int a = 0; a < m; ++a) bits[cells[a]] = (st >> a) & 1;
    res.optimal_interiors.push_back(std::move(bits));
  }
  return res;
}

MutualInclusionReport mutual_inclusion_check(const DomainMask& omega_template,
                                             const InteractionWeights& W, int trials,
                                             std::uint64_t seed) {
  MutualInclusionReport rep;
  rep.trials = trials;
  bool small = omega_template.interior_count() <= 20;
  rep.enumerated = small;
  for (int t = 0; t < trials; ++t) {
    DomainMask dom = omega_template;
    dom.exterior = random_set(dom.geom, 0.5, stream_seed(seed, t));
    MinimizeResult mr = minimize(dom, W);
    for (std::size_t i = 0; i < mr.e_min.bits.size(); ++i)
      if (mr.e_min.bits[i] && !mr.e_max.bits[i]) {
        ++rep.violations;
        break;
      }
    if (small) {
      auto en = enumerate_minimum(dom, W, 1e-12 * (1.0 + std::fabs(mr.energy)));
      for (const auto& bits : en.optimal_interiors) {
        bool ok = true;
        for (std::size_t i = 0; i < bits.size() && ok; ++i) {
          if (!dom.inside(std::int64_t(i))) continue;
          if (mr.e_min.bits[i] && !bits[i]) ok = false;
          if (bits[i] && !mr.e_max.bits[i]) ok = false;
        }
        if (!ok) {
          ++rep.sandwich_failures;
          break;
        }
      }
    }
  }
  return rep;
}

RegularizationSweep regularization_sweep(const DomainMask& dom, const Kernel& base,
                                         const std::vector<double>& eps_list, int cutoff) {
  RegularizationSweep sweep;
  InteractionWeights w_base = build_weights(base, dom.geom, cutoff);
  for (double eps : eps_list) {
    RegularizationEntry entry;
    entry.epsilon = eps;
    if (eps == 0.0) {
      MinimizeResult mr = minimize(dom, w_base);
      entry.minimizer = mr.e_min;
      entry.energy_eps = mr.energy;
    } else {
      KernelParams p;
      p.s = base.s;
      p.epsilon = eps;
      p.base_family = base.family;
      if (!base.a.empty()) p.a_samples = base.a.values;
      Kernel keps = make_kernel(KernelFamily::Regularized, base.dim, p);
      InteractionWeights weps = build_weights(keps, dom.geom, cutoff);
      MinimizeResult mr = minimize(dom, weps);
      entry.minimizer = mr.e_min;
      entry.energy_eps = mr.energy;
    }
    entry.energy_base = k_perimeter(entry.minimizer, dom, w_base).total;
    sweep.entries.push_back(std::move(entry));
  }
  int n = int(sweep.entries.size());
  sweep.pairwise_symdiff.assign(n, std::vector<double>(n, 0.0));
  DomainMask full = make_full_domain(dom.geom);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sweep.pairwise_symdiff[i][j] = symmetric_difference_measure(
          sweep.entries[i].minimizer, sweep.entries[j].minimizer, full);
  return sweep;
}

}  // namespace nlperim
