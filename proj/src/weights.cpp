#include "nlperim/weights.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nlperim {

namespace {

// order of the radial singularity of K at 0: K ~ r^{-(dim + sigma)};
// negative when the kernel is bounded at the origin
double singular_exponent(const Kernel& k) {
  KernelFamily fam = k.family == KernelFamily::Regularized ? k.base_family : k.family;
  double sigma = fam == KernelFamily::Integrable ? -1.0 : k.s;
  if (k.family == KernelFamily::Regularized) sigma = std::max(sigma, 0.5);
  return sigma;
}

// breakpoints of [-1,1] with 2^depth cells, graded toward the singular
// coordinate x0 = -kc with exponent gamma (midpoint on a graded mesh
// restores the O(m^-2) rate the offset-0 singularity would otherwise spoil)
std::vector<double> axis_partition(int kc, int depth, double gamma) {
  int m = 1 << depth;
  std::vector<double> pts;
  double x0 = -double(kc);
  if (std::fabs(x0) > 1.0 || gamma <= 1.0) {
    for (int j = 0; j <= m; ++j) pts.push_back(-1.0 + 2.0 * j / m);
  } else if (x0 == 0.0) {
    int m2 = std::max(1, m / 2);
    for (int j = m2; j >= 1; --j) pts.push_back(-std::pow(double(j) / m2, gamma));
    pts.push_back(0.0);
    for (int j = 1; j <= m2; ++j) pts.push_back(std::pow(double(j) / m2, gamma));
  } else {
    for (int j = 0; j <= m; ++j) {
      double d = 2.0 * std::pow(double(j) / m, gamma);
      pts.push_back(x0 < 0 ? -1.0 + d : 1.0 - d);
    }
    if (x0 > 0) std::reverse(pts.begin(), pts.end());
  }
  // the tent density has a kink at 0; keep it on a cell boundary
  if (std::none_of(pts.begin(), pts.end(), [](double p) { return p == 0.0; })) {
    pts.push_back(0.0);
    std::sort(pts.begin(), pts.end());
  }
  return pts;
}

}  // namespace

double cell_pair_weight(const Kernel& kernel, double h, const Offset& k, int depth,
                        bool use_kstar) {
  // The difference of two points uniform in unit cells at offset k has the
  // tent density prod_i (1 - |d_i|) on [-1,1]^n; w = h^{2n} * E[K(h(k+d))].
  // The integrand is singular at d = -k when |k|_inf <= 1.
  int dim = kernel.dim;
  double sigma = singular_exponent(kernel);
  int kinf = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
  double gamma = (sigma > 0.0 && kinf <= 1) ? std::min(2.2 / (1.0 - sigma), 40.0) : 1.0;
  auto kv = [&](const Vec& z) { return use_kstar ? kernel.kstar(z) : kernel.eval(z); };

  std::vector<double> px = axis_partition(k[0], depth, gamma);
  std::vector<double> py = axis_partition(k[1], depth, gamma);
  std::vector<double> pz = dim == 3 ? axis_partition(k[2], depth, gamma) : std::vector<double>();

  Accum acc;
  double h2n = dim == 2 ? h * h * h * h : std::pow(h, 6.0);
  if (dim == 2) {
    for (std::size_t i = 0; i + 1 < px.size(); ++i) {
      double dx = 0.5 * (px[i] + px[i + 1]), lx = px[i + 1] - px[i];
      double tx = (1.0 - std::fabs(dx)) * lx;
      if (tx <= 0) continue;
      for (std::size_t j = 0; j + 1 < py.size(); ++j) {
        double dy = 0.5 * (py[j] + py[j + 1]), ly = py[j + 1] - py[j];
        double ty = (1.0 - std::fabs(dy)) * ly;
        if (ty <= 0) continue;
        acc.add(tx * ty * kv({h * (k[0] + dx), h * (k[1] + dy), 0.0}));
      }
    }
    return acc.value() * h2n;
  }
  for (std::size_t i = 0; i + 1 < px.size(); ++i) {
    double dx = 0.5 * (px[i] + px[i + 1]), lx = px[i + 1] - px[i];
    double tx = (1.0 - std::fabs(dx)) * lx;
    if (tx <= 0) continue;
    for (std::size_t j = 0; j + 1 < py.size(); ++j) {
      double dy = 0.5 * (py[j] + py[j + 1]), ly = py[j + 1] - py[j];
      double ty = (1.0 - std::fabs(dy)) * ly;
      if (ty <= 0) continue;
      for (std::size_t l = 0; l + 1 < pz.size(); ++l) {
        double dz = 0.5 * (pz[l] + pz[l + 1]), lz = pz[l + 1] - pz[l];
        double tz = (1.0 - std::fabs(dz)) * lz;
        if (tz <= 0) continue;
        acc.add(tx * ty * tz * kv({h * (k[0] + dx), h * (k[1] + dy), h * (k[2] + dz)}));
      }
    }
  }
  return acc.value() * h2n;
}

InteractionWeights build_weights(const Kernel& kernel, const GridGeometry& geom, int cutoff,
                                 bool use_kstar, int near_depth, std::size_t budget_bytes,
                                 int threads) {
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1 cell");
  if (!(geom.h > 0)) throw std::invalid_argument("cell size must be positive");
  int n = 2 * cutoff + 1;
  std::size_t count = std::size_t(n) * n * (geom.dim == 3 ? n : 1);
  if (count * sizeof(double) > budget_bytes)
    throw std::runtime_error("interaction stencil exceeds memory budget");

  InteractionWeights W;
  W.geom = geom;
  W.cutoff = cutoff;
  W.near_depth = near_depth;
  W.kernel = kernel;
  W.from_kstar = use_kstar;
  W.w.assign(geom.dim == 3 ? count : std::size_t(n) * n, 0.0);

  double h = geom.h;
  int zc = geom.dim == 3 ? cutoff : 0;
  double h2n = geom.dim == 2 ? h * h * h * h : std::pow(h, 6.0);
  auto kv = [&](const Vec& z) { return use_kstar ? kernel.kstar(z) : kernel.eval(z); };

  auto index = [&](int kx, int ky, int kz) {
    return std::size_t(kx + cutoff) +
           std::size_t(n) * ((ky + cutoff) + (geom.dim == 3 ? std::size_t(n) * (kz + cutoff) : 0));
  };

  // canonical half (lexicographically positive offsets); the mirror copy
  // guarantees bit-exact evenness
  std::vector<Offset> half;
  half.reserve(count / 2 + 1);
  for (int kz = -zc; kz <= zc; ++kz)
    for (int ky = -cutoff; ky <= cutoff; ++ky)
      for (int kx = -cutoff; kx <= cutoff; ++kx) {
        if (kx == 0 && ky == 0 && kz == 0) continue;
        bool positive = kz > 0 || (kz == 0 && (ky > 0 || (ky == 0 && kx > 0)));
        if (positive) half.push_back({kx, ky, kz});
      }

  std::vector<double> hw(half.size());
  parallel_for(
      std::int64_t(half.size()),
      [&](std::int64_t i) {
        const Offset& k = half[std::size_t(i)];
        int kinf = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
        if (kinf >= 3)
          hw[std::size_t(i)] = kv({h * k[0], h * k[1], h * k[2]}) * h2n;
        else
          hw[std::size_t(i)] = cell_pair_weight(kernel, h, k, near_depth, use_kstar);
      },
      threads);

  Accum total;
  for (std::size_t i = 0; i < half.size(); ++i) {
    const Offset& k = half[i];
    W.w[index(k[0], k[1], k[2])] = hw[i];
    W.w[index(-k[0], -k[1], -k[2])] = hw[i];
    if (!(hw[i] >= 0)) throw std::runtime_error("negative interaction weight");
    total.add(hw[i]);
    total.add(hw[i]);
  }
  W.total_weight = total.value();
  return W;
}

}  // namespace nlperim
