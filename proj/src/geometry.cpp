#include "nlperim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nlperim {

namespace {
constexpr double kPi = std::numbers::pi;

// least-aligned-axis orthonormal complement of unit v
void complement_basis(const Vec& v, int dim, Vec& w1, Vec& w2) {
  if (dim == 2) {
    w1 = {-v[1], v[0], 0.0};
    w2 = {0, 0, 0};
    return;
  }
  Vec axis = std::fabs(v[0]) <= std::fabs(v[1]) && std::fabs(v[0]) <= std::fabs(v[2])
                 ? Vec{1, 0, 0}
                 : (std::fabs(v[1]) <= std::fabs(v[2]) ? Vec{0, 1, 0} : Vec{0, 0, 1});
  double d = dot(axis, v);
  w1 = normalized(axis - d * v);
  w2 = {v[1] * w1[2] - v[2] * w1[1], v[2] * w1[0] - v[0] * w1[2], v[0] * w1[1] - v[1] * w1[0]};
}

// bounding disk (center + radius) of the Omega cells
void omega_bounds(const DomainMask& om, Vec& center, double& radius) {
  const auto& g = om.geom;
  Vec lo = {1e300, 1e300, 1e300}, hi = {-1e300, -1e300, -1e300};
  bool any = false;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x)
        if (om.inside(g.index(x, y, z))) {
          Vec c = g.center(x, y, z);
          for (int i = 0; i < 3; ++i) lo[i] = std::min(lo[i], c[i]), hi[i] = std::max(hi[i], c[i]);
          any = true;
        }
  if (!any) {
    center = {0, 0, 0};
    radius = 0;
    return;
  }
  center = 0.5 * (lo + hi);
  Vec d = hi - lo;
  if (g.dim == 2) d[2] = 0;
  radius = 0.5 * norm(d) + g.h;
}
}  // namespace

double classical_perimeter(const GridSet& e, const DomainMask& omega) {
  const auto& g = e.geom;
  std::int64_t faces = 0;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        auto i0 = g.index(x, y, z);
        if (!omega.inside(i0)) continue;
        if (x + 1 < g.nx && omega.inside(g.index(x + 1, y, z)))
          faces += e.bits[i0] != e.bits[g.index(x + 1, y, z)];
        if (y + 1 < g.ny && omega.inside(g.index(x, y + 1, z)))
          faces += e.bits[i0] != e.bits[g.index(x, y + 1, z)];
        if (g.dim == 3 && z + 1 < g.nz && omega.inside(g.index(x, y, z + 1)))
          faces += e.bits[i0] != e.bits[g.index(x, y, z + 1)];
      }
  double face_area = g.dim == 2 ? g.h : g.h * g.h;
  return double(faces) * face_area;
}

namespace {

// walk one line: `vals` in scan order with in-Omega flags and v-coordinates
struct LineWalk {
  LineVariation line;
  std::uint8_t prev = 0;
  bool have_prev = false;
  void feed(std::uint8_t u, double t) {
    auto& L = line;
    if (!L.samples) {
      L.first = u;
      L.t_first = t;
    }
    L.last = u;
    L.t_last = t;
    if (u) {
      if (!L.has_one) L.t_first_one = t;
      L.has_one = true;
      L.t_last_one = t;
    }
    if (have_prev) {
      if (prev == 1 && u == 0) ++L.i_plus;
      if (prev == 0 && u == 1) ++L.i_minus;
    }
    prev = u;
    have_prev = true;
    ++L.samples;
  }
  void gap() { have_prev = false; }
};

DirectionalVariation axis_variation(const GridSet& e, const DomainMask& om, int axis) {
  const auto& g = e.geom;
  DirectionalVariation dv;
  dv.cross_section = g.dim == 2 ? g.h : g.h * g.h;
  int n0 = g.extent(axis);
  int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  if (g.dim == 2) {
    a1 = axis == 0 ? 1 : 0;
    a2 = 2;
  }
  int n1 = g.extent(a1), n2 = g.dim == 2 ? 1 : g.extent(a2);
  dv.base = g.origin;
  dv.w1 = {0, 0, 0};
  dv.w1[a1] = 1;
  if (g.dim == 3) {
    dv.w2 = {0, 0, 0};
    dv.w2[a2] = 1;
  }
  for (int j2 = 0; j2 < n2; ++j2)
    for (int j1 = 0; j1 < n1; ++j1) {
      LineWalk walk;
      walk.line.o1 = j1;
      walk.line.o2 = j2;
      for (int i = 0; i < n0; ++i) {
        int c[3] = {0, 0, 0};
        c[axis] = i;
        c[a1] = j1;
        if (g.dim == 3) c[a2] = j2;
        auto idx = g.index(c[0], c[1], c[2]);
        if (om.inside(idx)) {
          double t = g.origin[axis] + g.h * i;
          walk.feed(e.bits[idx], t);
        } else {
          walk.gap();
        }
      }
      if (walk.line.samples) dv.lines.push_back(walk.line);
    }
  return dv;
}

DirectionalVariation oblique_variation(const GridSet& e, const DomainMask& om, const Vec& v) {
  const auto& g = e.geom;
  DirectionalVariation dv;
  dv.cross_section = g.dim == 2 ? g.h : g.h * g.h;
  Vec w1, w2;
  complement_basis(v, g.dim, w1, w2);
  Vec c0;
  double rho;
  omega_bounds(om, c0, rho);
  dv.base = c0;
  dv.w1 = w1;
  dv.w2 = w2;
  int m = int(std::ceil(rho / g.h)) + 1;
  int m2 = g.dim == 2 ? 0 : m;
  int tsteps = int(std::ceil(rho / g.h)) + 1;
  for (int j2 = -m2; j2 <= m2; ++j2)
    for (int j1 = -m; j1 <= m; ++j1) {
      Vec base = c0 + (g.h * j1) * w1 + (g.h * j2) * w2;
      LineWalk walk;
      walk.line.o1 = j1;
      walk.line.o2 = j2;
      for (int i = -tsteps; i <= tsteps; ++i) {
        double t = g.h * i;
        Vec p = base + t * v;
        int cx = int(std::lround((p[0] - g.origin[0]) / g.h));
        int cy = int(std::lround((p[1] - g.origin[1]) / g.h));
        int cz = g.dim == 3 ? int(std::lround((p[2] - g.origin[2]) / g.h)) : 0;
        if (!g.inside(cx, cy, cz)) {
          walk.gap();
          continue;
        }
        auto idx = g.index(cx, cy, cz);
        if (om.inside(idx))
          walk.feed(e.bits[idx], t);
        else
          walk.gap();
      }
      if (walk.line.samples) dv.lines.push_back(walk.line);
    }
  return dv;
}

}  // namespace

DirectionalVariation directional_variation(const GridSet& e, const DomainMask& omega,
                                           const Vec& v) {
  double nv = norm(v);
  if (std::fabs(nv - 1.0) > 1e-9) throw std::invalid_argument("direction must be a unit vector");

  // canonical sign so that Phi_pm(-v) == Phi_mp(v) holds bit-exactly
  bool flip = false;
  const double tol = 1e-14;
  if (v[2] < -tol)
    flip = true;
  else if (std::fabs(v[2]) <= tol && v[1] < -tol)
    flip = true;
  else if (std::fabs(v[2]) <= tol && std::fabs(v[1]) <= tol && v[0] < 0)
    flip = true;
  Vec cv = flip ? Vec{-v[0], -v[1], -v[2]} : v;

  DirectionalVariation dv;
  int axis = -1;
  for (int i = 0; i < 3; ++i)
    if (std::fabs(cv[i] - 1.0) < 1e-12) axis = i;
  if (axis >= 0)
    dv = axis_variation(e, omega, axis);
  else
    dv = oblique_variation(e, omega, cv);

  if (flip) {
    // walking along +v is the reverse of the canonical walk
    for (auto& L : dv.lines) {
      std::swap(L.i_plus, L.i_minus);
      std::swap(L.first, L.last);
      double tf = L.t_first, tl = L.t_last;
      L.t_first = -tl;
      L.t_last = -tf;
      double fo = L.t_first_one, lo = L.t_last_one;
      L.t_first_one = -lo;
      L.t_last_one = -fo;
    }
  }
  dv.v = v;
  long long jp = 0, jm = 0, bad = 0;
  for (const auto& L : dv.lines) {
    jp += L.i_plus;
    jm += L.i_minus;
    bad += (L.i_plus + L.i_minus) > 0;
  }
  dv.phi_plus = double(jp) * dv.cross_section;
  dv.phi_minus = double(jm) * dv.cross_section;
  dv.bad_measure = double(bad) * dv.cross_section;
  return dv;
}

CroftonEstimate crofton_perimeter(const GridSet& e, const DomainMask& omega,
                                  std::int64_t line_count, std::uint64_t seed) {
  const auto& g = e.geom;
  CroftonEstimate ce;
  ce.lines = line_count;
  if (line_count < 1) return ce;
  Vec c0;
  double rho;
  omega_bounds(omega, c0, rho);
  if (rho <= 0) return ce;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto rand_dir = [&]() -> Vec {
    if (g.dim == 2) {
      double th = 2.0 * kPi * uni(rng);
      return {std::cos(th), std::sin(th), 0.0};
    }
    while (true) {
      Vec p = {2 * uni(rng) - 1, 2 * uni(rng) - 1, 2 * uni(rng) - 1};
      double n2 = dot(p, p);
      if (n2 > 1e-8 && n2 <= 1.0) return normalized(p);
    }
  };

  Vec wlo = {g.origin[0] - 0.5 * g.h, g.origin[1] - 0.5 * g.h,
             g.dim == 3 ? g.origin[2] - 0.5 * g.h : -0.5};
  auto count_crossings = [&](Vec p0, const Vec& v) -> int {
    // clip to the world box
    double t0 = -1e300, t1 = 1e300;
    for (int i = 0; i < (g.dim == 3 ? 3 : 2); ++i) {
      double lo = wlo[i], hi = wlo[i] + g.h * g.extent(i);
      if (std::fabs(v[i]) < 1e-14) {
        if (p0[i] <= lo || p0[i] >= hi) return 0;
      } else {
        double a = (lo - p0[i]) / v[i], b = (hi - p0[i]) / v[i];
        t0 = std::max(t0, std::min(a, b));
        t1 = std::min(t1, std::max(a, b));
      }
    }
    if (t0 >= t1) return 0;
    Vec p = p0 + (t0 + 1e-9 * g.h) * v;
    int cx = int(std::floor((p[0] - wlo[0]) / g.h));
    int cy = int(std::floor((p[1] - wlo[1]) / g.h));
    int cz = g.dim == 3 ? int(std::floor((p[2] - wlo[2]) / g.h)) : 0;
    int step[3], dims = g.dim;
    double tmax[3], tdelta[3];
    int cell[3] = {cx, cy, cz};
    for (int i = 0; i < dims; ++i) {
      if (std::fabs(v[i]) < 1e-14) {
        step[i] = 0;
        tmax[i] = 1e300;
        tdelta[i] = 1e300;
      } else {
        step[i] = v[i] > 0 ? 1 : -1;
        double edge = wlo[i] + g.h * (cell[i] + (v[i] > 0 ? 1 : 0));
        tmax[i] = (edge - p0[i]) / v[i];
        tdelta[i] = g.h / std::fabs(v[i]);
      }
    }
    int crossings = 0;
    bool prev_in = false;
    std::uint8_t prev_u = 0;
    double t = t0;
    while (t < t1) {
      bool inw = cell[0] >= 0 && cell[0] < g.nx && cell[1] >= 0 && cell[1] < g.ny &&
                 (dims == 2 || (cell[2] >= 0 && cell[2] < g.nz));
      if (!inw) break;
      auto idx = g.index(cell[0], cell[1], dims == 3 ? cell[2] : 0);
      bool in_om = omega.inside(idx);
      std::uint8_t u = e.bits[idx];
      if (in_om && prev_in && u != prev_u) ++crossings;
      prev_in = in_om;
      prev_u = u;
      int ax = 0;
      for (int i = 1; i < dims; ++i)
        if (tmax[i] < tmax[ax]) ax = i;
      t = tmax[ax];
      tmax[ax] += tdelta[ax];
      cell[ax] += step[ax];
    }
    return crossings;
  };

  double denom = g.dim == 2 ? 4.0 : 2.0 * kPi;
  double measure = g.dim == 2 ? (2.0 * kPi) * (2.0 * rho) : (4.0 * kPi) * (kPi * rho * rho);
  Accum sum, sumsq;
  for (std::int64_t i = 0; i < line_count; ++i) {
    Vec v = rand_dir();
    Vec w1, w2;
    complement_basis(v, g.dim, w1, w2);
    Vec y;
    if (g.dim == 2) {
      y = (rho * (2 * uni(rng) - 1)) * w1;
    } else {
      double a, b;
      do {
        a = 2 * uni(rng) - 1;
        b = 2 * uni(rng) - 1;
      } while (a * a + b * b > 1.0);
      y = (rho * a) * w1 + (rho * b) * w2;
    }
    int ncross = count_crossings(c0 + y, v);
    sum.add(ncross);
    sumsq.add(double(ncross) * ncross);
  }
  double mean = sum.value() / double(line_count);
  double var = std::max(0.0, sumsq.value() / double(line_count) - mean * mean);
  ce.mean_count = mean;
  ce.estimate = measure * mean / denom;
  ce.stderr_ = measure * std::sqrt(var / double(line_count)) / denom;
  return ce;
}

double symmetric_difference_measure(const GridSet& e, const GridSet& f, const DomainMask& omega) {
  if (!e.geom.same_layout(f.geom)) throw std::invalid_argument("shape mismatch");
  std::int64_t c = 0;
  for (std::size_t i = 0; i < e.bits.size(); ++i)
    if (omega.mask[i] && e.bits[i] != f.bits[i]) ++c;
  return double(c) * e.geom.cell_measure();
}

double halfspace_symdiff(const GridSet& e, const DomainMask& omega, const Vec& v, double t) {
  const auto& g = e.geom;
  std::int64_t c = 0;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        auto idx = g.index(x, y, z);
        if (!omega.inside(idx)) continue;
        std::uint8_t hs = dot(g.center(x, y, z), v) <= t ? 1 : 0;
        c += hs != e.bits[idx];
      }
  return double(c) * g.cell_measure();
}

HalfspaceFit best_halfspace_fit(const GridSet& e, const DomainMask& omega,
                                int direction_samples) {
  if (direction_samples < 8) throw std::invalid_argument("direction_samples must be >= 8");
  const auto& g = e.geom;
  std::vector<Vec> dirs;
  for (int i = 0; i < g.dim; ++i) {
    Vec a{0, 0, 0}, b{0, 0, 0};
    a[i] = 1;
    b[i] = -1;
    dirs.push_back(a);
    dirs.push_back(b);
  }
  int extra = std::max(0, direction_samples - int(dirs.size()));
  if (g.dim == 2) {
    for (int i = 0; i < extra; ++i) {
      double th = 2.0 * kPi * i / extra;
      dirs.push_back({std::cos(th), std::sin(th), 0.0});
    }
  } else {
    for (int i = 0; i < extra; ++i) {  // Fibonacci sphere
      double zc = 1.0 - 2.0 * (i + 0.5) / extra;
      double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double th = kPi * (1.0 + std::sqrt(5.0)) * i;
      dirs.push_back({r * std::cos(th), r * std::sin(th), zc});
    }
  }

  std::vector<std::pair<double, std::uint8_t>> proj;
  proj.reserve(std::size_t(omega.interior_count()));
  HalfspaceFit best;
  best.symdiff = std::numeric_limits<double>::infinity();
  for (const auto& v : dirs) {
    proj.clear();
    std::int64_t ones = 0;
    for (int z = 0; z < g.nz; ++z)
      for (int y = 0; y < g.ny; ++y)
        for (int x = 0; x < g.nx; ++x) {
          auto idx = g.index(x, y, z);
          if (!omega.inside(idx)) continue;
          proj.emplace_back(dot(g.center(x, y, z), v), e.bits[idx]);
          ones += e.bits[idx];
        }
    std::sort(proj.begin(), proj.end());
    // halfspace {x.v <= t}: symdiff(t) = zeros with p <= t plus ones with p > t
    std::int64_t zeros_le = 0, ones_le = 0;
    std::int64_t best_count = ones;  // t = -inf
    double best_t = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < proj.size(); ++i) {
      zeros_le += proj[i].second == 0;
      ones_le += proj[i].second == 1;
      if (i + 1 < proj.size() && proj[i + 1].first == proj[i].first) continue;
      std::int64_t cnt = zeros_le + (ones - ones_le);
      if (cnt < best_count) {
        best_count = cnt;
        best_t = proj[i].first;
      }
    }
    double m = double(best_count) * g.cell_measure();
    if (m < best.symdiff) {
      best.symdiff = m;
      best.v = v;
      best.t = best_t;
    }
  }
  return best;
}

}  // namespace nlperim
