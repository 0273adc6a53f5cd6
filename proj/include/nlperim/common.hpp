#ifndef NLPERIM_COMMON_HPP
#define NLPERIM_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nlperim {

using Vec = std::array<double, 3>;   // third component is 0 in dimension 2
using Offset = std::array<int, 3>;

inline double dot(const Vec& a, const Vec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double c, const Vec& a) { return {c * a[0], c * a[1], c * a[2]}; }
inline Vec normalized(const Vec& a) {
  double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

/// Uniform grid of cells: `shape` cells per axis, cell size `h`,
/// `origin` = world coordinates of the center of cell (0,0,0).
/// Dimension 2 is represented with nz == 1.
struct GridGeometry {
  int nx = 1, ny = 1, nz = 1;
  int dim = 2;
  double h = 1.0;
  Vec origin{0, 0, 0};

  std::int64_t cells() const { return std::int64_t(nx) * ny * nz; }
  std::int64_t index(int x, int y, int z) const {
    return x + std::int64_t(nx) * (y + std::int64_t(ny) * z);
  }
  bool inside(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  Vec center(int x, int y, int z) const {
    return {origin[0] + h * x, origin[1] + h * y, origin[2] + h * z};
  }
  int extent(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  double cell_measure() const { return dim == 2 ? h * h : h * h * h; }
  bool same_layout(const GridGeometry& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && dim == o.dim;
  }
};

/// Centered world box: N cells per axis, cell size h, origin so that the box
/// is symmetric about 0.
inline GridGeometry make_world(int dim, int n_per_axis, double h) {
  GridGeometry g;
  g.dim = dim;
  g.nx = g.ny = n_per_axis;
  g.nz = dim == 3 ? n_per_axis : 1;
  g.h = h;
  double half = 0.5 * h * (n_per_axis - 1);
  g.origin = {-half, -half, dim == 3 ? -half : 0.0};
  return g;
}

/// Compensated (Neumaier) accumulator in long double; identity tests need
/// sums whose error stays far below 1e-10 relative.
struct Accum {
  long double s = 0.0L, c = 0.0L;
  void add(long double x) {
    long double t = s + x;
    if (std::fabs((double)s) >= std::fabs((double)x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return double(s + c); }
  long double value_l() const { return s + c; }
};

// splitmix64, used to derive independent per-trial seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

/// Deterministic parallel map: work item i only writes its own slots, so the
/// result is byte-identical for any thread count.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                         int threads = 0) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads == 1 || n < 2) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::int64_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct OverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StabilityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlperim

#endif
