#include "nlperim/grid.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace nlperim {

GridSet GridSet::shifted(const Offset& k) const {
  GridSet r(geom);
  const int nx = geom.nx, ny = geom.ny, nz = geom.nz;
  auto wrap = [](int a, int n) { return ((a % n) + n) % n; };
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        int sx = wrap(x - k[0], nx), sy = wrap(y - k[1], ny), sz = wrap(z - k[2], nz);
        r.bits[geom.index(x, y, z)] = bits[geom.index(sx, sy, sz)];
      }
  return r;
}

GridSet DomainMask::compose(const std::vector<std::uint8_t>& interior_bits) const {
  GridSet r = exterior;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) r.bits[i] = interior_bits[i];
  return r;
}

DomainMask make_ball_domain(const GridGeometry& geom, const Vec& center, double radius,
                            const GridSet& exterior) {
  DomainMask d;
  d.geom = geom;
  d.kind = DomainKind::Ball;
  d.center = center;
  d.radius = radius;
  d.exterior = exterior;
  d.mask.assign(std::size_t(geom.cells()), 0);
  for (int z = 0; z < geom.nz; ++z)
    for (int y = 0; y < geom.ny; ++y)
      for (int x = 0; x < geom.nx; ++x) {
        Vec c = geom.center(x, y, z);
        d.mask[geom.index(x, y, z)] = norm(c - center) < radius ? 1 : 0;
      }
  return d;
}

DomainMask make_box_domain(const GridGeometry& geom, const Vec& lo, const Vec& hi,
                           const GridSet& exterior) {
  DomainMask d;
  d.geom = geom;
  d.kind = DomainKind::Box;
  d.box_lo = lo;
  d.box_hi = hi;
  d.exterior = exterior;
  d.mask.assign(std::size_t(geom.cells()), 0);
  for (int z = 0; z < geom.nz; ++z)
    for (int y = 0; y < geom.ny; ++y)
      for (int x = 0; x < geom.nx; ++x) {
        Vec c = geom.center(x, y, z);
        bool in = c[0] > lo[0] && c[0] < hi[0] && c[1] > lo[1] && c[1] < hi[1] &&
                  (geom.dim == 2 || (c[2] > lo[2] && c[2] < hi[2]));
        d.mask[geom.index(x, y, z)] = in ? 1 : 0;
      }
  return d;
}

DomainMask make_full_domain(const GridGeometry& geom) {
  DomainMask d;
  d.geom = geom;
  d.kind = DomainKind::Box;
  d.exterior = GridSet(geom);
  d.mask.assign(std::size_t(geom.cells()), 1);
  return d;
}

GridSet rasterize_halfplane(const GridGeometry& geom, const Vec& normal, double offset) {
  GridSet s(geom);
  Vec n = normalized(normal);
  for (int z = 0; z < geom.nz; ++z)
    for (int y = 0; y < geom.ny; ++y)
      for (int x = 0; x < geom.nx; ++x)
        s.bits[geom.index(x, y, z)] = dot(geom.center(x, y, z), n) <= offset ? 1 : 0;
  return s;
}

GridSet rasterize_ball(const GridGeometry& geom, const Vec& center, double radius) {
  GridSet s(geom);
  for (int z = 0; z < geom.nz; ++z)
    for (int y = 0; y < geom.ny; ++y)
      for (int x = 0; x < geom.nx; ++x)
        s.bits[geom.index(x, y, z)] = norm(geom.center(x, y, z) - center) < radius ? 1 : 0;
  return s;
}

GridSet rasterize_box(const GridGeometry& geom, const Vec& lo, const Vec& hi) {
  GridSet s(geom);
  for (int z = 0; z < geom.nz; ++z)
    for (int y = 0; y < geom.ny; ++y)
      for (int x = 0; x < geom.nx; ++x) {
        Vec c = geom.center(x, y, z);
        bool in = c[0] > lo[0] && c[0] < hi[0] && c[1] > lo[1] && c[1] < hi[1] &&
                  (geom.dim == 2 || (c[2] > lo[2] && c[2] < hi[2]));
        s.bits[geom.index(x, y, z)] = in ? 1 : 0;
      }
  return s;
}

GridSet random_set(const GridGeometry& geom, double density, std::uint64_t seed) {
  GridSet s(geom);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& b : s.bits) b = uni(rng) < density ? 1 : 0;
  return s;
}

// ---------------------------------------------------------------------------
// persistence

void write_pbm(const GridSet& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const auto& g = s.geom;
  // n=3 writes nz slices stacked vertically; the sidecar keeps the true shape
  out << "P1\n" << g.nx << " " << g.ny * g.nz << "\n";
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y) {
      for (int x = 0; x < g.nx; ++x) out << (s.at(x, y, z) ? '1' : '0') << (x + 1 < g.nx ? " " : "");
      out << "\n";
    }
  nlohmann::json j;
  j["h"] = g.h;
  j["origin"] = {g.origin[0], g.origin[1], g.origin[2]};
  j["shape"] = {g.nx, g.ny, g.nz};
  j["dim"] = g.dim;
  std::ofstream side(path + ".json");
  side << j.dump(2) << "\n";
}

GridSet read_pbm(const std::string& path) {
  std::ifstream side(path + ".json");
  GridGeometry g;
  if (side) {
    nlohmann::json j = nlohmann::json::parse(side);
    g.h = j.at("h").get<double>();
    auto o = j.at("origin").get<std::vector<double>>();
    g.origin = {o[0], o[1], o[2]};
    auto sh = j.at("shape").get<std::vector<int>>();
    g.nx = sh[0];
    g.ny = sh[1];
    g.nz = sh[2];
    g.dim = j.at("dim").get<int>();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P1") throw std::runtime_error(path + ": not a P1 bitmap");
  int w = 0, hrows = 0;
  in >> w >> hrows;
  if (!side) {  // no sidecar: plain 2d bitmap, unit cells
    g.nx = w;
    g.ny = hrows;
    g.nz = 1;
    g.dim = 2;
    g.h = 1.0;
    g.origin = {0, 0, 0};
  }
  if (w != g.nx || hrows != g.ny * g.nz)
    throw std::runtime_error(path + ": bitmap size disagrees with sidecar");
  GridSet s(g);
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      for (int x = 0; x < g.nx; ++x) {
        char c;
        do {
          if (!in.get(c)) throw std::runtime_error(path + ": truncated bitmap");
        } while (c != '0' && c != '1');
        s.set(x, y, z, c == '1');
      }
  return s;
}

}  // namespace nlperim
