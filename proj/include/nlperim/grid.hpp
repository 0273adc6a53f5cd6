#ifndef NLPERIM_GRID_HPP
#define NLPERIM_GRID_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nlperim/common.hpp"

namespace nlperim {

/// Binary indicator of a set E on a uniform grid inside a finite world box.
struct GridSet {
  GridGeometry geom;
  std::vector<std::uint8_t> bits;

  GridSet() = default;
  explicit GridSet(const GridGeometry& g, std::uint8_t fill = 0)
      : geom(g), bits(std::size_t(g.cells()), fill) {}

  std::uint8_t at(int x, int y, int z = 0) const { return bits[geom.index(x, y, z)]; }
  void set(int x, int y, int z, std::uint8_t v) { bits[geom.index(x, y, z)] = v; }

  std::int64_t count() const {
    std::int64_t c = 0;
    for (auto b : bits) c += b;
    return c;
  }
  double measure() const { return double(count()) * geom.cell_measure(); }

  GridSet complemented() const {
    GridSet r = *this;
    for (auto& b : r.bits) b = !b;
    return r;
  }
  /// cyclic shift by integer cells (used by the flow module and the bit-shift
  /// oracles); e.g. shifted({1,0,0}) moves content one cell in +x.
  GridSet shifted(const Offset& k) const;
};

/// Grid function with values in [0,1] (coarea / diffusion states).
struct Field {
  GridGeometry geom;
  std::vector<double> v;

  Field() = default;
  explicit Field(const GridGeometry& g, double fill = 0.0)
      : geom(g), v(std::size_t(g.cells()), fill) {}
  static Field from_set(const GridSet& s) {
    Field f(s.geom);
    for (std::size_t i = 0; i < s.bits.size(); ++i) f.v[i] = s.bits[i];
    return f;
  }
};

enum class DomainKind { Ball, Box };

/// Cell mask for Omega plus the world box and exterior data E0 on W \ Omega.
struct DomainMask {
  GridGeometry geom;
  DomainKind kind = DomainKind::Ball;
  Vec center{0, 0, 0};
  double radius = 0.0;      // Ball
  Vec box_lo{0, 0, 0}, box_hi{0, 0, 0};  // Box
  std::vector<std::uint8_t> mask;  // 1 inside Omega
  GridSet exterior;                // E0; bits inside Omega are ignored

  bool inside(std::int64_t idx) const { return mask[std::size_t(idx)] != 0; }
  std::int64_t interior_count() const {
    std::int64_t c = 0;
    for (auto m : mask) c += m;
    return c;
  }
  /// E0 merged with interior values from `interior` (used to turn a solver
  /// labeling into a full world set).
  GridSet compose(const std::vector<std::uint8_t>& interior_bits) const;
};

/// Ball mask by cell-center membership.
DomainMask make_ball_domain(const GridGeometry& geom, const Vec& center, double radius,
                            const GridSet& exterior);
DomainMask make_box_domain(const GridGeometry& geom, const Vec& lo, const Vec& hi,
                           const GridSet& exterior);
/// Whole-world domain (no exterior data).
DomainMask make_full_domain(const GridGeometry& geom);

// set constructors used across tests and experiments
GridSet rasterize_halfplane(const GridGeometry& geom, const Vec& normal, double offset);
GridSet rasterize_ball(const GridGeometry& geom, const Vec& center, double radius);
/// cell (x,y) is set iff center is inside the axis square [lo,hi]^dim
GridSet rasterize_box(const GridGeometry& geom, const Vec& lo, const Vec& hi);
GridSet random_set(const GridGeometry& geom, double density, std::uint64_t seed);

// PBM "P1" persistence (n = 2) and a stacked-slice variant (n = 3), plus a
// JSON sidecar {h, origin, shape, dim}.  Bit-exact round trip.
void write_pbm(const GridSet& s, const std::string& path);
GridSet read_pbm(const std::string& path);

}  // namespace nlperim

#endif
