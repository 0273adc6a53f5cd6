#include "fft_conv.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>

namespace nlperim {

namespace {
// FFTW planning is not thread safe
std::mutex plan_mutex;

int next_fast(int n) {
  for (;; ++n) {
    int m = n;
    for (int f : {2, 3, 5, 7})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}
}  // namespace

std::vector<double> fft_convolve(const std::vector<double>& field, const InteractionWeights& w) {
  const auto& g = w.geom;
  const int dim = g.dim, c = w.cutoff, S = 2 * c + 1;
  int pn[3] = {next_fast(g.nx + 2 * c), next_fast(g.ny + 2 * c),
               dim == 3 ? next_fast(g.nz + 2 * c) : 1};
  std::size_t real_n = std::size_t(pn[0]) * pn[1] * pn[2];
  std::size_t cplx_n = std::size_t(pn[0] / 2 + 1) * pn[1] * pn[2];

  double* rbuf = fftw_alloc_real(real_n);
  fftw_complex* fu = fftw_alloc_complex(cplx_n);
  fftw_complex* fw = fftw_alloc_complex(cplx_n);

  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    if (dim == 2) {
      fwd = fftw_plan_dft_r2c_2d(pn[1], pn[0], rbuf, fu, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_2d(pn[1], pn[0], fu, rbuf, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_3d(pn[2], pn[1], pn[0], rbuf, fu, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_3d(pn[2], pn[1], pn[0], fu, rbuf, FFTW_ESTIMATE);
    }
  }
  auto pidx = [&](int x, int y, int z) {
    return std::size_t(x) + std::size_t(pn[0]) * (y + std::size_t(pn[1]) * z);
  };

  // field, zero padded
  std::memset(rbuf, 0, real_n * sizeof(double));
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      std::memcpy(&rbuf[pidx(0, y, z)], &field[g.index(0, y, z)], sizeof(double) * g.nx);
  fftw_execute_dft_r2c(fwd, rbuf, fu);

  // stencil wrapped about the origin
  std::memset(rbuf, 0, real_n * sizeof(double));
  int zc = dim == 3 ? c : 0;
  for (int kz = -zc; kz <= zc; ++kz)
    for (int ky = -c; ky <= c; ++ky)
      for (int kx = -c; kx <= c; ++kx) {
        if (kx == 0 && ky == 0 && kz == 0) continue;
        double v = w.w[std::size_t(kx + c) +
                       std::size_t(S) * ((ky + c) + (dim == 3 ? std::size_t(S) * (kz + c) : 0))];
        if (v == 0.0) continue;
        int x = (kx % pn[0] + pn[0]) % pn[0];
        int y = (ky % pn[1] + pn[1]) % pn[1];
        int z = (kz % pn[2] + pn[2]) % pn[2];
        rbuf[pidx(x, y, z)] = v;
      }
  fftw_execute_dft_r2c(fwd, rbuf, fw);

  double inv = 1.0 / double(real_n);
  for (std::size_t i = 0; i < cplx_n; ++i) {
    double re = fu[i][0] * fw[i][0] - fu[i][1] * fw[i][1];
    double im = fu[i][0] * fw[i][1] + fu[i][1] * fw[i][0];
    fu[i][0] = re * inv;
    fu[i][1] = im * inv;
  }
  fftw_execute_dft_c2r(bwd, fu, rbuf);

  // out(a) = sum_k w(k) field(a+k); w is even so convolution == correlation
  std::vector<double> out(field.size());
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y)
      std::memcpy(&out[g.index(0, y, z)], &rbuf[pidx(0, y, z)], sizeof(double) * g.nx);

  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(rbuf);
  fftw_free(fu);
  fftw_free(fw);
  return out;
}

}  // namespace nlperim
