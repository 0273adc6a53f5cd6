#ifndef NLPERIM_FFT_CONV_HPP
#define NLPERIM_FFT_CONV_HPP

#include <vector>

#include "nlperim/weights.hpp"

namespace nlperim {

/// Zero-padded linear convolution of a world-sized field with the stencil,
/// via FFTW r2c transforms.  Same contract as the direct stencil sweep.
std::vector<double> fft_convolve(const std::vector<double>& field, const InteractionWeights& w);

}  // namespace nlperim

#endif
