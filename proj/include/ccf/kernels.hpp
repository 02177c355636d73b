#pragma once
// O(n^2) inner loops behind the singular-integral quadrature and the Holder
// estimator. Each kernel has a serial reference and an OpenMP version. The
// parallel versions split only the outer loop and keep the serial summation
// order inside it, so both produce bit-identical output.

#include <cstddef>
#include <span>

namespace ccf::kernels {

/// out[i] = sum_j weights[j] * (center[i] - shifted[(i + j + offset) mod n])^power,
/// power in {1, 2}. All spans have length n.
void difference_quadrature_serial(std::span<const double> center, std::span<const double> shifted,
                                  std::span<const double> weights, std::ptrdiff_t offset, int power,
                                  std::span<double> out);
void difference_quadrature_parallel(std::span<const double> center, std::span<const double> shifted,
                                    std::span<const double> weights, std::ptrdiff_t offset, int power,
                                    std::span<double> out);

/// max over offsets k = 1..n/2 and all i of |v[i] - v[i+k]| / (k*spacing)^alpha.
/// Offset k covers geodesic distance k*spacing on the torus.
double holder_max_serial(std::span<const double> values, double spacing, double alpha);
double holder_max_parallel(std::span<const double> values, double spacing, double alpha);

}  // namespace ccf::kernels
