#pragma once
// Singular operators of the transport model: the periodic Hilbert transform,
// the fractional Laplacian as a Fourier multiplier and as a periodized
// singular integral, the D_gamma dissipation functional, and the fractional
// commutator.

#include "ccf/spectral.hpp"

#include <vector>

namespace ccf::ops {

using spectral::RealField;
using spectral::SpectralField;
using spectral::TorusGrid;

enum class CellRule {
    midpoint,  ///< nodes at half-cell offsets; no node at y = 0
    punctured  ///< nodes at grid offsets with the y = 0 node dropped
};

struct QuadratureConfig {
    /// Periodic images 2*pi*k summed explicitly on each side of the base cell.
    int image_count = 20;
    CellRule cell_rule = CellRule::midpoint;
    /// Add an Euler-Maclaurin estimate of the images beyond image_count.
    /// Without it the kernel misses a K^-gamma tail.
    bool tail_correction = true;

    void validate() const;
};

/// Normalization constant making the quadrature agree with the multiplier
/// |m|^gamma on mode 1.
struct CgammaCalibration {
    double gamma = 0.0;
    double c_gamma = 0.0;
    /// Relative least-squares mismatch on mode 1 after rescaling.
    double residual = 0.0;
};

/// Multiplier -i sign(m); kills the mean and the Nyquist mode.
SpectralField hilbert(const SpectralField& F);

/// Multiplier |m|^gamma, gamma in (0, 2].
SpectralField frac_laplacian_spectral(const SpectralField& F, double gamma);

/// Multiplier |m|^s for any real s, with the mean mode set to zero.
/// Negative s acts as the inverse on mean-free fields.
SpectralField abs_power(const SpectralField& F, double s);

/// Periodized kernel sum_k |y - 2 pi k|^-(1+gamma) at the quadrature nodes of
/// `cfg.cell_rule`, multiplied by the node spacing. Node j sits at
/// y_j = -pi + (j + 1/2) h (midpoint) or y_j = -pi + j h (punctured, with the
/// y = 0 weight set to zero).
std::vector<double> kernel_weights(double gamma, const TorusGrid& grid, const QuadratureConfig& cfg);

/// Images beyond `image_count` of the periodized kernel at y in (-pi, pi),
/// estimated by the midpoint Euler-Maclaurin formula.
double kernel_tail(double y, double gamma, int image_count);

/// Throws ValidationError for gamma outside (0, 2) or an invalid config, and
/// CalibrationError when the fitted constant is not positive or the mode-1
/// residual exceeds 1e-3.
CgammaCalibration calibrate_cgamma(double gamma, const TorusGrid& grid, const QuadratureConfig& cfg = {});

/// Relative mismatch |Q(cos mx) / cos mx - m^gamma| / m^gamma of the
/// calibrated quadrature on mode m.
double cross_mode_mismatch(const CgammaCalibration& cal, const TorusGrid& grid, long m,
                           const QuadratureConfig& cfg = {});

/// Ratio of the spectral tail (|m| > n/4) to total energy above which the
/// quadrature refuses a field.
inline constexpr double kQuadratureTailLimit = 0.1;

/// c_gamma * sum_k int_T (f(x) - f(x+y)) / |y - 2 pi k|^(1+gamma) dy.
/// Throws UnderResolvedError when the field fails the tail check.
RealField frac_laplacian_quadrature(const RealField& f, double gamma, const CgammaCalibration& cal,
                                    const QuadratureConfig& cfg = {});

/// D_gamma(phi) with phi = delta_h f = f(x + h) - f(x), h = h_shift grid cells
/// (h_shift = 0 uses f itself). Pointwise non-negative.
RealField dgamma(const RealField& f, long h_shift, double gamma, const CgammaCalibration& cal,
                 const QuadratureConfig& cfg = {});

/// max_x |2 f Lambda^gamma f - Lambda^gamma(f^2) - D_gamma(f)|, spectral
/// Lambda^gamma against quadrature D_gamma.
double cordoba_identity_residual(const RealField& f, double gamma, const CgammaCalibration& cal,
                                 const QuadratureConfig& cfg = {});

/// Lambda^s(f g) - f Lambda^s g with dealiased products, s > 0.
RealField commutator(const RealField& f, const RealField& g, double s);

/// Lebesgue exponents of the commutator estimate, with 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4.
struct CommutatorExponents {
    double p = 2.0, p1 = 2.0, p2 = 2.0, p3 = 2.0, p4 = 2.0;
    /// p = 2, p1 = p4 = 3/gamma, p2 = p3 = 6/(3 - 2 gamma).
    static CommutatorExponents energy_estimate(double gamma);
};

/// ||[Lambda^s, f] g||_p divided by
/// ||f_x||_p1 ||Lambda^(s-1) g||_p2 + ||Lambda^s f||_p3 ||g||_p4.
/// Constants in that bound are unspecified, so callers fit them from this ratio.
double commutator_bound_ratio(const RealField& f, const RealField& g, double s, const CommutatorExponents& e);

/// (sum |f|^p h)^(1/p) over the torus; p = infinity gives max |f|.
double lp_norm(const RealField& f, double p);

}  // namespace ccf::ops
