#include "ccf/operators.hpp"

#include "ccf/error.hpp"
#include "ccf/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ccf::ops {

using spectral::Complex;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCalibrationResidualLimit = 1e-3;

void require_gamma_open(double gamma) {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw ValidationError("gamma", "must lie in (0, 2) for the singular integral, got " + std::to_string(gamma));
}

void require_calibration(const CgammaCalibration& cal, double gamma) {
    if (!(cal.c_gamma > 0.0) || std::abs(cal.gamma - gamma) > 1e-14)
        throw ValidationError("cal", "calibration was built for gamma = " + std::to_string(cal.gamma) +
                                         ", not " + std::to_string(gamma));
}

void require_resolved(const SpectralField& F) {
    const double tail = spectral::tail_fraction(F, static_cast<long>(F.grid().size() / 4));
    if (tail >= kQuadratureTailLimit)
        throw UnderResolvedError("field too rough for quadrature: tail fraction " + std::to_string(tail), tail);
}

// Integrand values f(x_i + y_j) live in `shifted` at index i + j - n/2.
RealField quadrature_sum(const RealField& center, const RealField& shifted, const std::vector<double>& weights,
                         int power, double scale) {
    const std::size_t n = center.size();
    std::vector<double> out(n);
    kernels::difference_quadrature_parallel(center.values(), shifted.values(), weights,
                                            -static_cast<std::ptrdiff_t>(n / 2), power, out);
    for (auto& v : out) v *= scale;
    return RealField(center.grid(), std::move(out));
}

RealField node_values(const RealField& f, const SpectralField& F, const QuadratureConfig& cfg) {
    if (cfg.cell_rule == CellRule::punctured) return f;
    return spectral::inverse(spectral::translate(F, 0.5 * f.grid().spacing()));
}

RealField roll(const RealField& f, long cells) {
    const auto n = static_cast<long>(f.size());
    std::vector<double> v(f.size());
    for (long j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(((j + cells) % n + n) % n)];
    return RealField(f.grid(), std::move(v));
}

RealField mode_cosine(const TorusGrid& grid, long m) {
    return RealField::sample(grid, [m](double x) { return std::cos(static_cast<double>(m) * x); });
}

double dot(const RealField& a, const RealField& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (image_count < 1)
        throw ValidationError("image_count", "must be >= 1, got " + std::to_string(image_count));
}

SpectralField hilbert(const SpectralField& F) {
    return spectral::apply_symbol(F, [](long m) {
        return m == 0 ? Complex(0.0) : Complex(0.0, m > 0 ? -1.0 : 1.0);
    });
}

SpectralField frac_laplacian_spectral(const SpectralField& F, double gamma) {
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw ValidationError("gamma", "must lie in (0, 2], got " + std::to_string(gamma));
    return abs_power(F, gamma);
}

SpectralField abs_power(const SpectralField& F, double s) {
    return spectral::apply_symbol(F, [s](long m) {
        return m == 0 ? 0.0 : std::pow(static_cast<double>(std::abs(m)), s);
    });
}

double kernel_tail(double y, double gamma, int image_count) {
    // sum_{k > K} g(k) ~ int_{K+1/2}^inf g + g'(K+1/2)/24 for g(s) = (2 pi s + c)^-(1+gamma),
    // applied to both sides c = -y and c = +y.
    const double a = 2.0 * kPi * (static_cast<double>(image_count) + 0.5);
    double sum = 0.0;
    for (double c : {-y, y}) {
        const double base = a + c;
        const double integral = std::pow(base, -gamma) / (2.0 * kPi * gamma);
        const double slope = -(1.0 + gamma) * 2.0 * kPi * std::pow(base, -2.0 - gamma);
        sum += integral + slope / 24.0;
    }
    return sum;
}

std::vector<double> kernel_weights(double gamma, const TorusGrid& grid, const QuadratureConfig& cfg) {
    cfg.validate();
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    const double offset = cfg.cell_rule == CellRule::midpoint ? 0.5 : 0.0;
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double y = -kPi + (static_cast<double>(j) + offset) * h;
        if (cfg.cell_rule == CellRule::punctured && j == n / 2) {
            w[j] = 0.0;
            continue;
        }
        double s = 0.0;
        for (int k = -cfg.image_count; k <= cfg.image_count; ++k)
            s += std::pow(std::abs(y - 2.0 * kPi * k), -1.0 - gamma);
        if (cfg.tail_correction) s += kernel_tail(y, gamma, cfg.image_count);
        w[j] = s * h;
    }
    return w;
}

CgammaCalibration calibrate_cgamma(double gamma, const TorusGrid& grid, const QuadratureConfig& cfg) {
    require_gamma_open(gamma);
    cfg.validate();
    const RealField cosine = mode_cosine(grid, 1);
    const CgammaCalibration unit{gamma, 1.0, 0.0};
    const RealField q = frac_laplacian_quadrature(cosine, gamma, unit, cfg);

    const double qq = dot(q, q);
    const double scale = qq > 0.0 ? dot(q, cosine) / qq : std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::infinity();
    if (std::isfinite(scale)) {
        const RealField diff = scale * q - cosine;
        residual = std::sqrt(dot(diff, diff) / dot(cosine, cosine));
    }
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw CalibrationError("calibration produced a non-positive normalization constant", residual);
    if (!(residual < kCalibrationResidualLimit))
        throw CalibrationError("calibration residual " + std::to_string(residual) + " exceeds 1e-3", residual);
    return {gamma, scale, residual};
}

double cross_mode_mismatch(const CgammaCalibration& cal, const TorusGrid& grid, long m, const QuadratureConfig& cfg) {
    const RealField mode = mode_cosine(grid, m);
    const RealField q = frac_laplacian_quadrature(mode, cal.gamma, cal, cfg);
    const double observed = dot(q, mode) / dot(mode, mode);
    const double expected = std::pow(static_cast<double>(std::abs(m)), cal.gamma);
    return std::abs(observed - expected) / expected;
}

RealField frac_laplacian_quadrature(const RealField& f, double gamma, const CgammaCalibration& cal,
                                    const QuadratureConfig& cfg) {
    require_gamma_open(gamma);
    require_calibration(cal, gamma);
    const SpectralField F = spectral::forward(f);
    require_resolved(F);
    const auto w = kernel_weights(gamma, f.grid(), cfg);
    return quadrature_sum(f, node_values(f, F, cfg), w, 1, cal.c_gamma);
}

RealField dgamma(const RealField& f, long h_shift, double gamma, const CgammaCalibration& cal,
                 const QuadratureConfig& cfg) {
    require_gamma_open(gamma);
    require_calibration(cal, gamma);
    const RealField phi = h_shift == 0 ? f : roll(f, h_shift) - f;
    const SpectralField Phi = spectral::forward(phi);
    require_resolved(Phi);
    const auto w = kernel_weights(gamma, f.grid(), cfg);
    return quadrature_sum(phi, node_values(phi, Phi, cfg), w, 2, cal.c_gamma);
}

double cordoba_identity_residual(const RealField& f, double gamma, const CgammaCalibration& cal,
                                 const QuadratureConfig& cfg) {
    const SpectralField F = spectral::forward(f);
    const RealField lam_f = spectral::inverse(frac_laplacian_spectral(F, gamma));
    const RealField lam_sq = spectral::inverse(frac_laplacian_spectral(spectral::forward(f * f), gamma));
    const RealField d = dgamma(f, 0, gamma, cal, cfg);
    const RealField lhs = 2.0 * (f * lam_f);
    double worst = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) worst = std::max(worst, std::abs(lhs[j] - lam_sq[j] - d[j]));
    return worst;
}

RealField commutator(const RealField& f, const RealField& g, double s) {
    if (!(f.grid() == g.grid()))
        throw ValidationError("g", "fields live on different grids (" + std::to_string(f.size()) + " vs " +
                                       std::to_string(g.size()) + ")");
    if (!(s > 0.0)) throw ValidationError("s", "must be positive, got " + std::to_string(s));
    const SpectralField fg = spectral::dealias(spectral::forward(f * g));
    const RealField lam_g = spectral::inverse(abs_power(spectral::forward(g), s));
    const SpectralField f_lam_g = spectral::dealias(spectral::forward(f * lam_g));
    return spectral::inverse(abs_power(fg, s) - f_lam_g);
}

CommutatorExponents CommutatorExponents::energy_estimate(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.5))
        throw ValidationError("gamma", "energy-estimate exponents need gamma in (0, 3/2)");
    const double a = 3.0 / gamma;
    const double b = 6.0 / (3.0 - 2.0 * gamma);
    return {2.0, a, b, b, a};
}

double lp_norm(const RealField& f, double p) {
    if (std::isinf(p)) return f.max_abs();
    if (!(p >= 1.0)) throw ValidationError("p", "Lebesgue exponent must be >= 1");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid().spacing(), 1.0 / p);
}

double commutator_bound_ratio(const RealField& f, const RealField& g, double s, const CommutatorExponents& e) {
    const SpectralField F = spectral::forward(f);
    const SpectralField G = spectral::forward(g);
    const double lhs = lp_norm(commutator(f, g, s), e.p);
    const double fx = lp_norm(spectral::inverse(spectral::derivative(F)), e.p1);
    const double lam_g = lp_norm(spectral::inverse(abs_power(G, s - 1.0)), e.p2);
    const double lam_f = lp_norm(spectral::inverse(abs_power(F, s)), e.p3);
    const double gp = lp_norm(g, e.p4);
    const double rhs = fx * lam_g + lam_f * gp;
    return rhs > 0.0 ? lhs / rhs : 0.0;
}

}  // namespace ccf::ops
