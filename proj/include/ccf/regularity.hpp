#pragma once
// Norms, the Holder machinery (v-field and xi schedule), the eventual
// regularization time T*, the local-existence time T1, the gamma_1
// threshold, and the per-snapshot diagnostics the solver records.
//
// Every constant that is not pinned numerically (k1, k2, c0, C1, C3) defaults
// to 1, so all reported times are in units of the configured constants.

#include "ccf/spectral.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ccf::regularity {

using spectral::RealField;
using spectral::SpectralField;

struct RegularityConstants {
    double k1 = 1.0;
    double k2 = 1.0;
    double c0 = 1.0;
    /// Extra factor on the aggregate C = k1 k2^(gamma/(1-gamma)) / gamma of T*.
    double C_star = 1.0;
    double C1 = 1.0;
    double C3 = 1.0;

    void validate() const;
    friend bool operator==(const RegularityConstants&, const RegularityConstants&) = default;
};

/// (2 pi sum |m|^(2s) |coeff_m|^2)^(1/2); the mean is excluded for s > 0.
double sobolev_norm(const SpectralField& F, double s);

/// Largest difference quotient |f_i - f_j| / d(x_i, x_j)^alpha over grid
/// pairs, d the geodesic torus distance. alpha in (0, 1].
double holder_seminorm(const RealField& f, double alpha);

/// alpha = min(2 (1 - gamma), 1/2).
double alpha_policy(double gamma);

struct RegularitySchedule {
    double gamma = 0.0;
    double alpha = 0.0;
    double k1 = 1.0;
    double xi0 = 0.0;
    double t_star = 0.0;
    /// Threshold 4 ||theta0||_inf / xi0^alpha.
    double M = 0.0;

    double xi(double t) const;
};

/// gamma in (0, 1), alpha in [1 - gamma, 1), linf0 > 0. The lower end is
/// closed because the default policy reaches it at gamma = 1/2.
RegularitySchedule make_schedule(double gamma, double alpha, double linf0, const RegularityConstants& k = {});

/// [xi0^gamma - gamma t / (alpha k1)]^(1/gamma) for t < T*, else exactly 0,
/// with xi0 = (k2 alpha linf0)^(1/(1-gamma)).
double xi_of_t(double t, double gamma, double alpha, double linf0, const RegularityConstants& k = {});

/// C_star * k1 k2^(gamma/(1-gamma)) / gamma * alpha^(1/(1-gamma)) * linf0^(gamma/(1-gamma)).
double t_star(double gamma, double alpha, double linf0, const RegularityConstants& k = {});

/// delta_h theta / (xi(t)^2 + |h|^2)^(alpha/2) with h = h_index grid cells
/// measured geodesically.
RealField v_field(const RealField& theta, long h_index, double t, const RegularitySchedule& sched);

struct LocalTimeExponents {
    double e1;  ///< on ||theta0||_L2: 2 gamma (9 + 2 gamma) / (3 (9 + 4 gamma))
    double e2;  ///< on ||theta0||_H^3/2: 2 - 4 gamma (6 + gamma) / (3 (9 + 4 gamma))
};
LocalTimeExponents local_time_exponents(double gamma);

/// [C1 ||theta0||_L2^e1 ||theta0||_H^3/2^e2]^-1.
double t_local(double gamma, double l2, double hdot32, const RegularityConstants& k = {});

/// Exponent (18 - 3 gamma - 2 gamma^2) / (9 + 4 gamma) on R in the gamma_1 condition.
double gamma_one_exponent(double gamma);
/// R^-exponent * C3^-(1 - gamma), the upper bound alpha must not exceed.
double gamma_one_bound(double gamma, double R, const RegularityConstants& k);
/// alpha_policy(gamma) <= gamma_one_bound(gamma, R, k).
bool gamma_one_condition(double gamma, double R, const RegularityConstants& k);

/// Smallest grid value satisfying gamma_one_condition; nullopt if none does.
/// The grid must be sorted ascending inside [1/2, 1).
std::optional<double> gamma_one(double R, const RegularityConstants& k, std::span<const double> gamma_grid);

/// One snapshot of a run.
struct DiagnosticsSample {
    double t = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double mean = 0.0;  ///< average value, coeff_0
    double hdot_half = 0.0;
    double hdot_three_half = 0.0;
    double hdot_mid = 0.0;  ///< ||Lambda^((3+gamma)/2) theta||
    std::vector<std::pair<double, double>> holder;  ///< (alpha, seminorm)
    double tail_fraction = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    double grad_linf = 0.0;  ///< ||theta_x||_inf
};

/// Energy in |m| > n/4 relative to total (mean excluded) above which a run
/// counts as under-resolved.
inline constexpr double kResolutionTailLimit = 1e-4;

DiagnosticsSample sample_diagnostics(const SpectralField& theta_hat, double t, double gamma,
                                     std::span<const double> holder_alphas);

/// d/dt of a sampled series: centered three-point differences inside,
/// one-sided second-order stencils at both ends. Handles uneven spacing.
std::vector<double> time_derivative(std::span<const double> t, std::span<const double> y);

struct ProbeReport {
    /// Smallest C with 1/2 d/dt Y + 1/2 Z <= C Y^(1 + e2/2) L^e1 at every
    /// snapshot, Y = ||Lambda^3/2 theta||^2, Z = ||Lambda^((3+gamma)/2) theta||^2,
    /// L = ||theta0||_L2. Negative when dissipation dominates throughout.
    double fitted_C = 0.0;
    /// T1 with C1 = 4 fitted_C; infinite when fitted_C <= 0.
    double t_local_fitted = 0.0;
    double l2_initial = 0.0;
    double hdot32_initial = 0.0;
    /// max over snapshots with t <= t_local_fitted of ||theta||_H^3/2 / barrier - 1.
    double max_barrier_excess = 0.0;
    std::size_t samples_used = 0;
};

/// Closed-form a-priori barrier for ||theta(t)||_H^3/2 under constant C.
/// Infinite once the denominator reaches zero.
double h32_barrier(double t, double gamma, double C, double l2_initial, double hdot32_initial);

/// Throws NumericalError ("probe refused") when fewer than three samples
/// exist or any sample is under-resolved.
ProbeReport energy_inequality_probe(std::span<const DiagnosticsSample> samples, double gamma);

}  // namespace ccf::regularity
