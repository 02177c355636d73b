#include "ccf/regularity.hpp"

#include "ccf/error.hpp"
#include "ccf/kernels.hpp"
#include "ccf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ccf::regularity {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(name, "must be a positive finite number, got " + std::to_string(v));
}

void require_supercritical(double gamma, double alpha) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ValidationError("gamma", "T* needs gamma in (0, 1), got " + std::to_string(gamma));
    if (!(alpha >= 1.0 - gamma && alpha < 1.0))
        throw ValidationError("alpha", "must lie in [1 - gamma, 1) = [" + std::to_string(1.0 - gamma) +
                                           ", 1), got " + std::to_string(alpha));
}

double xi_initial(double gamma, double alpha, double linf0, const RegularityConstants& k) {
    return std::pow(k.k2 * alpha * linf0, 1.0 / (1.0 - gamma));
}

}  // namespace

void RegularityConstants::validate() const {
    require_positive(k1, "k1");
    require_positive(k2, "k2");
    require_positive(c0, "c0");
    require_positive(C_star, "C_star");
    require_positive(C1, "C1");
    require_positive(C3, "C3");
}

double sobolev_norm(const SpectralField& F, double s) {
    if (!(s >= 0.0)) throw ValidationError("s", "Sobolev index must be non-negative");
    const auto& g = F.grid();
    double acc = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        const long m = g.mode(k);
        if (m == 0) {
            if (s == 0.0) acc += std::norm(F.coeffs()[k]);
            continue;
        }
        acc += std::pow(static_cast<double>(std::abs(m)), 2.0 * s) * std::norm(F.coeffs()[k]);
    }
    return std::sqrt(2.0 * std::numbers::pi * acc);
}

double holder_seminorm(const RealField& f, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("alpha", "Holder exponent must lie in (0, 1], got " + std::to_string(alpha));
    return kernels::holder_max_parallel(f.values(), f.grid().spacing(), alpha);
}

double alpha_policy(double gamma) { return std::min(2.0 * (1.0 - gamma), 0.5); }

// ---------------------------------------------------------------------------
// xi schedule and T*

double RegularitySchedule::xi(double t) const {
    if (t >= t_star) return 0.0;
    const double base = std::pow(xi0, gamma) - gamma * t / (alpha * k1);
    return base > 0.0 ? std::pow(base, 1.0 / gamma) : 0.0;
}

RegularitySchedule make_schedule(double gamma, double alpha, double linf0, const RegularityConstants& k) {
    require_supercritical(gamma, alpha);
    require_positive(linf0, "linf0");
    k.validate();
    RegularitySchedule s;
    s.gamma = gamma;
    s.alpha = alpha;
    s.k1 = k.k1;
    s.xi0 = xi_initial(gamma, alpha, linf0, k);
    s.t_star = t_star(gamma, alpha, linf0, k);
    s.M = 4.0 * linf0 / std::pow(s.xi0, alpha);
    return s;
}

double xi_of_t(double t, double gamma, double alpha, double linf0, const RegularityConstants& k) {
    return make_schedule(gamma, alpha, linf0, k).xi(t);
}

double t_star(double gamma, double alpha, double linf0, const RegularityConstants& k) {
    require_supercritical(gamma, alpha);
    require_positive(linf0, "linf0");
    k.validate();
    const double q = 1.0 / (1.0 - gamma);
    const double C = k.C_star * k.k1 * std::pow(k.k2, gamma * q) / gamma;
    return C * std::pow(alpha, q) * std::pow(linf0, gamma * q);
}

RealField v_field(const RealField& theta, long h_index, double t, const RegularitySchedule& sched) {
    const auto n = static_cast<long>(theta.size());
    const long cells = ((h_index % n) + n) % n;
    const double h = static_cast<double>(std::min(cells, n - cells)) * theta.grid().spacing();
    const double xi = sched.xi(t);
    const double denom = std::pow(xi * xi + h * h, 0.5 * sched.alpha);
    std::vector<double> v(theta.size(), 0.0);
    for (long j = 0; j < n; ++j) {
        const double diff = theta[static_cast<std::size_t>((j + cells) % n)] - theta[static_cast<std::size_t>(j)];
        v[static_cast<std::size_t>(j)] = denom > 0.0 ? diff / denom : 0.0;
    }
    return RealField(theta.grid(), std::move(v));
}

// ---------------------------------------------------------------------------
// T1 and gamma_1

LocalTimeExponents local_time_exponents(double gamma) {
    const double d = 3.0 * (9.0 + 4.0 * gamma);
    return {2.0 * gamma * (9.0 + 2.0 * gamma) / d, 2.0 - 4.0 * gamma * (6.0 + gamma) / d};
}

double t_local(double gamma, double l2, double hdot32, const RegularityConstants& k) {
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw ValidationError("gamma", "must lie in (0, 2], got " + std::to_string(gamma));
    require_positive(l2, "l2");
    require_positive(hdot32, "hdot32");
    k.validate();
    const auto e = local_time_exponents(gamma);
    return 1.0 / (k.C1 * std::pow(l2, e.e1) * std::pow(hdot32, e.e2));
}

double gamma_one_exponent(double gamma) {
    return (18.0 - 3.0 * gamma - 2.0 * gamma * gamma) / (9.0 + 4.0 * gamma);
}

double gamma_one_bound(double gamma, double R, const RegularityConstants& k) {
    return std::pow(R, -gamma_one_exponent(gamma)) * std::pow(k.C3, -(1.0 - gamma));
}

bool gamma_one_condition(double gamma, double R, const RegularityConstants& k) {
    return alpha_policy(gamma) <= gamma_one_bound(gamma, R, k);
}

std::optional<double> gamma_one(double R, const RegularityConstants& k, std::span<const double> gamma_grid) {
    if (!(R >= 1.0) || !std::isfinite(R)) throw ValidationError("R", "must be >= 1, got " + std::to_string(R));
    k.validate();
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
        const double g = gamma_grid[i];
        if (!(g >= 0.5 && g < 1.0))
            throw ValidationError("gamma_grid", "entries must lie in [1/2, 1), got " + std::to_string(g));
        if (i > 0 && !(g > gamma_grid[i - 1]))
            throw ValidationError("gamma_grid", "must be sorted strictly ascending");
    }
    for (double g : gamma_grid)
        if (gamma_one_condition(g, R, k)) return g;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Diagnostics and the energy probe

DiagnosticsSample sample_diagnostics(const SpectralField& theta_hat, double t, double gamma,
                                     std::span<const double> holder_alphas) {
    const RealField theta = spectral::inverse(theta_hat);
    const RealField grad = spectral::inverse(spectral::derivative(theta_hat));
    DiagnosticsSample s;
    s.t = t;
    s.l2 = sobolev_norm(theta_hat, 0.0);
    s.linf = theta.max_abs();
    s.mean = theta_hat.at(0).real();
    s.hdot_half = sobolev_norm(theta_hat, 0.5);
    s.hdot_three_half = sobolev_norm(theta_hat, 1.5);
    s.hdot_mid = sobolev_norm(theta_hat, 0.5 * (3.0 + gamma));
    for (double a : holder_alphas) s.holder.emplace_back(a, holder_seminorm(theta, a));
    s.tail_fraction = spectral::tail_fraction(theta_hat, static_cast<long>(theta_hat.grid().size() / 4));
    s.min_value = theta.min();
    s.max_value = theta.max();
    s.grad_linf = grad.max_abs();
    return s;
}

std::vector<double> time_derivative(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = t.size();
    if (y.size() != n) throw ValidationError("y", "series length differs from time axis");
    if (n < 3) throw ValidationError("t", "need at least three samples for second-order differences");
    // Derivative of the quadratic through (t0,y0),(t1,y1),(t2,y2) evaluated at `at`.
    auto lagrange = [](double t0, double t1, double t2, double y0, double y1, double y2, double at) {
        return y0 * (2 * at - t1 - t2) / ((t0 - t1) * (t0 - t2)) + y1 * (2 * at - t0 - t2) / ((t1 - t0) * (t1 - t2)) +
               y2 * (2 * at - t0 - t1) / ((t2 - t0) * (t2 - t1));
    };
    std::vector<double> d(n);
    d[0] = lagrange(t[0], t[1], t[2], y[0], y[1], y[2], t[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = lagrange(t[i - 1], t[i], t[i + 1], y[i - 1], y[i], y[i + 1], t[i]);
    d[n - 1] = lagrange(t[n - 3], t[n - 2], t[n - 1], y[n - 3], y[n - 2], y[n - 1], t[n - 1]);
    return d;
}

double h32_barrier(double t, double gamma, double C, double l2_initial, double hdot32_initial) {
    const auto e = local_time_exponents(gamma);
    const double rate = e.e2 * C * std::pow(l2_initial, e.e1) * std::pow(hdot32_initial, e.e2);
    const double base = 1.0 - rate * t;
    if (base <= 0.0) return kInf;
    return hdot32_initial / std::pow(base, 1.0 / e.e2);
}

ProbeReport energy_inequality_probe(std::span<const DiagnosticsSample> samples, double gamma) {
    if (samples.size() < 3) throw NumericalError("probe refused: need at least three snapshots");
    for (const auto& s : samples)
        if (!(s.tail_fraction <= kResolutionTailLimit))
            throw NumericalError("probe refused: record is under-resolved at t = " + std::to_string(s.t));

    std::vector<double> t, Y;
    for (const auto& s : samples) {
        t.push_back(s.t);
        Y.push_back(s.hdot_three_half * s.hdot_three_half);
    }
    const auto dY = time_derivative(t, Y);
    const auto e = local_time_exponents(gamma);

    ProbeReport r;
    r.l2_initial = samples.front().l2;
    r.hdot32_initial = samples.front().hdot_three_half;
    r.fitted_C = -kInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double z = samples[i].hdot_mid * samples[i].hdot_mid;
        const double power = std::pow(Y[i], 1.0 + 0.5 * e.e2) * std::pow(r.l2_initial, e.e1);
        if (!(power > 0.0)) continue;
        r.fitted_C = std::max(r.fitted_C, (0.5 * dY[i] + 0.5 * z) / power);
        ++r.samples_used;
    }
    if (r.samples_used == 0) throw NumericalError("probe refused: H^3/2 norm vanishes on every snapshot");

    r.t_local_fitted = r.fitted_C > 0.0
                           ? t_local(gamma, r.l2_initial, r.hdot32_initial, {.C1 = 4.0 * r.fitted_C})
                           : kInf;
    r.max_barrier_excess = -kInf;
    for (const auto& s : samples) {
        if (s.t > r.t_local_fitted) break;
        const double bar = h32_barrier(s.t, gamma, r.fitted_C, r.l2_initial, r.hdot32_initial);
        r.max_barrier_excess = std::max(r.max_barrier_excess, s.hdot_three_half / bar - 1.0);
    }
    return r;
}

}  // namespace ccf::regularity
