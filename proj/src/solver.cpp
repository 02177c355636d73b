#include "ccf/solver.hpp"

#include "ccf/error.hpp"
#include "ccf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccf::solver {

using spectral::Complex;

void ModelParams::validate() const {
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw ValidationError("gamma", "must lie in (0, 2], got " + std::to_string(gamma));
    if (n < 32 || n % 2 != 0) throw ValidationError("n", "must be even and >= 32, got " + std::to_string(n));
}

void StepControl::validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("cfl", "must lie in (0, 1], got " + std::to_string(cfl));
    if (!(dt_max > 0.0)) throw ValidationError("dt_max", "must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end", "must be positive and finite");
    if (!(snapshot_every > 0.0)) throw ValidationError("snapshot_every", "must be positive");
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Completed: return "Completed";
        case Outcome::BlowupSuspected: return "BlowupSuspected";
        case Outcome::UnderResolved: return "UnderResolved";
        case Outcome::StepCollapse: return "StepCollapse";
        case Outcome::Failed: return "Failed";
    }
    return "Failed";
}

Outcome outcome_from_string(const std::string& s) {
    for (Outcome o : {Outcome::Completed, Outcome::BlowupSuspected, Outcome::UnderResolved, Outcome::StepCollapse,
                      Outcome::Failed})
        if (s == to_string(o)) return o;
    throw SchemaError("unknown outcome '" + s + "'");
}

SpectralField nonlinear_term(const SpectralField& theta_hat, const ModelParams& p) {
    if (!p.nonlinear_on) return SpectralField::zeros(theta_hat.grid());
    try {
        const RealField u = spectral::inverse(ops::hilbert(theta_hat));
        const RealField theta_x = spectral::inverse(spectral::derivative(theta_hat));
        SpectralField product = spectral::forward(u * theta_x);
        return p.dealias_on ? spectral::dealias(product) : product;
    } catch (const NumericalError& e) {
        throw SimulationFault(Outcome::BlowupSuspected, std::string("non-finite nonlinear term: ") + e.what());
    }
}

double stable_dt(const SpectralField& theta_hat, const ModelParams& p, const StepControl& c) {
    (void)p;
    const double speed = spectral::inverse(ops::hilbert(theta_hat)).max_abs();
    return std::min(c.dt_max, c.cfl * theta_hat.grid().spacing() / std::max(1.0, speed));
}

SolverState advance(const SolverState& s, const ModelParams& p, double dt) {
    const auto& grid = s.theta_hat.grid();
    const std::size_t n = grid.size();
    std::vector<double> half(n), full(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double rate = p.dissipation_on ? std::pow(static_cast<double>(std::abs(grid.mode(k))), p.gamma) : 0.0;
        half[k] = std::exp(-rate * 0.5 * dt);
        full[k] = half[k] * half[k];
    }

    using Vec = std::vector<Complex>;
    auto nl = [&](const Vec& v) {
        const SpectralField f = nonlinear_term(SpectralField(grid, v), p);
        Vec out(f.coeffs().begin(), f.coeffs().end());
        for (auto& x : out) x *= dt;
        return out;
    };
    const Vec u(s.theta_hat.coeffs().begin(), s.theta_hat.coeffs().end());
    Vec tmp(n);

    try {
        const Vec a = nl(u);
        for (std::size_t k = 0; k < n; ++k) tmp[k] = half[k] * (u[k] + 0.5 * a[k]);
        const Vec b = nl(tmp);
        for (std::size_t k = 0; k < n; ++k) tmp[k] = half[k] * u[k] + 0.5 * b[k];
        const Vec c = nl(tmp);
        for (std::size_t k = 0; k < n; ++k) tmp[k] = full[k] * u[k] + half[k] * c[k];
        const Vec d = nl(tmp);
        Vec next(n);
        for (std::size_t k = 0; k < n; ++k)
            next[k] = full[k] * u[k] + (full[k] * a[k] + 2.0 * half[k] * (b[k] + c[k]) + d[k]) / 6.0;
        return {s.t + dt, SpectralField(grid, std::move(next)), s.step_count + 1};
    } catch (const NumericalError& e) {
        throw SimulationFault(Outcome::BlowupSuspected, std::string("state became non-finite: ") + e.what());
    }
}

SolverState step(const SolverState& s, const ModelParams& p, const StepControl& c) {
    const double dt = stable_dt(s.theta_hat, p, c);
    if (!(dt >= kMinStep))
        throw SimulationFault(Outcome::StepCollapse, "step size " + std::to_string(dt) + " below 1e-12");
    return advance(s, p, dt);
}

double resolution_monitor(const SpectralField& theta_hat) {
    return spectral::tail_fraction(theta_hat, static_cast<long>(theta_hat.grid().size() / 4));
}

DiagnosticPlan DiagnosticPlan::for_gamma(double gamma) {
    DiagnosticPlan plan;
    const double a = regularity::alpha_policy(gamma);
    if (a > 0.0 && a <= 1.0) plan.holder_alphas.push_back(a);
    plan.holder_alphas.push_back(0.5);
    std::sort(plan.holder_alphas.begin(), plan.holder_alphas.end());
    plan.holder_alphas.erase(std::unique(plan.holder_alphas.begin(), plan.holder_alphas.end()),
                             plan.holder_alphas.end());
    return plan;
}

RunResult run(const RealField& theta0, const ModelParams& p, const StepControl& c, const DiagnosticPlan& plan) {
    p.validate();
    c.validate();
    if (theta0.size() != p.n)
        throw ValidationError("n", "initial data has " + std::to_string(theta0.size()) + " samples, params say " +
                                       std::to_string(p.n));

    RunResult result;
    SpectralField initial = spectral::forward(theta0);
    if (p.dealias_on) initial = spectral::dealias(initial);
    SolverState state{0.0, std::move(initial), 0};

    auto record = [&](const SolverState& s) {
        result.samples.push_back(regularity::sample_diagnostics(s.theta_hat, s.t, p.gamma, plan.holder_alphas));
    };
    auto finish = [&](Outcome o, std::string detail) {
        result.outcome = o;
        result.detail = std::move(detail);
        result.step_count = state.step_count;
        result.t_final = state.t;
        return result;
    };

    record(state);
    const double grad0 = result.samples.front().grad_linf;
    double snapshot_tail = result.samples.front().tail_fraction;
    if (snapshot_tail > regularity::kResolutionTailLimit)
        return finish(Outcome::UnderResolved, "initial data under-resolved: tail fraction " +
                                                  std::to_string(snapshot_tail));

    for (std::size_t snap = 1; state.t < c.t_end; ++snap) {
        const double target = std::min(static_cast<double>(snap) * c.snapshot_every, c.t_end);
        while (state.t < target) {
            try {
                const double dt_cfl = stable_dt(state.theta_hat, p, c);
                if (!(dt_cfl >= kMinStep))
                    throw SimulationFault(Outcome::StepCollapse,
                                          "step size " + std::to_string(dt_cfl) + " below 1e-12");
                const double remaining = target - state.t;
                state = advance(state, p, std::min(dt_cfl, remaining));
                if (std::abs(target - state.t) <= 1e-12 * std::max(1.0, target)) state.t = target;
            } catch (const SimulationFault& f) {
                return finish(f.kind(), f.what());
            }

            const double tail = resolution_monitor(state.theta_hat);
            if (tail > regularity::kResolutionTailLimit) {
                record(state);
                const bool growing = tail > kTailGrowthFactor * snapshot_tail;
                return finish(growing ? Outcome::BlowupSuspected : Outcome::UnderResolved,
                              "tail fraction " + std::to_string(tail) + " at t = " + std::to_string(state.t) +
                                  (growing ? " (rapidly growing)" : ""));
            }
            const double grad = spectral::inverse(spectral::derivative(state.theta_hat)).max_abs();
            if (grad0 > 0.0 && grad > kGradientBlowupFactor * grad0) {
                record(state);
                return finish(Outcome::BlowupSuspected,
                              "gradient grew by " + std::to_string(grad / grad0) + " at t = " + std::to_string(state.t));
            }
        }
        record(state);
        snapshot_tail = result.samples.back().tail_fraction;
    }
    return finish(Outcome::Completed, "");
}

}  // namespace ccf::solver
