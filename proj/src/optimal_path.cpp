#include "lumen/optimal_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lumen/large_emission.hpp"

namespace lumen {

namespace {

void check_phase_bounds(const PhasePoint& p, double x0_lo = -1e-6, double x0_hi = 1.0 + 1e-6) {
    auto blown = [](double v) { return !std::isfinite(v) || std::abs(v) > 1e12; };
    bool bad = blown(p.x0) || blown(p.sigma);
    for (double v : p.x) bad = bad || blown(v);
    if (p.x0 < x0_lo || p.x0 > x0_hi) bad = true;
    if (bad) throw BlowUp("phase-space coordinate left the admissible region");
}

PhasePoint rk4_step(const ModelSpec& spec, const PhasePoint& p, double h) {
    const std::size_t d = p.x.size();
    auto advance = [&](const PhasePoint& base, const PhaseField& f, double w) {
        PhasePoint q = base;
        q.x0 += w * f.dx0;
        q.sigma += w * f.dsigma;
        for (std::size_t i = 0; i < d; ++i) q.x[i] += w * f.dx[i];
        return q;
    };
    const PhaseField k1 = hamiltonian_field(spec, p);
    const PhaseField k2 = hamiltonian_field(spec, advance(p, k1, 0.5 * h));
    const PhaseField k3 = hamiltonian_field(spec, advance(p, k2, 0.5 * h));
    const PhaseField k4 = hamiltonian_field(spec, advance(p, k3, h));

    PhasePoint out = p;
    out.x0 += h / 6.0 * (k1.dx0 + 2.0 * k2.dx0 + 2.0 * k3.dx0 + k4.dx0);
    out.sigma += h / 6.0 * (k1.dsigma + 2.0 * k2.dsigma + 2.0 * k3.dsigma + k4.dsigma);
    for (std::size_t i = 0; i < d; ++i)
        out.x[i] += h / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
    return out;
}

PhaseTrajectory integrate_impl(const ModelSpec& spec, const PhasePoint& start, double T,
                               double step, double x0_lo, double x0_hi) {
    // negative T integrates backward in time
    if (!(step > 0.0) || T == 0.0 || !std::isfinite(T))
        throw StateOutOfRange("step must be positive and T nonzero");
    const long long n = std::max<long long>(1, std::llround(std::abs(T) / step));
    const double h = T / static_cast<double>(n);

    PhaseTrajectory traj;
    traj.times.reserve(n + 1);
    traj.points.reserve(n + 1);
    traj.hamiltonian_values.reserve(n + 1);

    PhasePoint p = start;
    check_phase_bounds(p, x0_lo, x0_hi);
    traj.times.push_back(0.0);
    traj.points.push_back(p);
    traj.hamiltonian_values.push_back(hamiltonian(spec, p));
    for (long long i = 1; i <= n; ++i) {
        p = rk4_step(spec, p, h);
        check_phase_bounds(p, x0_lo, x0_hi);
        traj.times.push_back(static_cast<double>(i) * h);
        traj.points.push_back(p);
        traj.hamiltonian_values.push_back(hamiltonian(spec, p));
    }
    return traj;
}

} // namespace

PhaseTrajectory integrate_hamiltonian(const ModelSpec& spec, const PhasePoint& start, double T,
                                      double step) {
    return integrate_impl(spec, start, T, step, -1e-6, 1.0 + 1e-6);
}

namespace {

struct FluidState {
    double x0;
    std::vector<double> x;
};

// drift at zero momenta: dx0 = mu0(1-x0) - sum mu_i s_i Q_i, dx_i = mu_i s_i Q_i
FluidState fluid_field(const ModelSpec& spec, const FluidState& s) {
    FluidState f{spec.mu0 * (1.0 - s.x0), std::vector<double>(s.x.size(), 0.0)};
    for (std::size_t i = 0; i < spec.channels.size(); ++i) {
        const auto& [t, mu] = spec.channels[i];
        f.x[i] = mu * t.s * q_factor(s.x0, t.r) * q_factor(1.0 - s.x0, t.k - t.r);
        f.x0 -= f.x[i];
    }
    return f;
}

FluidState fluid_rk4_step(const ModelSpec& spec, const FluidState& s, double h) {
    const std::size_t d = s.x.size();
    auto advance = [&](const FluidState& base, const FluidState& f, double w) {
        FluidState q = base;
        q.x0 += w * f.x0;
        for (std::size_t i = 0; i < d; ++i) q.x[i] += w * f.x[i];
        return q;
    };
    const FluidState k1 = fluid_field(spec, s);
    const FluidState k2 = fluid_field(spec, advance(s, k1, 0.5 * h));
    const FluidState k3 = fluid_field(spec, advance(s, k2, 0.5 * h));
    const FluidState k4 = fluid_field(spec, advance(s, k3, h));
    FluidState out = s;
    out.x0 += h / 6.0 * (k1.x0 + 2.0 * k2.x0 + 2.0 * k3.x0 + k4.x0);
    for (std::size_t i = 0; i < d; ++i)
        out.x[i] += h / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
    // the fluid share is confined to [0, 1]; clip integrator overshoot
    out.x0 = std::clamp(out.x0, 0.0, 1.0);
    return out;
}

} // namespace

PositionPath fluid_trajectory(const ModelSpec& spec, double x0_init, double T, double step) {
    if (x0_init < 0.0 || x0_init > 1.0) throw StateOutOfRange("x0_init outside [0, 1]");
    if (!(step > 0.0) || !(T > 0.0)) throw StateOutOfRange("T and step must be positive");
    const long long n = std::max<long long>(1, std::llround(T / step));
    const double h = T / static_cast<double>(n);

    PositionPath path;
    FluidState s{x0_init, std::vector<double>(spec.channels.size(), 0.0)};
    path.times.push_back(0.0);
    path.x0.push_back(s.x0);
    path.x.push_back(s.x);
    for (long long i = 1; i <= n; ++i) {
        s = fluid_rk4_step(spec, s, h);
        path.times.push_back(static_cast<double>(i) * h);
        path.x0.push_back(s.x0);
        path.x.push_back(s.x);
    }
    return path;
}

FluidEquilibrium fluid_equilibrium(const ModelSpec& spec) {
    const double T = 50.0 / spec.mu0;
    FluidState s{0.5, std::vector<double>(spec.channels.size(), 0.0)};
    const long long n = 20000;
    const double h = T / static_cast<double>(n);
    for (long long i = 0; i < n; ++i) s = fluid_rk4_step(spec, s, h);

    const FluidState f = fluid_field(spec, s);
    FluidEquilibrium eq;
    eq.x0 = s.x0;
    for (double v : f.x) eq.emission_rate += v;
    return eq;
}

PositionPath positions(const PhaseTrajectory& traj) {
    PositionPath path;
    path.times = traj.times;
    path.x0.reserve(traj.size());
    path.x.reserve(traj.size());
    for (const auto& p : traj.points) {
        path.x0.push_back(p.x0);
        path.x.push_back(p.x);
    }
    return path;
}

namespace {

// Constant-x0 trajectory assembled from a stationary solution; this is the
// closed-form solution of the Hamiltonian system, so it is built rather than
// re-integrated (forward integration off a saddle amplifies rounding at rate
// comparable to the emission flux).
PhaseTrajectory constant_trajectory(const ModelSpec& spec, const StationarySolution& sol,
                                    double T, double step) {
    const long long n = std::max<long long>(1, std::llround(T / step));
    const double h = T / static_cast<double>(n);
    const std::size_t d = spec.channels.size();

    PhasePoint p;
    p.x0 = sol.x0;
    p.sigma = sol.sigma;
    p.kappa = sol.kappa;
    p.x = std::vector<double>(d, 0.0);
    const double h_value = hamiltonian(spec, p);

    PhaseTrajectory traj;
    traj.times.reserve(n + 1);
    traj.points.reserve(n + 1);
    traj.hamiltonian_values.reserve(n + 1);
    for (long long i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * h;
        for (std::size_t c = 0; c < d; ++c) p.x[c] = sol.velocities[c] * t;
        traj.times.push_back(t);
        traj.points.push_back(p);
        traj.hamiltonian_values.push_back(h_value);
    }
    return traj;
}

// The terminal conditions sigma(T) = sigma_terminal and x_i(T) = B_i are taken
// as exact initial data of a backward integration; the shooting unknowns are
// x0(T) and the kappa of the emitting channels, and the residuals live at
// t = 0. Backward time turns the momentum equation's finite-time blow-down
// into relaxation toward the plateau, which keeps the Jacobian informative.
struct ShootingProblem {
    const ModelSpec& spec;
    double x0_init;
    std::vector<double> targets;
    double T;
    double sigma_terminal;
    double step;
    std::vector<std::size_t> active; // channels with positive final targets
    std::vector<double> fixed_kappa; // kappa for dropped channels

    PhasePoint terminal_point(const std::vector<double>& u) const {
        PhasePoint p;
        p.x0 = u[0];
        p.x = targets;
        p.sigma = sigma_terminal;
        p.kappa = fixed_kappa;
        for (std::size_t j = 0; j < active.size(); ++j) p.kappa[active[j]] = u[j + 1];
        return p;
    }

    // residuals at t = 0: x0 miss, then scaled emission starts per active channel
    std::vector<double> residual(const std::vector<double>& u, PhaseTrajectory* out = nullptr) const {
        std::vector<double> r(active.size() + 1, 1e8);
        try {
            PhaseTrajectory traj = integrate_impl(spec, terminal_point(u), -T, step, -0.5, 1.5);
            const PhasePoint& origin = traj.points.back();
            r[0] = origin.x0 - x0_init;
            for (std::size_t j = 0; j < active.size(); ++j)
                r[j + 1] = origin.x[active[j]] / std::max(1.0, targets[active[j]]);
            if (out) *out = std::move(traj);
        } catch (const BlowUp&) {
            // keep the penalty residual; damping will shrink the step
        }
        return r;
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool shoot_converged(const std::vector<double>& r) {
    bool ok = std::abs(r.front()) <= 1e-8;
    for (std::size_t j = 1; j < r.size(); ++j) ok = ok && std::abs(r[j]) <= 1e-6;
    return ok;
}

// Solve J dx = -r by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> J, std::vector<double> r) {
    const std::size_t n = r.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(J[row][col]) > std::abs(J[piv][col])) piv = row;
        std::swap(J[piv], J[col]);
        std::swap(r[piv], r[col]);
        if (J[col][col] == 0.0) throw NoConvergence("singular shooting Jacobian");
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = J[row][col] / J[col][col];
            for (std::size_t c = col; c < n; ++c) J[row][c] -= f * J[col][c];
            r[row] -= f * r[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double s = r[row];
        for (std::size_t c = row + 1; c < n; ++c) s += J[row][c] * x[c];
        x[row] = -s / J[row][row];
    }
    return x;
}

// damped Newton with a forward-difference Jacobian; updates u in place
void newton_shoot(const ShootingProblem& problem, std::vector<double>& u,
                  const BvpOptions& options) {
    std::vector<double> r = problem.residual(u);
    double rnorm = norm2(r);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (shoot_converged(r)) return;
        if (rnorm >= 1e7) throw NoConvergence("shooting start is outside the integrable region");

        std::vector<std::vector<double>> J(r.size(), std::vector<double>(u.size(), 0.0));
        for (std::size_t col = 0; col < u.size(); ++col) {
            std::vector<double> up = u;
            const double h = 1e-7 * std::max(1.0, std::abs(u[col]));
            up[col] += h;
            const std::vector<double> rp = problem.residual(up);
            for (std::size_t row = 0; row < r.size(); ++row) J[row][col] = (rp[row] - r[row]) / h;
        }

        const std::vector<double> delta = solve_linear(J, r);
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < options.max_halvings; ++halving, lambda *= 0.5) {
            std::vector<double> trial = u;
            for (std::size_t c = 0; c < u.size(); ++c) trial[c] += lambda * delta[c];
            const std::vector<double> rt = problem.residual(trial);
            if (norm2(rt) < rnorm * (1.0 - 1e-4 * lambda)) {
                u = std::move(trial);
                r = rt;
                rnorm = norm2(r);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NoConvergence("shooting stalled at residual " + std::to_string(rnorm));
    }
    throw NoConvergence("shooting did not converge within the iteration budget");
}

} // namespace

PhaseTrajectory solve_bvp(const ModelSpec& spec, const BoundaryData& bd, const BvpOptions& options) {
    validate_model(spec);
    const std::size_t d = spec.channels.size();
    if (bd.targets.size() != d) throw StateOutOfRange("boundary data needs one target per channel");
    for (double b : bd.targets)
        if (b < 0.0) throw StateOutOfRange("emission targets must be nonnegative");
    if (!(bd.T > 0.0)) throw StateOutOfRange("horizon must be positive");
    const double step = options.step > 0.0 ? options.step : 1e-3 * bd.T;

    double total = 0.0;
    for (double b : bd.targets) total += b;

    // Start at the asymptotic share: the stationary solution is the exact
    // constant solution of the system with these boundary data.
    if (total > 0.0 && bd.sigma_terminal == 0.0) {
        try {
            const AsymptoticShare share = asymptotic_share(spec);
            if (std::abs(bd.x0_init - share.x_hat) <= 1e-9) {
                std::vector<double> alpha(d);
                for (std::size_t i = 0; i < d; ++i) alpha[i] = bd.targets[i] / total;
                const StationarySolution sol = stationary_solution(spec, total / bd.T, alpha);
                return constant_trajectory(spec, sol, bd.T, step);
            }
        } catch (const Error&) {
            // fall through to shooting
        }
    }

    ShootingProblem problem{spec, bd.x0_init,        bd.targets,
                            bd.T, bd.sigma_terminal, step,
                            {},   std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < d; ++i) {
        if (bd.targets[i] > 0.0)
            problem.active.push_back(i);
        else
            problem.fixed_kappa[i] = -50.0 / spec.channels[i].triplet.s;
    }

    // Continuation in the active targets: the problem with the fluid emissions
    // as targets is solved from momenta near zero, then the targets are moved
    // toward the requested ones with warm starts, halving the increment when
    // a stage fails.
    const PositionPath fluid = fluid_trajectory(spec, bd.x0_init, bd.T, step);
    const std::vector<double> easy_targets = fluid.x.back();

    std::vector<double> u(problem.active.size() + 1, 0.0);
    u[0] = fluid.x0.back();

    auto stage_targets = [&](double f) {
        std::vector<double> targets(d, 0.0);
        for (std::size_t j = 0; j < problem.active.size(); ++j) {
            const std::size_t i = problem.active[j];
            targets[i] = (1.0 - f) * easy_targets[i] + f * bd.targets[i];
        }
        return targets;
    };

    double f = 0.0;
    double increment = 1.0;
    while (true) {
        const double f_next = std::min(1.0, f + increment);
        problem.targets = stage_targets(f_next);
        try {
            std::vector<double> trial = u;
            newton_shoot(problem, trial, options);
            u = trial;
            f = f_next;
            if (f >= 1.0) break;
            increment = std::min(2.0 * increment, 1.0 - f);
        } catch (const NoConvergence&) {
            if (increment < 1.0 / 64.0) throw;
            increment *= 0.5;
        }
    }

    PhaseTrajectory backward;
    problem.residual(u, &backward);
    // reverse onto the forward grid 0..T
    PhaseTrajectory traj;
    const std::size_t n = backward.size();
    traj.times.resize(n);
    traj.points.resize(n);
    traj.hamiltonian_values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        traj.times[j] = bd.T + backward.times[n - 1 - j]; // backward times are 0..-T
        traj.points[j] = backward.points[n - 1 - j];
        traj.hamiltonian_values[j] = backward.hamiltonian_values[n - 1 - j];
    }
    return traj;
}

} // namespace lumen
