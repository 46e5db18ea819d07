#include "lumen/hamiltonian.hpp"

#include <cmath>
#include <limits>

namespace lumen {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double q_factor(double z, int q) {
    if (q < 0 || z < 0.0 || z > 1.0) return 0.0;
    double value = 1.0;
    for (int j = 1; j <= q; ++j) value *= z / j;
    return value;
}

double hamiltonian(const ModelSpec& spec, const PhasePoint& p) {
    double h = spec.mu0 * (1.0 - p.x0) * std::expm1(p.sigma);
    for (std::size_t i = 0; i < spec.channels.size(); ++i) {
        const auto& [t, mu] = spec.channels[i];
        const double qi = q_factor(p.x0, t.r) * q_factor(1.0 - p.x0, t.k - t.r);
        h += mu * qi * std::expm1(t.s * (p.kappa[i] - p.sigma));
    }
    return h;
}

PhaseField hamiltonian_field(const ModelSpec& spec, const PhasePoint& p) {
    const std::size_t d = spec.channels.size();
    PhaseField f;
    f.dx = std::vector<double>(d, 0.0);
    f.dkappa = std::vector<double>(d, 0.0);

    f.dx0 = spec.mu0 * (1.0 - p.x0) * std::exp(p.sigma);
    f.dsigma = spec.mu0 * std::expm1(p.sigma);
    for (std::size_t i = 0; i < d; ++i) {
        const auto& [t, mu] = spec.channels[i];
        const double qi = q_factor(p.x0, t.r) * q_factor(1.0 - p.x0, t.k - t.r);
        const double jump = std::exp(t.s * (p.kappa[i] - p.sigma));
        f.dx[i] = mu * t.s * qi * jump;
        f.dx0 -= f.dx[i];
        // d/dx0 of Q(x0,r) Q(1-x0,k-r); Q(1-x0, k-r-1) vanishes when k = r.
        const double dq = q_factor(p.x0, t.r - 1) * q_factor(1.0 - p.x0, t.k - t.r) -
                          q_factor(p.x0, t.r) * q_factor(1.0 - p.x0, t.k - t.r - 1);
        f.dsigma -= mu * dq * (jump - 1.0);
    }
    return f;
}

namespace {

// After maximizing over the kappa_i in closed form, the remaining objective in
// sigma is g(sigma) = sigma*flux - A*(e^sigma - 1) + const with
// flux = v0 + sum v_i and A = mu0*(1-x0): strictly concave, maximized where
// A e^sigma = flux.
struct SigmaObjective {
    double flux;
    double pump; // A = mu0 (1 - x0)

    double gradient(double sigma) const { return flux - pump * std::exp(sigma); }
    double value(double sigma) const { return sigma * flux - pump * std::expm1(sigma); }
};

// Bracketing plus Newton safeguarded by bisection, tolerance on the gradient.
double maximize_sigma(const SigmaObjective& g) {
    double lo = -50.0, hi = 50.0;
    while (g.gradient(lo) <= 0.0) { lo *= 2.0; if (lo < -1e6) return -kInf; }
    while (g.gradient(hi) >= 0.0) { hi *= 2.0; if (hi > 1e6) return kInf; }

    const double tol = 1e-12 * std::max(1.0, std::abs(g.flux));
    double sigma = g.pump > 0.0 ? std::log(g.flux / g.pump) : 0.5 * (lo + hi);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double grad = g.gradient(sigma);
        if (std::abs(grad) <= tol) break;
        if (grad > 0.0) lo = sigma; else hi = sigma;
        const double curv = -g.pump * std::exp(sigma);
        double next = curv < 0.0 ? sigma - grad / curv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        sigma = next;
    }
    return sigma;
}

} // namespace

LagrangeResult lagrangian(const ModelSpec& spec, double x0, const Velocity& vel) {
    const std::size_t d = spec.channels.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    LagrangeResult res;
    res.kappa = std::vector<double>(d, nan);

    double flux = vel.v0;
    double offset = 0.0; // sigma-independent part of the inner maximum
    std::vector<double> qs(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto& [t, mu] = spec.channels[i];
        const double vi = vel.v[i];
        qs[i] = q_factor(x0, t.r) * q_factor(1.0 - x0, t.k - t.r);
        if (vi < 0.0) { // emissions are non-decreasing
            res.value = kInf;
            res.sigma = nan;
            return res;
        }
        if (vi > 0.0) {
            if (qs[i] <= 0.0) { // impossible transition: infinite cost
                res.value = kInf;
                res.sigma = nan;
                return res;
            }
            flux += vi;
            offset += (vi / t.s) * (std::log(vi / (t.s * mu * qs[i])) - 1.0) + mu * qs[i];
        } else {
            offset += mu * qs[i]; // limit kappa_i -> -inf
        }
    }

    const double pump = spec.mu0 * (1.0 - x0);
    if (flux < 0.0) { // total inflow cannot be negative
        res.value = kInf;
        res.sigma = nan;
        return res;
    }

    double sigma;
    if (flux == 0.0) {
        // supremum as sigma -> -inf (or sigma-independent when pump = 0)
        sigma = pump > 0.0 ? -kInf : 0.0;
        res.value = offset + pump;
    } else if (pump == 0.0) {
        res.value = kInf; // inflow required but pumping impossible at x0 = 1
        res.sigma = nan;
        return res;
    } else {
        const SigmaObjective g{flux, pump};
        sigma = maximize_sigma(g);
        res.value = g.value(sigma) + offset;
    }

    // the transform is nonnegative (sigma = kappa = 0 is feasible); clear
    // rounding noise around the zero at the fluid velocity
    if (res.value < 0.0 && res.value > -1e-9) res.value = 0.0;

    res.sigma = sigma;
    for (std::size_t i = 0; i < d; ++i) {
        const auto& [t, mu] = spec.channels[i];
        res.kappa[i] = vel.v[i] > 0.0
                           ? sigma + std::log(vel.v[i] / (t.s * mu * qs[i])) / t.s
                           : -kInf;
    }
    return res;
}

double rate_functional(const ModelSpec& spec, const PositionPath& path) {
    const std::size_t n = path.size();
    const std::size_t d = spec.channels.size();
    if (n < 2) return 0.0;
    for (std::size_t j = 1; j < n; ++j)
        if (!(path.times[j] > path.times[j - 1]))
            throw GridOutOfRange("path times must be strictly increasing");

    auto velocity_at = [&](std::size_t j) {
        const std::size_t lo = j == 0 ? 0 : j - 1;
        const std::size_t hi = j + 1 == n ? j : j + 1;
        const double dt = path.times[hi] - path.times[lo];
        Velocity vel;
        vel.v0 = (path.x0[hi] - path.x0[lo]) / dt;
        vel.v.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            vel.v[i] = (path.x[hi][i] - path.x[lo][i]) / dt;
            if (vel.v[i] < 0.0 && vel.v[i] > -1e-14) vel.v[i] = 0.0;
        }
        return vel;
    };

    double total = 0.0;
    double prev = lagrangian(spec, path.x0[0], velocity_at(0)).value;
    for (std::size_t j = 1; j < n; ++j) {
        const double cur = lagrangian(spec, path.x0[j], velocity_at(j)).value;
        if (std::isinf(prev) || std::isinf(cur)) return kInf; // infeasible path
        total += 0.5 * (prev + cur) * (path.times[j] - path.times[j - 1]);
        prev = cur;
    }
    return total;
}

} // namespace lumen
