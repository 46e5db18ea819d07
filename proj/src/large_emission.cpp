#include "lumen/large_emission.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "lumen/hamiltonian.hpp"
#include "lumen/optimal_path.hpp"

namespace lumen {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

AsymptoticShare asymptotic_share(const ModelSpec& spec) {
    validate_model(spec);
    int best = 0;
    for (int i = 1; i < spec.dimension(); ++i)
        if (spec.channels[i].triplet.s > spec.channels[best].triplet.s) best = i;
    for (int i = 0; i < spec.dimension(); ++i)
        if (i != best && spec.channels[i].triplet.s == spec.channels[best].triplet.s)
            throw AmbiguousDominantChannel("channels " + std::to_string(best + 1) + " and " +
                                           std::to_string(i + 1) + " tie at the maximal s");
    const auto& t = spec.channels[best].triplet;
    return AsymptoticShare{static_cast<double>(t.r) / (t.k + t.s), best + 1};
}

namespace {

struct ChannelTerms {
    double q;  // Q(x0, r) Q(1-x0, k-r)
    double dq; // d/dx0 of q
    double d2; // second derivative
};

ChannelTerms channel_terms(const ReactionTriplet& t, double x0) {
    ChannelTerms c;
    c.q = q_factor(x0, t.r) * q_factor(1.0 - x0, t.k - t.r);
    c.dq = q_factor(x0, t.r - 1) * q_factor(1.0 - x0, t.k - t.r) -
           q_factor(x0, t.r) * q_factor(1.0 - x0, t.k - t.r - 1);
    c.d2 = q_factor(x0, t.r - 2) * q_factor(1.0 - x0, t.k - t.r) -
           2.0 * q_factor(x0, t.r - 1) * q_factor(1.0 - x0, t.k - t.r - 1) +
           q_factor(x0, t.r) * q_factor(1.0 - x0, t.k - t.r - 2);
    return c;
}

// Leading-order share for a given split, from the stationary balance:
// (1-x)/x = (1 + sum (a_i/s_i)(k_i-r_i)) / (sum (a_i/s_i) r_i).
double split_share(const ModelSpec& spec, const std::vector<double>& alpha) {
    double p = 0.0, k = 0.0;
    for (int i = 0; i < spec.dimension(); ++i) {
        const auto& t = spec.channels[i].triplet;
        p += alpha[i] / t.s * t.r;
        k += alpha[i] / t.s * (t.k - t.r);
    }
    return p / (p + k + 1.0);
}

struct StationaryContext {
    const ModelSpec& spec;
    std::vector<double> b;            // per-channel velocity targets
    std::vector<std::size_t> active;  // indices with b > 0
    double B;

    // unknowns u = (x0, sigma, kappa_active...)
    std::vector<double> residual(const std::vector<double>& u) const {
        const double x0 = u[0], sigma = u[1];
        std::vector<double> r(2 + active.size(), 0.0);
        double fx = spec.mu0 * (1.0 - x0) * std::exp(sigma);
        double fs = spec.mu0 * std::expm1(sigma);
        for (int i = 0; i < spec.dimension(); ++i) {
            const auto& [t, mu] = spec.channels[i];
            const ChannelTerms c = channel_terms(t, x0);
            const auto slot = std::find(active.begin(), active.end(), static_cast<std::size_t>(i));
            const double e =
                slot == active.end()
                    ? 0.0
                    : std::exp(t.s * (u[2 + (slot - active.begin())] - sigma));
            fx -= mu * t.s * c.q * e;
            fs -= mu * c.dq * (e - 1.0);
            if (slot != active.end())
                r[2 + (slot - active.begin())] = mu * t.s * c.q * e - b[i];
        }
        r[0] = fx;
        r[1] = fs;
        return r;
    }

    std::vector<std::vector<double>> jacobian(const std::vector<double>& u) const {
        const double x0 = u[0], sigma = u[1];
        const std::size_t n = 2 + active.size();
        std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
        J[0][0] = -spec.mu0 * std::exp(sigma);
        J[0][1] = spec.mu0 * (1.0 - x0) * std::exp(sigma);
        J[1][1] = spec.mu0 * std::exp(sigma);
        for (int i = 0; i < spec.dimension(); ++i) {
            const auto& [t, mu] = spec.channels[i];
            const ChannelTerms c = channel_terms(t, x0);
            const auto slot = std::find(active.begin(), active.end(), static_cast<std::size_t>(i));
            const double e =
                slot == active.end()
                    ? 0.0
                    : std::exp(t.s * (u[2 + (slot - active.begin())] - sigma));
            J[0][0] -= mu * t.s * c.dq * e;
            J[0][1] += mu * t.s * t.s * c.q * e;
            J[1][0] -= mu * c.d2 * (e - 1.0);
            J[1][1] += mu * t.s * c.dq * e;
            if (slot != active.end()) {
                const std::size_t col = 2 + (slot - active.begin());
                J[0][col] = -mu * t.s * t.s * c.q * e;
                J[1][col] = -mu * t.s * c.dq * e;
                J[col][0] = mu * t.s * c.dq * e;
                J[col][1] = -mu * t.s * t.s * c.q * e;
                J[col][col] = mu * t.s * t.s * c.q * e;
            }
        }
        return J;
    }
};

double scaled_norm(const std::vector<double>& r, const StationaryContext& ctx) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        const double scale = j < 2 ? std::max(1.0, ctx.B)
                                   : std::max(1.0, ctx.b[ctx.active[j - 2]]);
        s += (r[j] / scale) * (r[j] / scale);
    }
    return std::sqrt(s);
}

// Gaussian elimination with partial pivoting for the Newton step J d = -r.
std::vector<double> newton_step(std::vector<std::vector<double>> J, std::vector<double> r) {
    const std::size_t n = r.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(J[row][col]) > std::abs(J[piv][col])) piv = row;
        std::swap(J[piv], J[col]);
        std::swap(r[piv], r[col]);
        if (J[col][col] == 0.0) throw NoConvergence("singular stationary Jacobian");
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = J[row][col] / J[col][col];
            for (std::size_t c = col; c < n; ++c) J[row][c] -= f * J[col][c];
            r[row] -= f * r[col];
        }
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double s = r[row];
        for (std::size_t c = row + 1; c < n; ++c) s += J[row][c] * d[c];
        d[row] = -s / J[row][row];
    }
    return d;
}

} // namespace

StationarySolution stationary_solution(const ModelSpec& spec, double B,
                                       const std::optional<std::vector<double>>& split) {
    validate_model(spec);
    if (!(B > 0.0)) throw StateOutOfRange("B must be positive");
    const int d = spec.dimension();

    std::vector<double> alpha;
    if (split) {
        if (static_cast<int>(split->size()) != d)
            throw StateOutOfRange("split needs one fraction per channel");
        double sum = 0.0;
        for (double a : *split) {
            if (a < 0.0) throw StateOutOfRange("split fractions must be nonnegative");
            sum += a;
        }
        if (!(std::abs(sum - 1.0) <= 1e-9)) throw StateOutOfRange("split fractions must sum to 1");
        alpha = *split;
    } else if (d == 1) {
        alpha = {1.0};
    } else {
        alpha = emission_split(spec, B).alpha;
    }

    StationaryContext ctx{spec, std::vector<double>(d, 0.0), {}, B};
    for (int i = 0; i < d; ++i) {
        ctx.b[i] = alpha[i] * B;
        if (ctx.b[i] > 0.0) ctx.active.push_back(i);
    }
    if (ctx.active.empty()) throw StateOutOfRange("at least one channel must carry emissions");

    const FluidEquilibrium fluid = fluid_equilibrium(spec);
    if (B <= fluid.emission_rate)
        std::fprintf(stderr,
                     "lumen: warning: B = %g is at or below the fluid emission rate %g; "
                     "the event is not a large deviation\n",
                     B, fluid.emission_rate);

    // initial guess from the leading-order identities
    double x_init = B <= 1.5 * fluid.emission_rate && fluid.x0 > 1e-6 && fluid.x0 < 1.0 - 1e-6
                        ? fluid.x0
                        : split_share(spec, alpha);
    x_init = std::clamp(x_init, 1e-4, 1.0 - 1e-4);
    std::vector<double> u(2 + ctx.active.size(), 0.0);
    u[0] = x_init;
    u[1] = std::log(B / (spec.mu0 * (1.0 - x_init)));
    for (std::size_t j = 0; j < ctx.active.size(); ++j) {
        const auto& [t, mu] = spec.channels[ctx.active[j]];
        const double qi =
            std::max(q_factor(x_init, t.r) * q_factor(1.0 - x_init, t.k - t.r), 1e-300);
        u[2 + j] = u[1] + std::log(ctx.b[ctx.active[j]] / (t.s * mu * qi)) / t.s;
    }

    const double tol = std::max(1e-10, 1e-14 * B);
    std::vector<double> r = ctx.residual(u);
    for (int iter = 0; iter < 200; ++iter) {
        double worst = 0.0;
        for (double v : r) worst = std::max(worst, std::abs(v));
        if (worst <= tol) break;

        const std::vector<double> delta = newton_step(ctx.jacobian(u), r);
        const double rnorm = scaled_norm(r, ctx);
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 20; ++halving, lambda *= 0.5) {
            std::vector<double> trial = u;
            for (std::size_t c = 0; c < u.size(); ++c) trial[c] += lambda * delta[c];
            if (trial[0] <= 1e-9 || trial[0] >= 1.0 - 1e-9) continue;
            const std::vector<double> rt = ctx.residual(trial);
            if (scaled_norm(rt, ctx) < rnorm * (1.0 - 1e-4 * lambda)) {
                u = std::move(trial);
                r = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw NoConvergence("stationary Newton stalled");
    }

    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    if (worst > tol) throw NoConvergence("stationary residual " + std::to_string(worst));
    if (!(u[0] > 1e-9 && u[0] < 1.0 - 1e-9))
        throw NonPhysicalRoot("stationary x0 = " + std::to_string(u[0]));

    StationarySolution sol;
    sol.x0 = u[0];
    sol.sigma = u[1];
    sol.kappa = std::vector<double>(d, -kInf);
    sol.velocities = std::vector<double>(d, 0.0);
    for (std::size_t j = 0; j < ctx.active.size(); ++j) {
        sol.kappa[ctx.active[j]] = u[2 + j];
        sol.velocities[ctx.active[j]] = r[2 + j] + ctx.b[ctx.active[j]];
    }
    sol.B = B;
    if (d >= 2) sol.alpha = alpha;
    sol.residual = worst;
    return sol;
}

double stationary_rate(const ModelSpec& spec, const StationarySolution& sol) {
    PhasePoint p;
    p.x0 = sol.x0;
    p.x = std::vector<double>(spec.channels.size(), 0.0);
    p.sigma = sol.sigma;
    p.kappa = sol.kappa;
    double value = -hamiltonian(spec, p);
    for (std::size_t i = 0; i < sol.velocities.size(); ++i)
        if (sol.velocities[i] > 0.0) value += sol.kappa[i] * sol.velocities[i];
    return value;
}

namespace {

double split_objective(const ModelSpec& spec, double B, const std::vector<double>& alpha) {
    try {
        return stationary_rate(spec, stationary_solution(spec, B, alpha));
    } catch (const Error&) {
        return kInf;
    }
}

// one-dimensional search over the fraction of mass on channel i within a pair
double golden_section(const ModelSpec& spec, double B, std::vector<double> alpha, std::size_t i,
                      std::size_t j, double mass, double lo, double hi, double* best_value) {
    constexpr double inv_phi = 0.6180339887498949;
    auto eval = [&](double f) {
        alpha[i] = f * mass;
        alpha[j] = (1.0 - f) * mass;
        return split_objective(spec, B, alpha);
    };
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int iter = 0; iter < 80 && b - a > 1e-12 + 1e-8 * std::abs(a + b); ++iter) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    const double f = fc < fd ? c : d;
    if (best_value) *best_value = std::min(fc, fd);
    return f;
}

// candidate fractions: boundaries plus a symmetric log-spaced interior grid
// (finite-B minimizers hug a boundary, at distance of order a power of 1/B)
std::vector<double> candidate_fractions() {
    std::vector<double> f{0.0, 0.5, 1.0};
    for (int e = 0; e <= 14; ++e) {
        const double a = std::pow(10.0, -7.0 + 6.5 * e / 14.0);
        f.push_back(a);
        f.push_back(1.0 - a);
    }
    std::sort(f.begin(), f.end());
    return f;
}

double optimize_pair(const ModelSpec& spec, double B, std::vector<double>& alpha, std::size_t i,
                     std::size_t j, double* value_out) {
    const double mass = alpha[i] + alpha[j];
    if (mass <= 0.0) {
        *value_out = split_objective(spec, B, alpha);
        return alpha[i];
    }
    const std::vector<double> fractions = candidate_fractions();
    std::size_t best = 0;
    double best_value = kInf;
    std::vector<double> trial = alpha;
    for (std::size_t c = 0; c < fractions.size(); ++c) {
        trial[i] = fractions[c] * mass;
        trial[j] = (1.0 - fractions[c]) * mass;
        const double v = split_objective(spec, B, trial);
        if (v < best_value) { best_value = v; best = c; }
    }
    if (std::isinf(best_value)) throw NoConvergence("no feasible split found");

    const double lo = fractions[best == 0 ? 0 : best - 1];
    const double hi = fractions[std::min(best + 1, fractions.size() - 1)];
    double refined_value = best_value;
    const double f = golden_section(spec, B, alpha, i, j, mass, lo, hi, &refined_value);
    if (refined_value <= best_value) {
        alpha[i] = f * mass;
        alpha[j] = (1.0 - f) * mass;
        *value_out = refined_value;
    } else {
        alpha[i] = fractions[best] * mass;
        alpha[j] = (1.0 - fractions[best]) * mass;
        *value_out = best_value;
    }
    return alpha[i];
}

} // namespace

EmissionSplit emission_split(const ModelSpec& spec, double B) {
    validate_model(spec);
    const int d = spec.dimension();
    if (d < 2) throw StateOutOfRange("emission_split needs d >= 2");
    asymptotic_share(spec); // enforces a unique dominant channel

    EmissionSplit out;
    out.alpha = std::vector<double>(d, 1.0 / d);
    if (d == 2) {
        optimize_pair(spec, B, out.alpha, 0, 1, &out.rate);
        return out;
    }

    // d > 2: cyclic pairwise sweeps; numerical conjecture check only
    double value = split_objective(spec, B, out.alpha);
    for (int sweep = 0; sweep < 4; ++sweep) {
        const double before = value;
        for (std::size_t i = 0; i < out.alpha.size(); ++i)
            for (std::size_t j = i + 1; j < out.alpha.size(); ++j)
                optimize_pair(spec, B, out.alpha, i, j, &value);
        if (before - value <= 1e-9 * (1.0 + std::abs(value))) break;
    }
    out.rate = value;
    return out;
}

ShareConvergence share_convergence(const ModelSpec& spec, const std::vector<double>& b_list) {
    validate_model(spec);
    const AsymptoticShare share = asymptotic_share(spec);

    ShareConvergence out;
    out.x_hat = share.x_hat;
    out.channel = share.channel;

    for (double B : b_list) {
        const StationarySolution sol = stationary_solution(spec, B);
        out.rows.push_back(
            ShareConvergenceRow{B, sol.x0, std::abs(sol.x0 - share.x_hat), sol.sigma, sol.kappa});
    }

    // least-squares slope of log error against log B over the usable rows
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& row : out.rows) {
        if (row.error <= 1e-14) continue;
        const double lx = std::log(row.B), ly = std::log(row.error);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n >= 2 && sxx * n - sx * sx > 1e-12)
        out.fitted_exponent = (sxy * n - sx * sy) / (sxx * n - sx * sx);

    // the limit should not move under rate changes: sweep a mu0 x mu grid
    if (!b_list.empty()) {
        const double B = *std::max_element(b_list.begin(), b_list.end());
        for (double g0 : {0.1, 1.0, 10.0}) {
            for (double g1 : {0.1, 1.0, 10.0}) {
                ModelSpec scaled = spec;
                scaled.mu0 = g0;
                for (auto& c : scaled.channels) c.mu = g1;
                const StationarySolution sol = stationary_solution(scaled, B);
                out.rate_grid.push_back(RateGridPoint{g0, g1, sol.x0});
                out.max_rate_grid_deviation =
                    std::max(out.max_rate_grid_deviation, std::abs(sol.x0 - share.x_hat));
            }
        }
    }
    return out;
}

} // namespace lumen
