#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace lumen::testing {

namespace {

struct SparseChain {
    std::size_t states = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> edges; // out-edges with rates
    std::vector<double> exit_rate;

    void add(std::size_t from, std::size_t to, double rate) {
        if (rate <= 0.0) return;
        edges[from].push_back({to, rate});
        exit_rate[from] += rate;
    }

    // p(T) = p0 exp(QT) by uniformization, split into pieces when Lambda*T is large
    std::vector<double> transient(std::vector<double> p, double T) const {
        double lambda = 0.0;
        for (double r : exit_rate) lambda = std::max(lambda, r);
        lambda = lambda * 1.01 + 1e-12;
        const int pieces = std::max(1, static_cast<int>(std::ceil(lambda * T / 600.0)));
        const double tau = T / pieces;

        std::vector<double> next(states);
        for (int piece = 0; piece < pieces; ++piece) {
            std::vector<double> acc(states, 0.0);
            double weight = std::exp(-lambda * tau);
            double cumulative = weight;
            for (std::size_t s = 0; s < states; ++s) acc[s] = weight * p[s];
            for (int k = 1; cumulative < 1.0 - 1e-14 || k < lambda * tau; ++k) {
                // next = p P with P = I + Q/lambda
                for (std::size_t s = 0; s < states; ++s)
                    next[s] = p[s] * (1.0 - exit_rate[s] / lambda);
                for (std::size_t s = 0; s < states; ++s)
                    for (const auto& [to, rate] : edges[s]) next[to] += p[s] * rate / lambda;
                p.swap(next);
                weight *= lambda * tau / k;
                cumulative += weight;
                for (std::size_t s = 0; s < states; ++s) acc[s] += weight * p[s];
                if (k > 20 * lambda * tau + 200) break;
            }
            p = acc;
        }
        return p;
    }
};

// propensities with the simulator's executability rule (no jump below m = s_i)
std::vector<double> jump_rates(const ModelSpec& spec, long long N, long long m) {
    auto a = propensities(spec, N, m);
    for (int i = 1; i <= spec.dimension(); ++i)
        if (m < spec.channels[i - 1].triplet.s) a[i] = 0.0;
    return a;
}

} // namespace

std::vector<double> master_equation_m_distribution(const ModelSpec& spec, long long N,
                                                   long long m0, double T) {
    SparseChain chain;
    chain.states = static_cast<std::size_t>(N + 1);
    chain.edges.resize(chain.states);
    chain.exit_rate.assign(chain.states, 0.0);
    for (long long m = 0; m <= N; ++m) {
        const auto a = jump_rates(spec, N, m);
        if (m < N) chain.add(m, m + 1, a[0]);
        for (int i = 1; i <= spec.dimension(); ++i)
            chain.add(m, m - spec.channels[i - 1].triplet.s, a[i]);
    }
    std::vector<double> p0(chain.states, 0.0);
    p0[m0] = 1.0;
    return chain.transient(std::move(p0), T);
}

double master_equation_tail(const ModelSpec& spec, long long N, long long m0, double T,
                            long long threshold) {
    if (threshold <= 0) return 1.0;
    const long long cap = threshold; // y saturates here; exact for P(y >= threshold)
    const std::size_t rows = static_cast<std::size_t>(N + 1);
    const std::size_t cols = static_cast<std::size_t>(cap + 1);
    auto index = [&](long long m, long long y) {
        return static_cast<std::size_t>(y) * rows + static_cast<std::size_t>(m);
    };

    SparseChain chain;
    chain.states = rows * cols;
    chain.edges.resize(chain.states);
    chain.exit_rate.assign(chain.states, 0.0);
    for (long long y = 0; y <= cap; ++y) {
        for (long long m = 0; m <= N; ++m) {
            const auto a = jump_rates(spec, N, m);
            if (m < N) chain.add(index(m, y), index(m + 1, y), a[0]);
            for (int i = 1; i <= spec.dimension(); ++i) {
                const int s = spec.channels[i - 1].triplet.s;
                if (a[i] > 0.0) chain.add(index(m, y), index(m - s, std::min(y + s, cap)), a[i]);
            }
        }
    }

    std::vector<double> p0(chain.states, 0.0);
    p0[index(m0, 0)] = 1.0;
    const std::vector<double> p = chain.transient(std::move(p0), T);

    double tail = 0.0;
    for (long long m = 0; m <= N; ++m) tail += p[index(m, cap)];
    return tail;
}

double brute_force_lagrangian(const ModelSpec& spec, double x0, const Velocity& vel, double lo,
                              double hi, int levels) {
    const int dims = 1 + spec.dimension();
    std::vector<double> center(dims, 0.5 * (lo + hi));
    double half = 0.5 * (hi - lo);
    constexpr int grid = 10; // 21 nodes per dimension

    auto objective = [&](const std::vector<double>& momenta) {
        PhasePoint p;
        p.x0 = x0;
        p.x = std::vector<double>(spec.channels.size(), 0.0);
        p.sigma = momenta[0];
        p.kappa = std::vector<double>(momenta.begin() + 1, momenta.end());
        double value = momenta[0] * vel.v0 - hamiltonian(spec, p);
        for (std::size_t i = 0; i < vel.v.size(); ++i) value += momenta[1 + i] * vel.v[i];
        return value;
    };

    double best = -1e300;
    for (int level = 0; level < levels; ++level) {
        std::vector<double> best_point = center;
        std::vector<int> idx(dims, -grid);
        for (;;) {
            std::vector<double> point(dims);
            for (int d = 0; d < dims; ++d) point[d] = center[d] + half * idx[d] / grid;
            const double value = objective(point);
            if (value > best) {
                best = value;
                best_point = point;
            }
            int d = 0;
            for (; d < dims; ++d) {
                if (++idx[d] <= grid) break;
                idx[d] = -grid;
            }
            if (d == dims) break;
        }
        center = best_point;
        half = 2.5 * half / grid; // keep a couple of old cells inside the new box
    }
    return best;
}

HamiltonianGradient fd_hamiltonian_gradient(const ModelSpec& spec, const PhasePoint& p, double h) {
    HamiltonianGradient g;
    auto diff = [&](auto&& set) {
        PhasePoint plus = p, minus = p;
        set(plus, h);
        set(minus, -h);
        return (hamiltonian(spec, plus) - hamiltonian(spec, minus)) / (2.0 * h);
    };
    g.d_sigma = diff([](PhasePoint& q, double dh) { q.sigma += dh; });
    g.d_x0 = diff([](PhasePoint& q, double dh) { q.x0 += dh; });
    g.d_kappa.resize(p.kappa.size());
    for (std::size_t i = 0; i < p.kappa.size(); ++i)
        g.d_kappa[i] = diff([i](PhasePoint& q, double dh) { q.kappa[i] += dh; });
    return g;
}

ModelSpec random_spec(SplitMix64& rng, int max_d) {
    ModelSpec spec;
    spec.mu0 = 0.2 + 3.0 * rng.next_unit();
    const int d = 1 + static_cast<int>(rng.next_unit() * max_d) % max_d;
    while (spec.dimension() < d) {
        ReactionTriplet t;
        t.k = 1 + static_cast<int>(rng.next_unit() * 4);
        t.r = 1 + static_cast<int>(rng.next_unit() * t.k);
        t.s = 1 + static_cast<int>(rng.next_unit() * t.r);
        bool duplicate = false;
        for (const auto& c : spec.channels) duplicate = duplicate || c.triplet == t;
        if (duplicate) continue;
        spec.channels.push_back(Channel{t, 0.2 + 3.0 * rng.next_unit()});
    }
    return spec;
}

PhasePoint random_interior_point(SplitMix64& rng, int d) {
    PhasePoint p;
    p.x0 = 0.05 + 0.9 * rng.next_unit();
    p.x = std::vector<double>(d, 0.0);
    for (int i = 0; i < d; ++i) p.x[i] = 2.0 * rng.next_unit();
    p.sigma = -2.0 + 4.0 * rng.next_unit();
    p.kappa = std::vector<double>(d, 0.0);
    for (int i = 0; i < d; ++i) p.kappa[i] = -2.0 + 4.0 * rng.next_unit();
    return p;
}

} // namespace lumen::testing
