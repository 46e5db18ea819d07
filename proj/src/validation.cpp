#include "lumen/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lumen/hamiltonian.hpp"
#include "lumen/large_emission.hpp"
#include "lumen/simulator.hpp"

namespace lumen {

namespace {

long long hit_threshold(double B, long long N) {
    const double target = B * static_cast<double>(N);
    // weak inequality with a one-ulp-scale slack so 1.2 * 20 still counts 24
    return static_cast<long long>(std::ceil(target - 1e-9 * std::max(1.0, target)));
}

struct ChunkStats {
    long long n = 0;
    long long hits = 0;
    double share_sum_all = 0.0;
    double share_sum_hits = 0.0;
};

// Runs replicas [0, replicas) over fixed-size chunks; chunk results are merged
// in chunk order, so totals are independent of the thread count.
ChunkStats run_replicas(const ModelSpec& spec, long long N, long long m0, double T,
                        long long threshold, long long replicas, std::uint64_t seed,
                        const McOptions& options) {
    validate_model(spec);
    if (replicas < 1) throw StateOutOfRange("replicas must be >= 1");
    if (m0 < 0 || m0 > N) throw StateOutOfRange("m0 outside [0, N]");
    const double expected = spec.total_rate() * static_cast<double>(N) * T;
    if (expected > options.max_expected_events)
        throw EventBudgetExceeded("expected event count per replica exceeds the cap");

    const PropensityTable table(spec, N);
    constexpr long long chunk_size = 8192;
    const long long chunks = (replicas + chunk_size - 1) / chunk_size;
    std::vector<ChunkStats> partial(chunks);

    auto run_chunk = [&](long long chunk) {
        ChunkStats stats;
        const long long lo = chunk * chunk_size;
        const long long hi = std::min(replicas, lo + chunk_size);
        for (long long r = lo; r < hi; ++r) {
            const RunSummary run =
                simulate_summary(spec, table, m0, T, make_replica_stream(seed, r));
            const double share = run.time_average_m / static_cast<double>(N);
            ++stats.n;
            stats.share_sum_all += share;
            if (run.total_emission >= threshold) {
                ++stats.hits;
                stats.share_sum_hits += share;
            }
        }
        partial[chunk] = stats;
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        for (long long chunk = 0; chunk < chunks; ++chunk) run_chunk(chunk);
    } else {
        std::atomic<long long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (long long chunk = next.fetch_add(1); chunk < chunks;
                     chunk = next.fetch_add(1))
                    run_chunk(chunk);
            });
        for (auto& t : pool) t.join();
    }

    ChunkStats total;
    for (const ChunkStats& s : partial) {
        total.n += s.n;
        total.hits += s.hits;
        total.share_sum_all += s.share_sum_all;
        total.share_sum_hits += s.share_sum_hits;
    }
    return total;
}

} // namespace

TailEstimate estimate_tail(const ModelSpec& spec, long long N, long long m0, double T, double B,
                           long long replicas, std::uint64_t seed, const McOptions& options) {
    const ChunkStats stats =
        run_replicas(spec, N, m0, T, hit_threshold(B, N), replicas, seed, options);

    TailEstimate est;
    est.N = N;
    est.B = B;
    est.T = T;
    est.replicas = replicas;
    est.hits = stats.hits;
    est.p_hat = static_cast<double>(stats.hits) / static_cast<double>(replicas);
    est.seed = seed;

    const double z = 1.959963984540054; // 95% normal quantile
    const double n = static_cast<double>(replicas);
    const double p = est.p_hat;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    // the interval must contain p_hat; pin the ends at the boundary counts
    est.ci_low = stats.hits == 0 ? 0.0 : std::max(0.0, center - half);
    est.ci_high = stats.hits == replicas ? 1.0 : std::min(1.0, center + half);
    return est;
}

double variational_rate(const ModelSpec& spec, double B, double T) {
    const double rate_b = B / T; // emission velocity of the constant path
    std::optional<std::vector<double>> split;
    if (spec.dimension() >= 2) split = emission_split(spec, rate_b).alpha;
    const StationarySolution sol = stationary_solution(spec, rate_b, split);

    // constant-velocity path sampled on a uniform grid
    PositionPath path;
    const int n = 1000;
    path.times.resize(n + 1);
    path.x0.resize(n + 1);
    path.x.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double t = T * j / n;
        path.times[j] = t;
        path.x0[j] = sol.x0;
        path.x[j].resize(spec.channels.size());
        for (std::size_t i = 0; i < sol.velocities.size(); ++i)
            path.x[j][i] = sol.velocities[i] * t;
    }
    return rate_functional(spec, path);
}

LdpSlopeResult ldp_slope(const ModelSpec& spec, const std::vector<long long>& n_list,
                         double m0_fraction, double T, double B, long long replicas,
                         std::uint64_t seed, const McOptions& options) {
    if (n_list.empty()) throw StateOutOfRange("n_list must not be empty");
    if (m0_fraction < 0.0 || m0_fraction > 1.0)
        throw StateOutOfRange("m0_fraction outside [0, 1]");

    LdpSlopeResult out;
    out.variational_rate = variational_rate(spec, B, T);

    bool any_hit = false;
    for (long long N : n_list) {
        LdpSlopeRow row;
        row.N = N;
        const long long m0 = std::llround(m0_fraction * static_cast<double>(N));
        row.estimate = estimate_tail(spec, N, m0, T, B, replicas, seed, options);
        row.censored = row.estimate.hits == 0;
        if (!row.censored) {
            any_hit = true;
            row.empirical_rate = -std::log(row.estimate.p_hat) / static_cast<double>(N);
            row.relative_gap =
                std::abs(row.empirical_rate - out.variational_rate) / out.variational_rate;
        }
        out.rows.push_back(std::move(row));
    }
    if (!any_hit) throw AllCensored("no replica hit the emission target at any N");
    return out;
}

ConditionedShare conditioned_share(const ModelSpec& spec, long long N, long long m0, double T,
                                   double B, long long replicas, std::uint64_t seed,
                                   const McOptions& options) {
    const ChunkStats stats =
        run_replicas(spec, N, m0, T, hit_threshold(B, N), replicas, seed, options);
    if (stats.hits < 30)
        throw InsufficientHits("only " + std::to_string(stats.hits) +
                               " of " + std::to_string(replicas) +
                               " replicas hit the target; need at least 30");
    return ConditionedShare{stats.share_sum_hits / static_cast<double>(stats.hits), stats.hits};
}

} // namespace lumen
