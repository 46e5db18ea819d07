#pragma once

#include <cstdint>
#include <vector>

#include "lumen/model.hpp"

namespace lumen {

/// Monte Carlo estimate of Pr(total emission >= B*N) on [0, T] with a Wilson
/// 95% interval. Bit-for-bit reproducible from (spec, N, m0, T, B, replicas, seed).
struct TailEstimate {
    long long N = 0;
    double B = 0.0;
    double T = 0.0;
    long long replicas = 0;
    long long hits = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t seed = 0;
};

struct McOptions {
    int threads = 1;                  // replica batches run on fixed chunks, so
                                      // results do not depend on the thread count
    double max_expected_events = 1e8; // per-replica event budget guard
};

TailEstimate estimate_tail(const ModelSpec& spec, long long N, long long m0, double T, double B,
                           long long replicas, std::uint64_t seed, const McOptions& options = {});

/// Empirical LDP rates -ln(p_hat)/N for a list of N, against the variational
/// value of the constant-velocity optimal path (split + stationary solution +
/// rate functional). Rows with zero hits are censored.
struct LdpSlopeRow {
    long long N = 0;
    TailEstimate estimate;
    bool censored = true;
    double empirical_rate = 0.0;
    double relative_gap = 0.0; // |rate - I*| / I*
};

struct LdpSlopeResult {
    std::vector<LdpSlopeRow> rows;
    double variational_rate = 0.0;
};

LdpSlopeResult ldp_slope(const ModelSpec& spec, const std::vector<long long>& n_list,
                         double m0_fraction, double T, double B, long long replicas,
                         std::uint64_t seed, const McOptions& options = {});

/// Variational rate inf{ I : sum_i x_i(T) >= B } of the constant-velocity
/// ansatz, used as the reference for ldp_slope.
double variational_rate(const ModelSpec& spec, double B, double T);

/// Mean over hit trajectories of the exact time average of m(t)/N.
struct ConditionedShare {
    double mean_share = 0.0;
    long long hits = 0;
};

ConditionedShare conditioned_share(const ModelSpec& spec, long long N, long long m0, double T,
                                   double B, long long replicas, std::uint64_t seed,
                                   const McOptions& options = {});

} // namespace lumen
