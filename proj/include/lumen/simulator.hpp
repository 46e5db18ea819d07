#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lumen/hamiltonian.hpp"
#include "lumen/model.hpp"

namespace lumen {

/// splitmix64: platform-stable generator fully specified by its 64-bit state.
/// Uniform and exponential draws are built from the raw stream so results are
/// bit-identical across standard libraries.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double next_unit() { // uniform in [0, 1), 53 bits
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
    double next_exponential(double rate) { // strictly positive holding times
        return -std::log((static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53) / rate;
    }
};

std::uint64_t mix64(std::uint64_t z);

/// Stream for one simulation run.
SplitMix64 make_stream(std::uint64_t seed);

/// Independent stream for replica r of a batch keyed by seed; replicas may run
/// in parallel and reproduce regardless of execution order.
SplitMix64 make_replica_stream(std::uint64_t seed, std::uint64_t replica);

/// Lumped Markov state: excited count m and cumulative per-channel emissions y.
struct MicroState {
    long long m = 0;
    std::vector<long long> y;
    double t = 0.0;
};

struct TrajectoryEvent {
    double time = 0.0;
    int channel = 0;  // 0 = pumping, 1..d = radiation
    MicroState state; // state right after the jump
};

struct Trajectory {
    long long N = 0;
    double horizon = 0.0;
    MicroState initial;
    std::vector<TrajectoryEvent> events;

    const MicroState& final_state() const { return events.empty() ? initial : events.back().state; }
};

struct SimulateOptions {
    double max_expected_events = 1e8; // refuse runs with mu_total*N*T above this
};

/// Per-state propensities cached for a fixed (spec, N); shared across replicas.
struct PropensityTable {
    long long N = 0;
    int d = 0;
    std::vector<double> values; // (N+1) rows of d+1 entries

    PropensityTable() = default;
    PropensityTable(const ModelSpec& spec, long long N);
    const double* row(long long m) const { return values.data() + m * (d + 1); }
};

/// Statistically exact sample path of the jump process on [0, T] by the direct
/// stochastic simulation algorithm. Deterministic given (spec, N, m0, T, seed).
Trajectory simulate(const ModelSpec& spec, long long N, long long m0, double T,
                    std::uint64_t seed, const SimulateOptions& options = {});

/// Streaming counterpart of simulate(): same jump chain and random draws,
/// but only summary statistics are kept.
struct RunSummary {
    long long final_m = 0;
    long long total_emission = 0;
    double time_average_m = 0.0; // exact average of m(t) over [0, T]
    long long events = 0;
};

RunSummary simulate_summary(const ModelSpec& spec, const PropensityTable& table, long long m0,
                            double T, SplitMix64 rng);

/// Scaled process (m/N, y_i/N) evaluated on a sorted grid of times in [0, T];
/// right-continuous piecewise-constant interpolation.
PositionPath scaled_path(const Trajectory& traj, const std::vector<double>& grid);

/// Total photons emitted over the trajectory: sum of the final y entries.
long long total_emission(const Trajectory& traj);

} // namespace lumen
