#include "lumen/simulator.hpp"

#include <cmath>
#include <string>

namespace lumen {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SplitMix64 make_stream(std::uint64_t seed) { return SplitMix64{mix64(seed + 0x9E3779B97F4A7C15ULL)}; }

SplitMix64 make_replica_stream(std::uint64_t seed, std::uint64_t replica) {
    return SplitMix64{mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(replica + 1)};
}

PropensityTable::PropensityTable(const ModelSpec& spec, long long N_) {
    N = N_;
    d = spec.dimension();
    values.resize(static_cast<std::size_t>(N + 1) * (d + 1));
    for (long long m = 0; m <= N; ++m) {
        const auto a = propensities(spec, N, m);
        for (int c = 0; c <= d; ++c) {
            double v = a[c];
            // A radiation jump needs m >= s_i; in density mode the polynomial
            // propensity can be positive below that, so mask it to keep the
            // state inside [0, N] (the masked mass is O(1/N) there anyway).
            if (c >= 1 && m < spec.channels[c - 1].triplet.s) v = 0.0;
            values[static_cast<std::size_t>(m) * (d + 1) + c] = v;
        }
    }
}

namespace {

void check_event_budget(const ModelSpec& spec, long long N, double T,
                        const SimulateOptions& options) {
    const double expected = spec.total_rate() * static_cast<double>(N) * T;
    if (expected > options.max_expected_events)
        throw EventBudgetExceeded("expected event count " + std::to_string(expected) +
                                  " exceeds cap " + std::to_string(options.max_expected_events) +
                                  "; reduce N, T or the rates, or raise the cap");
}

// Core SSA loop; the observer is called after every committed jump with the
// new time, the channel index and the state before the jump still available
// through the captured references of the caller.
template <class OnJump>
void run_chain(const ModelSpec& spec, const PropensityTable& table, long long m0, double T,
               SplitMix64 rng, OnJump&& on_jump) {
    const int d = table.d;
    long long m = m0;
    double t = 0.0;
    for (;;) {
        const double* a = table.row(m);
        double total = 0.0;
        for (int c = 0; c <= d; ++c) total += a[c];
        if (total <= 0.0) break; // absorbing state

        t += rng.next_exponential(total);
        if (t > T) break;

        // categorical draw proportional to propensities; rounding in the
        // cumulative sum falls back to the last channel with positive rate
        double u = rng.next_unit() * total;
        int channel = 0;
        for (int c = 0; c <= d; ++c) {
            if (a[c] <= 0.0) continue;
            channel = c;
            u -= a[c];
            if (u < 0.0) break;
        }

        if (channel == 0) {
            m += 1;
        } else {
            m -= spec.channels[channel - 1].triplet.s;
        }
        on_jump(t, channel, m);
    }
}

} // namespace

Trajectory simulate(const ModelSpec& spec, long long N, long long m0, double T,
                    std::uint64_t seed, const SimulateOptions& options) {
    validate_model(spec);
    if (m0 < 0 || m0 > N) throw StateOutOfRange("m0 outside [0, N]");
    if (!(T >= 0.0)) throw StateOutOfRange("T must be nonnegative");
    check_event_budget(spec, N, T, options);

    const int d = spec.dimension();
    const PropensityTable table(spec, N);

    Trajectory traj;
    traj.N = N;
    traj.horizon = T;
    traj.initial = MicroState{m0, std::vector<long long>(d, 0), 0.0};

    std::vector<long long> y(d, 0);
    run_chain(spec, table, m0, T, make_stream(seed), [&](double t, int channel, long long m) {
        if (channel >= 1) y[channel - 1] += spec.channels[channel - 1].triplet.s;
        traj.events.push_back(TrajectoryEvent{t, channel, MicroState{m, y, t}});
    });
    return traj;
}

RunSummary simulate_summary(const ModelSpec& spec, const PropensityTable& table, long long m0,
                            double T, SplitMix64 rng) {
    RunSummary out;
    long long prev_m = m0;
    double prev_t = 0.0;
    double integral_m = 0.0;
    run_chain(spec, table, m0, T, rng, [&](double t, int channel, long long m) {
        integral_m += static_cast<double>(prev_m) * (t - prev_t);
        prev_m = m;
        prev_t = t;
        if (channel >= 1) out.total_emission += spec.channels[channel - 1].triplet.s;
        ++out.events;
    });
    integral_m += static_cast<double>(prev_m) * (T - prev_t);
    out.final_m = prev_m;
    out.time_average_m = T > 0.0 ? integral_m / T : static_cast<double>(m0);
    return out;
}

PositionPath scaled_path(const Trajectory& traj, const std::vector<double>& grid) {
    const double inv_n = 1.0 / static_cast<double>(traj.N);
    const std::size_t d = traj.initial.y.size();

    PositionPath path;
    path.times = grid;
    path.x0.reserve(grid.size());
    path.x.reserve(grid.size());

    std::size_t next_event = 0;
    const MicroState* state = &traj.initial;
    double prev_time = 0.0;
    for (double t : grid) {
        if (t < prev_time) throw GridOutOfRange("grid must be sorted");
        if (t < 0.0 || t > traj.horizon) throw GridOutOfRange("grid time outside [0, T]");
        prev_time = t;
        while (next_event < traj.events.size() && traj.events[next_event].time <= t)
            state = &traj.events[next_event++].state;
        path.x0.push_back(static_cast<double>(state->m) * inv_n);
        std::vector<double> xs(d);
        for (std::size_t i = 0; i < d; ++i) xs[i] = static_cast<double>(state->y[i]) * inv_n;
        path.x.push_back(std::move(xs));
    }
    return path;
}

long long total_emission(const Trajectory& traj) {
    long long total = 0;
    for (long long yi : traj.final_state().y) total += yi;
    return total;
}

} // namespace lumen
