#include "lumen/model.hpp"

#include <algorithm>
#include <cmath>

#include "lumen/hamiltonian.hpp"

namespace lumen {

int ModelSpec::max_cluster_size() const {
    int k = 0;
    for (const auto& c : channels) k = std::max(k, c.triplet.k);
    return k;
}

double ModelSpec::total_rate() const {
    double total = mu0;
    for (const auto& c : channels) total += c.mu;
    return total;
}

const ModelSpec& validate_model(const ModelSpec& spec) {
    if (!(spec.mu0 > 0.0) || !std::isfinite(spec.mu0))
        throw NonPositiveRate("mu0 must be strictly positive and finite");
    if (spec.channels.empty())
        throw TripletOrderViolation("model needs at least one radiation channel");

    for (std::size_t i = 0; i < spec.channels.size(); ++i) {
        const auto& [t, mu] = spec.channels[i];
        if (!(t.k >= t.r && t.r >= t.s && t.s >= 1))
            throw TripletOrderViolation("channel " + std::to_string(i + 1) + ": (" +
                                        std::to_string(t.k) + "," + std::to_string(t.r) + "," +
                                        std::to_string(t.s) + ") violates k >= r >= s >= 1");
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw NonPositiveRate("channel " + std::to_string(i + 1) +
                                  ": rate must be strictly positive and finite");
        for (std::size_t j = 0; j < i; ++j)
            if (spec.channels[j].triplet == t)
                throw DuplicateTriplet("channels " + std::to_string(j + 1) + " and " +
                                       std::to_string(i + 1) + " carry the same triplet");
    }
    return spec;
}

namespace {

// Binomial-mode propensity written as N * mu * prod (m-j)/N / r! * prod (N-m-j)/N / (k-r)!,
// which equals mu/N^(k-1) * C(m,r) * C(N-m,k-r) without overflow for large N.
double binomial_propensity(double mu, const ReactionTriplet& t, long long N, long long m) {
    if (m < t.r || N - m < t.k - t.r) return 0.0;
    double value = static_cast<double>(N) * mu;
    for (int j = 0; j < t.r; ++j) value *= static_cast<double>(m - j) / static_cast<double>(N);
    for (int j = 2; j <= t.r; ++j) value /= j;
    for (int j = 0; j < t.k - t.r; ++j)
        value *= static_cast<double>(N - m - j) / static_cast<double>(N);
    for (int j = 2; j <= t.k - t.r; ++j) value /= j;
    return value;
}

double density_propensity(double mu, const ReactionTriplet& t, long long N, long long m) {
    const double x = static_cast<double>(m) / static_cast<double>(N);
    return static_cast<double>(N) * mu * q_factor(x, t.r) * q_factor(1.0 - x, t.k - t.r);
}

} // namespace

std::vector<double> propensities(const ModelSpec& spec, long long N, long long m) {
    if (N <= 0) throw StateOutOfRange("N must be positive");
    if (m < 0 || m > N)
        throw StateOutOfRange("m = " + std::to_string(m) + " outside [0, " + std::to_string(N) + "]");
    if (spec.propensity_mode == PropensityMode::binomial && N < spec.max_cluster_size())
        throw StateOutOfRange("binomial mode requires N >= max cluster size " +
                              std::to_string(spec.max_cluster_size()));

    std::vector<double> a(spec.channels.size() + 1);
    a[0] = spec.mu0 * static_cast<double>(N - m);
    for (std::size_t i = 0; i < spec.channels.size(); ++i) {
        const auto& [t, mu] = spec.channels[i];
        a[i + 1] = spec.propensity_mode == PropensityMode::binomial
                       ? binomial_propensity(mu, t, N, m)
                       : density_propensity(mu, t, N, m);
    }
    return a;
}

std::string to_string(PropensityMode mode) {
    return mode == PropensityMode::binomial ? "binomial" : "density";
}

PropensityMode propensity_mode_from_string(const std::string& name) {
    if (name == "binomial") return PropensityMode::binomial;
    if (name == "density") return PropensityMode::density;
    throw ParseError("unknown propensity_mode \"" + name + "\" (expected binomial or density)");
}

} // namespace lumen
