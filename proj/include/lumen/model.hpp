#pragma once

#include <string>
#include <vector>

#include "lumen/errors.hpp"

namespace lumen {

/// One radiation channel: a cluster of k particles of which r are excited
/// relaxes s of them, emitting s photons. Legal triplets satisfy k >= r >= s >= 1.
/// The pumping transition (1,0,-1) is implicit in every model and never stored.
struct ReactionTriplet {
    int k = 1;
    int r = 1;
    int s = 1;

    friend bool operator==(const ReactionTriplet&, const ReactionTriplet&) = default;
};

struct Channel {
    ReactionTriplet triplet;
    double mu = 1.0; // channel rate, strictly positive
};

// Two normalizations of the radiation propensities:
//   binomial: mu_i / N^(k_i-1) * C(m, r_i) * C(N-m, k_i-r_i)   (exact counting)
//   density:  N * mu_i * Q(m/N, r_i) * Q(1-m/N, k_i-r_i)       (density-dependent form)
// They agree to O(1/N) for m/N bounded away from 0 and 1.
enum class PropensityMode { binomial, density };

/// A reaction system: pumping rate mu0 plus d >= 1 distinct radiation channels.
struct ModelSpec {
    double mu0 = 1.0;
    std::vector<Channel> channels;
    PropensityMode propensity_mode = PropensityMode::density;

    int dimension() const { return static_cast<int>(channels.size()); }
    int max_cluster_size() const;
    double total_rate() const; // mu0 + sum of channel rates
};

/// Checks all model invariants; returns the spec unchanged on success.
/// Throws DuplicateTriplet, TripletOrderViolation or NonPositiveRate.
const ModelSpec& validate_model(const ModelSpec& spec);

/// Transition propensities at excited count m out of N particles.
/// Entry 0 is the pumping propensity mu0*(N-m); entries 1..d are the radiation
/// channels in the mode selected by the spec. Note the mode asymmetry: in
/// binomial mode a channel with m < r_i (or N-m < k_i-r_i) has propensity
/// exactly 0, while the density polynomial is nonzero for all 0 < m < N.
std::vector<double> propensities(const ModelSpec& spec, long long N, long long m);

std::string to_string(PropensityMode mode);
PropensityMode propensity_mode_from_string(const std::string& name);

} // namespace lumen
