#pragma once

#include <optional>
#include <vector>

#include "lumen/model.hpp"

namespace lumen {

/// Limiting excited share r_i0/(k_i0 + s_i0) where i0 is the channel with the
/// largest photon yield s. Channel indices are 1-based (0 is pumping).
struct AsymptoticShare {
    double x_hat = 0.0;
    int channel = 1;
};
AsymptoticShare asymptotic_share(const ModelSpec& spec);

/// Constant-in-time solution of the stationary system: emission velocities
/// pinned at B_i, dx0/dt = 0 and dsigma/dt = 0, solved by damped Newton in
/// (x0, sigma, kappa). Channels with B_i = 0 carry kappa_i = -infinity.
struct StationarySolution {
    double x0 = 0.0;
    double sigma = 0.0;
    std::vector<double> kappa;
    std::vector<double> velocities;
    double B = 0.0;
    std::optional<std::vector<double>> alpha; // split fractions when d >= 2
    double residual = 0.0;
};

StationarySolution stationary_solution(const ModelSpec& spec, double B,
                                       const std::optional<std::vector<double>>& split = {});

/// Rate of the constant-velocity path per unit time: sum_i kappa_i B_i - H,
/// the single-point Legendre value (channels with B_i = 0 contribute through
/// H only).
double stationary_rate(const ModelSpec& spec, const StationarySolution& sol);

/// Minimizer of the stationary rate over the split of the total emission B
/// among the channels. For d = 2 a scan plus golden-section search over the
/// weight of channel 1; boundary splits are evaluated through the reduced
/// stationary system. Outputs for d > 2 are numerical only (coordinate
/// sweeps); the argmax-s concentration there is conjecture-checked, not proved.
struct EmissionSplit {
    std::vector<double> alpha;
    double rate = 0.0;
};
EmissionSplit emission_split(const ModelSpec& spec, double B);

struct ShareConvergenceRow {
    double B = 0.0;
    double x0 = 0.0;
    double error = 0.0; // |x0(B) - x_hat|
    double sigma = 0.0;
    std::vector<double> kappa;
};

struct RateGridPoint {
    double mu0 = 0.0;
    double mu_scale = 0.0; // common factor applied to all channel rates
    double x0 = 0.0;
};

struct ShareConvergence {
    double x_hat = 0.0;
    int channel = 1;
    std::vector<ShareConvergenceRow> rows;
    std::optional<double> fitted_exponent;   // least-squares slope of log error vs log B
    std::vector<RateGridPoint> rate_grid;    // x0 at max(B) across a mu0 x mu grid
    double max_rate_grid_deviation = 0.0;    // max |x0 - x_hat| over the grid
};

/// Finite-B convergence study of x0(B) toward the asymptotic share, plus a
/// rate-grid sweep demonstrating that the limit does not depend on the rates.
ShareConvergence share_convergence(const ModelSpec& spec, const std::vector<double>& b_list);

} // namespace lumen
