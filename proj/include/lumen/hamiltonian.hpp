#pragma once

#include <vector>

#include "lumen/model.hpp"

namespace lumen {

/// Q(z, q) = z^q / q! for z in [0, 1] and q >= 0; zero elsewhere (including q < 0).
double q_factor(double z, int q);

/// Point in the extended phase space: positions (x0, x_1..x_d) and conjugate
/// momenta (sigma, kappa_1..kappa_d). H does not depend on the x_i, so the
/// kappa_i are constants of motion.
struct PhasePoint {
    double x0 = 0.0;
    std::vector<double> x;
    double sigma = 0.0;
    std::vector<double> kappa;
};

struct Velocity {
    double v0 = 0.0;        // dx0/dt, any sign
    std::vector<double> v;  // dx_i/dt, nonnegative (emissions are non-decreasing)
};

struct PhaseField {
    double dx0 = 0.0;
    std::vector<double> dx;
    double dsigma = 0.0;
    std::vector<double> dkappa; // identically zero
};

/// H = mu0 (1-x0)(e^sigma - 1) + sum_i mu_i Q(x0,r_i) Q(1-x0,k_i-r_i) (e^{s_i(kappa_i - sigma)} - 1).
double hamiltonian(const ModelSpec& spec, const PhasePoint& p);

/// Canonical vector field: dx0 = dH/dsigma, dx_i = dH/dkappa_i, dsigma = -dH/dx0, dkappa = 0.
PhaseField hamiltonian_field(const ModelSpec& spec, const PhasePoint& p);

/// Legendre-Fenchel transform of H in the momenta at fixed x0.
/// value is +infinity for an infeasible velocity (emission through a channel
/// whose propensity factor vanishes, or total inflow v0 + sum v_i < 0);
/// kappa entries are -infinity when the corresponding v_i is 0 (the supremum
/// is attained only in the limit, contributing +mu_i Q_i to the value).
struct LagrangeResult {
    double value = 0.0;
    double sigma = 0.0;
    std::vector<double> kappa;
};

LagrangeResult lagrangian(const ModelSpec& spec, double x0, const Velocity& vel);

/// Positions-only sampled path on an increasing time grid. x[j] holds the
/// per-channel cumulative emissions at times[j].
struct PositionPath {
    std::vector<double> times;
    std::vector<double> x0;
    std::vector<std::vector<double>> x;

    std::size_t size() const { return times.size(); }
};

/// Trapezoidal quadrature of the Lagrangian along a sampled path, with
/// velocities estimated by centered finite differences (one-sided at the
/// endpoints). Returns +infinity when some segment is infeasible.
double rate_functional(const ModelSpec& spec, const PositionPath& path);

} // namespace lumen
