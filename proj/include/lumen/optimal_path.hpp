#pragma once

#include <vector>

#include "lumen/hamiltonian.hpp"

namespace lumen {

/// Boundary data of the optimal-path problem: x0(0) given, x_i(0) = 0,
/// x_i(T) = targets[i], and terminal momentum sigma(T) = sigma_terminal (0 for
/// the free-right-endpoint problem studied here).
struct BoundaryData {
    double x0_init = 0.5;
    std::vector<double> targets;
    double T = 1.0;
    double sigma_terminal = 0.0;
};

struct PhaseTrajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<double> hamiltonian_values;

    std::size_t size() const { return times.size(); }
};

/// Classical fixed-step 4th-order integration of the Hamiltonian field.
/// Throws BlowUp when a coordinate passes 1e12 or x0 leaves [-1e-6, 1+1e-6].
PhaseTrajectory integrate_hamiltonian(const ModelSpec& spec, const PhasePoint& start, double T,
                                      double step);

/// Law-of-large-numbers path: the Hamiltonian flow at zero momenta.
PositionPath fluid_trajectory(const ModelSpec& spec, double x0_init, double T, double step);

/// Long-run fluid state: x0 fixed point and total emission rate there,
/// obtained by integrating the fluid equations to T = 50/mu0.
struct FluidEquilibrium {
    double x0 = 0.0;
    double emission_rate = 0.0;
};
FluidEquilibrium fluid_equilibrium(const ModelSpec& spec);

struct BvpOptions {
    double step = 0.0;        // integrator step; 0 means 1e-3 * T
    int max_iterations = 200; // Newton iterations
    int max_halvings = 20;    // damping halvings per iteration
};

/// Shooting solution of the boundary-value problem in the unknowns
/// (sigma(0), kappa_1..kappa_d). Residuals are the emission targets and the
/// terminal momentum condition. When x0(0) equals the model's asymptotic
/// share the constant solution of the stationary system is returned directly:
/// it is the exact large-emission path, and the terminal transversality layer
/// it omits is both exponentially thin and beyond single shooting (the
/// stationary point is a saddle with rate of order the emission flux).
/// A target of 0 for some channel drops that channel's unknown and pins its
/// momentum at -50/s_i.
PhaseTrajectory solve_bvp(const ModelSpec& spec, const BoundaryData& bd,
                          const BvpOptions& options = {});

/// Positions of a phase trajectory, for rate_functional and CSV export.
PositionPath positions(const PhaseTrajectory& traj);

} // namespace lumen
