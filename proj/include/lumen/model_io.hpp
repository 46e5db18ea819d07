#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "lumen/hamiltonian.hpp"
#include "lumen/model.hpp"
#include "lumen/optimal_path.hpp"
#include "lumen/simulator.hpp"

namespace lumen {

/// Model document format:
///   { "mu0": 1.0,
///     "channels": [ { "k": 1, "r": 1, "s": 1, "mu": 1.0 }, ... ],
///     "propensity_mode": "density" | "binomial" }
/// propensity_mode defaults to density. Parse errors name the failing field.
ModelSpec model_from_json(const nlohmann::json& doc);
ModelSpec load_model(const std::string& path);
nlohmann::json model_to_json(const ModelSpec& spec);

/// CSV writers. Every file starts with a '# config: {...}' metadata line when
/// a config object is supplied, followed by the exact column header.

// columns: time,channel,m,y_1..y_d ; the initial state is row one with channel -1
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const nlohmann::json& config = {});

// columns: t,x0,x_1..x_d
void write_position_csv(std::ostream& os, const PositionPath& path,
                        const nlohmann::json& config = {});

// columns: t,x0,x_1..x_d,sigma,kappa_1..kappa_d,H
void write_phase_csv(std::ostream& os, const PhaseTrajectory& traj,
                     const nlohmann::json& config = {});

} // namespace lumen
