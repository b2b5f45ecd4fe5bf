#pragma once

#include <string>
#include <vector>

#include "ntklab/trainer.hpp"

namespace ntklab {

// Shortest round-trippable decimal form of a double ("%.17g" fallback-free);
// used everywhere a float hits a CSV so replays are byte-identical.
std::string format_double(double v);

// The trajectory CSV schema. Column order is part of the CLI contract.
inline constexpr const char* kTrajectoryHeader =
    "iter,loss,v_perp,v_par,dist_minnorm_sq,dist_init_sq,max_unit_drift,"
    "sign_flips,wall_ms";

std::string trajectory_csv(const Trajectory& traj);

// Generic numeric table -> CSV text.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// Least-squares slope of log(y) against log(x); pairs with nonpositive
// entries are rejected.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ntklab
