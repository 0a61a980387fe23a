#pragma once

#include "inclusive/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace inclusive {

// Line-oriented trajectory records:
//
//   # free-form comment lines start with '#'
//   trajectory <T> <d> <x_0,0> <x_0,1> ... <x_T,d-1>
//
// T is the horizon (T+1 states), d the state dimension, followed by the
// (T+1)*d coordinates in row-major order. Values are written in shortest
// round-trip form, so reading back reproduces every double bit-exactly.

std::string format_double(double v);

void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);

/// Reads every record; throws std::runtime_error naming the line on malformed input.
std::vector<Trajectory> read_trajectories(std::istream& in);

void save_demonstrations(const std::string& path, const DemonstrationSet& demos);
DemonstrationSet load_demonstrations(const std::string& path);

}  // namespace inclusive
