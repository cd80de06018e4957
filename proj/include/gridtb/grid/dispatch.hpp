// Copyright 2026 The gridtb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "gridtb/grid/case.hpp"
#include "gridtb/grid/solver.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace gridtb::grid {

struct DispatchUnit
{
	double setpoint = 0.0;
	double droop_gain = 0.0;
	double p_min = 0.0;
	double p_max = 0.0;
};

struct DispatchSolution
{
	double freq_dev = 0.0;            // pu
	std::vector<double> gen_p;        // MW per unit
	std::vector<double> slack_share;  // gen_p - setpoint
};

class DispatchError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Droop dispatch of one island.
///
/// Every unit responds to a common frequency deviation f with
/// P = setpoint - gain * f. Units pushed past a limit are pinned there and f
/// is recomputed over the rest until no unit violates its limits, so the
/// outputs always sum to `load_mw`. Throws DispatchError when the load lies
/// outside [sum p_min, sum p_max].
DispatchSolution droop_dispatch(std::span<const DispatchUnit> units, double load_mw);

/// Per-island droop targets for a whole case.
struct SystemDispatch
{
	std::vector<double> target_mw;     // per generator, 0 for units that are off or de-energized
	std::vector<double> island_freq;   // per island
	std::vector<double> island_load;   // served MW per island
	std::vector<char> island_failed;   // dispatch infeasible: island must be shed
	std::vector<std::string> alerts;
};

SystemDispatch dispatch_system(const GridCase& c, const Statuses& s, std::span<const double> setpoints,
                               const Islands& islands, const std::vector<char>& energized);

} // namespace gridtb::grid
