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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridtb::grid {

/// Live electrical state. Per-bus vectors follow case.buses, per-branch
/// vectors case.branches, per-generator vectors case.generators.
struct GridState
{
	double time_s = 0.0;
	std::uint64_t tick = 0;
	Statuses status;

	std::vector<double> gen_setpoint; // MW, commanded
	std::vector<double> gen_vset;     // pu
	std::vector<double> gen_governor; // MW, first-order ramp state chasing gen_target
	std::vector<double> gen_target;   // MW, droop-settled output for the current setpoints
	std::vector<double> gen_p;        // MW, governor plus instantaneous share of any mismatch
	std::vector<double> gen_q;        // MVAR

	std::vector<double> theta;
	std::vector<double> vm;
	std::vector<char> energized;
	std::vector<int> island;

	std::vector<double> branch_p; // MW at from-end
	std::vector<double> branch_q; // MVAR at from-end

	double freq_dev = 0.0; // pu, island carrying the most load
	std::vector<double> island_freq;
	std::vector<std::string> alerts; // from the latest solve

	double load_mw(const GridCase& c, std::size_t bus) const;
	double load_mvar(const GridCase& c, std::size_t bus) const;
	double shunt_mvar(const GridCase& c, std::size_t bus) const;
};

class UnknownDevice : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class SetpointRejected : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

enum class SetpointKind
{
	MW,  // MWSETPOINT
	VPU, // VPUSETPOINT
};

struct SetpointOutcome
{
	double applied = 0.0;
	bool clamped = false;
};

/// Solved state at t = 0 with every generator at its case dispatch.
GridState initial_state(const GridCase& c);

/// Advances by `dt` seconds: ramps every governor toward its droop target by
/// the exact first-order factor 1 - exp(-dt / tau), then re-solves flows.
void step(const GridCase& c, GridState& s, double dt);

/// Re-solves flows without moving governors or time.
void resolve(const GridCase& c, GridState& s);

void apply_breaker(const GridCase& c, GridState& s, std::string_view branch_id, bool closed);
void apply_gen_status(const GridCase& c, GridState& s, std::string_view gen_id, bool on);
void apply_load_status(const GridCase& c, GridState& s, std::string_view load_key, bool on);
void apply_shunt_status(const GridCase& c, GridState& s, std::string_view shunt_key, bool on);

/// MW setpoints are clamped to [p_min, p_max] (reported via `clamped`);
/// VPU setpoints must be positive. Setpoints to an offline generator are
/// rejected.
SetpointOutcome apply_setpoint(const GridCase& c, GridState& s, std::string_view gen_id, SetpointKind kind, double value);

} // namespace gridtb::grid
