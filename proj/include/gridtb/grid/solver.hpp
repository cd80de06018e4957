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

#include <span>
#include <string>
#include <vector>

namespace gridtb::grid {

/// Open/closed and on/off flags for every switchable device, indexed like the
/// case's device lists (loads and shunts by bus index).
struct Statuses
{
	std::vector<char> branch_closed;
	std::vector<char> gen_on;
	std::vector<char> load_on;
	std::vector<char> shunt_on;

	static Statuses from_case(const GridCase& c);
	bool operator==(const Statuses&) const = default;
};

/// Connected components over closed branches; -1 never appears (isolated buses
/// form their own island).
struct Islands
{
	std::vector<int> bus_island;
	int count = 0;
};

Islands find_islands(const GridCase& c, const Statuses& s);

struct DcResult
{
	std::vector<double> theta;       // rad, per bus
	std::vector<double> branch_p_mw; // from-end, per branch
	std::vector<char> energized;     // per bus
	Islands islands;
	std::vector<std::string> alerts;
};

/// DC power flow. An island is energized when it holds at least one online
/// generator; its lowest-index generator bus is the angle reference. Islands
/// without generation, or whose reduced susceptance matrix is singular, are
/// reported de-energized with zero angles and flows.
DcResult solve_dc(const GridCase& c, const Statuses& s, std::span<const double> gen_p_mw);

struct QvResult
{
	std::vector<double> vm;            // pu per bus, 0 when de-energized
	std::vector<double> branch_q_mvar; // from-end, per branch
	std::vector<double> gen_q_mvar;    // per generator
};

/// Linear Q-V solve. Buses with an online generator hold that generator's
/// voltage setpoint; remaining energized buses solve the reduced Laplacian
/// with the generator buses as boundary.
QvResult solve_qv(const GridCase& c, const Statuses& s, std::span<const double> vset, const std::vector<char>& energized);

/// Net MW injected at each bus (generation minus served load), for balance checks.
std::vector<double> bus_injection_mw(const GridCase& c, const Statuses& s, std::span<const double> gen_p_mw,
                                     const std::vector<char>& energized);

} // namespace gridtb::grid
