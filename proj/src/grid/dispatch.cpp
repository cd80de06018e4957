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

#include "gridtb/grid/dispatch.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace gridtb::grid {

DispatchSolution droop_dispatch(std::span<const DispatchUnit> units, double load_mw)
{
	DispatchSolution sol;
	const auto n = units.size();
	if (n == 0)
		throw DispatchError("no units to dispatch");

	double cap_max = 0.0;
	double cap_min = 0.0;
	for (const auto& u : units) {
		cap_max += u.p_max;
		cap_min += u.p_min;
	}
	const double tol = 1e-9 * std::max(1.0, std::abs(load_mw));
	if (load_mw > cap_max + tol)
		throw DispatchError(fmt::format("load {:.3f} MW exceeds capacity {:.3f} MW", load_mw, cap_max));
	if (load_mw < cap_min - tol)
		throw DispatchError(fmt::format("load {:.3f} MW is below minimum generation {:.3f} MW", load_mw, cap_min));

	sol.gen_p.assign(n, 0.0);
	std::vector<char> pinned(n, 0);
	double f = 0.0;
	for (std::size_t iter = 0; iter <= n; ++iter) {
		double free_sp = 0.0;
		double free_gain = 0.0;
		double pinned_p = 0.0;
		for (std::size_t i = 0; i < n; ++i) {
			if (pinned[i]) {
				pinned_p += sol.gen_p[i];
			} else {
				free_sp += units[i].setpoint;
				free_gain += units[i].droop_gain;
			}
		}
		if (free_gain <= 0.0)
			break; // everything pinned: capacity check above guarantees balance
		f = (free_sp - (load_mw - pinned_p)) / free_gain;

		bool violated = false;
		for (std::size_t i = 0; i < n; ++i) {
			if (pinned[i])
				continue;
			const double p = units[i].setpoint - units[i].droop_gain * f;
			if (p > units[i].p_max) {
				sol.gen_p[i] = units[i].p_max;
				pinned[i] = 1;
				violated = true;
			} else if (p < units[i].p_min) {
				sol.gen_p[i] = units[i].p_min;
				pinned[i] = 1;
				violated = true;
			}
		}
		if (violated)
			continue;
		for (std::size_t i = 0; i < n; ++i)
			if (!pinned[i])
				sol.gen_p[i] = units[i].setpoint - units[i].droop_gain * f;
		break;
	}

	sol.freq_dev = f;
	sol.slack_share.resize(n);
	for (std::size_t i = 0; i < n; ++i)
		sol.slack_share[i] = sol.gen_p[i] - units[i].setpoint;
	return sol;
}

SystemDispatch dispatch_system(const GridCase& c, const Statuses& s, std::span<const double> setpoints,
                               const Islands& islands, const std::vector<char>& energized)
{
	const auto k = static_cast<std::size_t>(islands.count);
	SystemDispatch out;
	out.target_mw.assign(c.generators.size(), 0.0);
	out.island_freq.assign(k, 0.0);
	out.island_load.assign(k, 0.0);
	out.island_failed.assign(k, 0);

	for (std::size_t b = 0; b < c.buses.size(); ++b)
		if (energized[b] && s.load_on[b])
			out.island_load[static_cast<std::size_t>(islands.bus_island[b])] += c.buses[b].load_mw;

	std::vector<std::vector<std::size_t>> gens(k);
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		const auto b = *c.bus_index(c.generators[g].bus);
		if (s.gen_on[g] && energized[b])
			gens[static_cast<std::size_t>(islands.bus_island[b])].push_back(g);
	}

	for (std::size_t isl = 0; isl < k; ++isl) {
		if (gens[isl].empty())
			continue;
		std::vector<DispatchUnit> units;
		for (auto g : gens[isl]) {
			const auto& gen = c.generators[g];
			units.push_back({setpoints[g], gen.droop_gain, gen.p_min, gen.p_max});
		}
		try {
			const auto sol = droop_dispatch(units, out.island_load[isl]);
			out.island_freq[isl] = sol.freq_dev;
			for (std::size_t i = 0; i < gens[isl].size(); ++i)
				out.target_mw[gens[isl][i]] = sol.gen_p[i];
		} catch (const DispatchError& e) {
			out.island_failed[isl] = 1;
			out.alerts.push_back(fmt::format("island {} shed: {}", isl, e.what()));
		}
	}
	return out;
}

} // namespace gridtb::grid
