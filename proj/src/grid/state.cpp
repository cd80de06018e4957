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

#include "gridtb/grid/state.hpp"

#include "gridtb/grid/dispatch.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gridtb::grid {

double GridState::load_mw(const GridCase& c, std::size_t bus) const
{
	return energized[bus] && status.load_on[bus] ? c.buses[bus].load_mw : 0.0;
}

double GridState::load_mvar(const GridCase& c, std::size_t bus) const
{
	return energized[bus] && status.load_on[bus] ? c.buses[bus].load_mvar : 0.0;
}

double GridState::shunt_mvar(const GridCase& c, std::size_t bus) const
{
	return energized[bus] && status.shunt_on[bus] ? c.buses[bus].shunt_mvar : 0.0;
}

namespace {

/// Shared body of step/resolve. `dt` of zero leaves governors untouched.
void solve_step(const GridCase& c, GridState& s, double dt)
{
	const auto ng = c.generators.size();
	s.alerts.clear();

	// energization and droop targets come from topology and setpoints alone
	auto islands = find_islands(c, s.status);
	std::vector<char> has_gen(static_cast<std::size_t>(islands.count), 0);
	for (std::size_t g = 0; g < ng; ++g)
		if (s.status.gen_on[g])
			has_gen[static_cast<std::size_t>(islands.bus_island[*c.bus_index(c.generators[g].bus)])] = 1;
	std::vector<char> energized(c.buses.size(), 0);
	for (std::size_t b = 0; b < c.buses.size(); ++b)
		energized[b] = has_gen[static_cast<std::size_t>(islands.bus_island[b])];

	auto dispatch = dispatch_system(c, s.status, s.gen_setpoint, islands, energized);
	s.alerts = dispatch.alerts;

	// shed islands solve as if their units were off
	Statuses solve_status = s.status;
	for (std::size_t g = 0; g < ng; ++g) {
		const auto isl = static_cast<std::size_t>(islands.bus_island[*c.bus_index(c.generators[g].bus)]);
		if (dispatch.island_failed[isl])
			solve_status.gen_on[g] = 0;
	}

	s.gen_target = dispatch.target_mw;
	std::vector<double> gain_sum(static_cast<std::size_t>(islands.count), 0.0);
	std::vector<double> governor_sum(static_cast<std::size_t>(islands.count), 0.0);
	for (std::size_t g = 0; g < ng; ++g) {
		if (!s.status.gen_on[g]) {
			s.gen_governor[g] = 0.0;
			continue;
		}
		const auto isl = static_cast<std::size_t>(islands.bus_island[*c.bus_index(c.generators[g].bus)]);
		if (!solve_status.gen_on[g])
			continue;
		if (dt > 0.0) {
			const double alpha = 1.0 - std::exp(-dt / c.generators[g].ramp_tau);
			s.gen_governor[g] += (s.gen_target[g] - s.gen_governor[g]) * alpha;
		}
		gain_sum[isl] += c.generators[g].droop_gain;
		governor_sum[isl] += s.gen_governor[g];
	}

	// any governor mismatch is picked up instantly in proportion to droop gain
	s.gen_p.assign(ng, 0.0);
	for (std::size_t g = 0; g < ng; ++g) {
		if (!solve_status.gen_on[g])
			continue;
		const auto isl = static_cast<std::size_t>(islands.bus_island[*c.bus_index(c.generators[g].bus)]);
		const double mismatch = dispatch.island_load[isl] - governor_sum[isl];
		s.gen_p[g] = s.gen_governor[g] + mismatch * c.generators[g].droop_gain / gain_sum[isl];
	}

	auto dc = solve_dc(c, solve_status, s.gen_p);
	s.theta = std::move(dc.theta);
	s.branch_p = std::move(dc.branch_p_mw);
	s.energized = std::move(dc.energized);
	s.island = std::move(dc.islands.bus_island);
	s.alerts.insert(s.alerts.end(), dc.alerts.begin(), dc.alerts.end());
	for (std::size_t g = 0; g < ng; ++g)
		if (!s.energized[*c.bus_index(c.generators[g].bus)])
			s.gen_p[g] = 0.0;

	auto qv = solve_qv(c, solve_status, s.gen_vset, s.energized);
	s.vm = std::move(qv.vm);
	s.branch_q = std::move(qv.branch_q_mvar);
	s.gen_q = std::move(qv.gen_q_mvar);

	s.island_freq = dispatch.island_freq;
	double heaviest = -1.0;
	s.freq_dev = 0.0;
	for (std::size_t k = 0; k < dispatch.island_load.size(); ++k) {
		if (dispatch.island_failed[k] || !has_gen[k])
			continue;
		if (dispatch.island_load[k] > heaviest) {
			heaviest = dispatch.island_load[k];
			s.freq_dev = dispatch.island_freq[k];
		}
	}
	s.time_s += dt;
}

std::size_t require_device(std::optional<std::size_t> idx, const char* what, std::string_view id)
{
	if (!idx)
		throw UnknownDevice(fmt::format("unknown {} '{}'", what, id));
	return *idx;
}

} // namespace

GridState initial_state(const GridCase& c)
{
	GridState s;
	s.status = Statuses::from_case(c);
	for (const auto& g : c.generators) {
		s.gen_setpoint.push_back(g.p_init);
		s.gen_vset.push_back(g.vset);
		s.gen_governor.push_back(g.on ? g.p_init : 0.0);
	}
	solve_step(c, s, 0.0);
	return s;
}

void step(const GridCase& c, GridState& s, double dt)
{
	if (!(dt > 0.0))
		throw std::invalid_argument("step requires dt > 0");
	solve_step(c, s, dt);
	++s.tick;
}

void resolve(const GridCase& c, GridState& s) { solve_step(c, s, 0.0); }

void apply_breaker(const GridCase& c, GridState& s, std::string_view branch_id, bool closed)
{
	s.status.branch_closed[require_device(c.branch_index(branch_id), "branch", branch_id)] = closed ? 1 : 0;
}

void apply_gen_status(const GridCase& c, GridState& s, std::string_view gen_id, bool on)
{
	s.status.gen_on[require_device(c.generator_index(gen_id), "generator", gen_id)] = on ? 1 : 0;
}

void apply_load_status(const GridCase& c, GridState& s, std::string_view load_key, bool on)
{
	s.status.load_on[require_device(c.load_bus_index(load_key), "load", load_key)] = on ? 1 : 0;
}

void apply_shunt_status(const GridCase& c, GridState& s, std::string_view shunt_key, bool on)
{
	s.status.shunt_on[require_device(c.shunt_bus_index(shunt_key), "shunt", shunt_key)] = on ? 1 : 0;
}

SetpointOutcome apply_setpoint(const GridCase& c, GridState& s, std::string_view gen_id, SetpointKind kind, double value)
{
	const auto g = require_device(c.generator_index(gen_id), "generator", gen_id);
	if (!s.status.gen_on[g])
		throw SetpointRejected(fmt::format("generator '{}' is offline", gen_id));
	if (!std::isfinite(value))
		throw SetpointRejected("setpoint must be finite");
	SetpointOutcome out;
	const auto& gen = c.generators[g];
	if (kind == SetpointKind::MW) {
		out.applied = std::clamp(value, gen.p_min, gen.p_max);
		out.clamped = out.applied != value;
		s.gen_setpoint[g] = out.applied;
	} else {
		if (!(value > 0.0))
			throw SetpointRejected("voltage setpoint must be positive");
		out.applied = value;
		s.gen_vset[g] = value;
	}
	return out;
}

} // namespace gridtb::grid
