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

#include "gridtb/grid/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>
#include <algorithm>
#include <numeric>

namespace gridtb::grid {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Edge
{
	std::size_t branch;
	std::size_t from;
	std::size_t to;
};

std::vector<Edge> closed_edges(const GridCase& c, const Statuses& s)
{
	std::vector<Edge> edges;
	for (std::size_t k = 0; k < c.branches.size(); ++k) {
		if (!s.branch_closed[k])
			continue;
		const auto& br = c.branches[k];
		edges.push_back({k, *c.bus_index(br.from_bus), *c.bus_index(br.to_bus)});
	}
	return edges;
}

/// Buses of each island in ascending bus-index order.
std::vector<std::vector<std::size_t>> island_members(const Islands& isl)
{
	std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(isl.count));
	for (std::size_t i = 0; i < isl.bus_island.size(); ++i)
		members[static_cast<std::size_t>(isl.bus_island[i])].push_back(i);
	return members;
}

/// Solves L_reduced * x = rhs for an island, where unknown buses are mapped to
/// 0..n-1 by `local` (-1 for boundary/reference buses). Returns false on failure.
bool solve_reduced(const std::vector<Edge>& edges, const GridCase& c, const std::vector<long>& local, long n,
                   const Eigen::VectorXd& rhs, Eigen::VectorXd& x)
{
	std::vector<Triplet> trips;
	for (const auto& e : edges) {
		const long i = local[e.from];
		const long j = local[e.to];
		if (i < 0 && j < 0)
			continue;
		const double y = 1.0 / c.branches[e.branch].x;
		if (i >= 0)
			trips.emplace_back(i, i, y);
		if (j >= 0)
			trips.emplace_back(j, j, y);
		if (i >= 0 && j >= 0) {
			trips.emplace_back(i, j, -y);
			trips.emplace_back(j, i, -y);
		}
	}
	SparseMatrix m(n, n);
	m.setFromTriplets(trips.begin(), trips.end());
	Eigen::SimplicialLDLT<SparseMatrix> solver;
	solver.compute(m);
	if (solver.info() != Eigen::Success)
		return false;
	x = solver.solve(rhs);
	if (solver.info() != Eigen::Success || !x.allFinite())
		return false;
	// LDLT of a singular Laplacian can "succeed" with a zero pivot; check it.
	const Eigen::VectorXd d = solver.vectorD();
	for (long k = 0; k < d.size(); ++k)
		if (!(d[k] > 1e-12))
			return false;
	return true;
}

} // namespace

Statuses Statuses::from_case(const GridCase& c)
{
	Statuses s;
	for (const auto& br : c.branches)
		s.branch_closed.push_back(br.closed ? 1 : 0);
	for (const auto& g : c.generators)
		s.gen_on.push_back(g.on ? 1 : 0);
	s.load_on.assign(c.buses.size(), 1);
	s.shunt_on.assign(c.buses.size(), 1);
	return s;
}

Islands find_islands(const GridCase& c, const Statuses& s)
{
	const auto n = c.buses.size();
	std::vector<std::size_t> parent(n);
	std::iota(parent.begin(), parent.end(), std::size_t{0});
	auto find = [&](std::size_t x) {
		while (parent[x] != x) {
			parent[x] = parent[parent[x]];
			x = parent[x];
		}
		return x;
	};
	for (const auto& e : closed_edges(c, s)) {
		auto a = find(e.from);
		auto b = find(e.to);
		if (a != b)
			parent[std::max(a, b)] = std::min(a, b);
	}
	// number islands in order of their lowest bus index
	Islands isl;
	isl.bus_island.assign(n, -1);
	std::vector<int> root_label(n, -1);
	for (std::size_t i = 0; i < n; ++i) {
		const auto r = find(i);
		if (root_label[r] < 0)
			root_label[r] = isl.count++;
		isl.bus_island[i] = root_label[r];
	}
	return isl;
}

std::vector<double> bus_injection_mw(const GridCase& c, const Statuses& s, std::span<const double> gen_p_mw,
                                     const std::vector<char>& energized)
{
	std::vector<double> inj(c.buses.size(), 0.0);
	for (std::size_t i = 0; i < c.buses.size(); ++i)
		if (energized[i] && s.load_on[i])
			inj[i] -= c.buses[i].load_mw;
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		const auto b = *c.bus_index(c.generators[g].bus);
		if (energized[b] && s.gen_on[g])
			inj[b] += gen_p_mw[g];
	}
	return inj;
}

DcResult solve_dc(const GridCase& c, const Statuses& s, std::span<const double> gen_p_mw)
{
	const auto n = c.buses.size();
	DcResult r;
	r.theta.assign(n, 0.0);
	r.branch_p_mw.assign(c.branches.size(), 0.0);
	r.energized.assign(n, 0);
	r.islands = find_islands(c, s);

	const auto edges = closed_edges(c, s);
	const auto members = island_members(r.islands);

	// reference bus per island: lowest-index bus hosting an online generator
	std::vector<long> reference(members.size(), -1);
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		if (!s.gen_on[g])
			continue;
		const auto b = *c.bus_index(c.generators[g].bus);
		auto& ref = reference[static_cast<std::size_t>(r.islands.bus_island[b])];
		if (ref < 0 || static_cast<long>(b) < ref)
			ref = static_cast<long>(b);
	}

	for (std::size_t k = 0; k < members.size(); ++k) {
		if (reference[k] < 0)
			continue;
		for (auto b : members[k])
			r.energized[b] = 1;
	}
	const auto inj = bus_injection_mw(c, s, gen_p_mw, r.energized);

	std::vector<long> local(n, -1);
	for (std::size_t k = 0; k < members.size(); ++k) {
		if (reference[k] < 0)
			continue;
		// local numbering is per island; everything else stays -1
		std::fill(local.begin(), local.end(), -1);
		long m = 0;
		for (auto b : members[k])
			if (static_cast<long>(b) != reference[k])
				local[b] = m++;
		if (m == 0)
			continue;
		Eigen::VectorXd rhs(m);
		for (auto b : members[k])
			if (local[b] >= 0)
				rhs[local[b]] = inj[b] / c.system.base_mva;
		Eigen::VectorXd x;
		if (!solve_reduced(edges, c, local, m, rhs, x)) {
			r.alerts.push_back(fmt::format("island {} has a singular susceptance matrix; de-energized", k));
			for (auto b : members[k])
				r.energized[b] = 0;
			continue;
		}
		for (auto b : members[k])
			if (local[b] >= 0)
				r.theta[b] = x[local[b]];
	}

	for (const auto& e : edges) {
		if (!r.energized[e.from])
			continue;
		r.branch_p_mw[e.branch] = (r.theta[e.from] - r.theta[e.to]) / c.branches[e.branch].x * c.system.base_mva;
	}
	return r;
}

QvResult solve_qv(const GridCase& c, const Statuses& s, std::span<const double> vset, const std::vector<char>& energized)
{
	const auto n = c.buses.size();
	const double base = c.system.base_mva;
	QvResult r;
	r.vm.assign(n, 0.0);
	r.branch_q_mvar.assign(c.branches.size(), 0.0);
	r.gen_q_mvar.assign(c.generators.size(), 0.0);

	// voltage-controlled buses take the first online generator's setpoint
	std::vector<char> controlled(n, 0);
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		const auto b = *c.bus_index(c.generators[g].bus);
		if (!s.gen_on[g] || !energized[b] || controlled[b])
			continue;
		controlled[b] = 1;
		r.vm[b] = vset[g];
	}

	const auto edges = closed_edges(c, s);
	std::vector<long> local(n, -1);
	long m = 0;
	for (std::size_t i = 0; i < n; ++i)
		if (energized[i] && !controlled[i])
			local[i] = m++;

	// net reactive injection (pu) at each bus, including half of each
	// closed line's charging
	std::vector<double> q_inj(n, 0.0);
	for (std::size_t i = 0; i < n; ++i) {
		if (!energized[i])
			continue;
		if (s.load_on[i])
			q_inj[i] -= c.buses[i].load_mvar / base;
		if (s.shunt_on[i])
			q_inj[i] += c.buses[i].shunt_mvar / base;
	}
	for (const auto& e : edges) {
		const double half_b = c.branches[e.branch].b / 2.0;
		q_inj[e.from] += half_b;
		q_inj[e.to] += half_b;
	}

	if (m > 0) {
		Eigen::VectorXd rhs(m);
		for (std::size_t i = 0; i < n; ++i)
			if (local[i] >= 0)
				rhs[local[i]] = q_inj[i];
		for (const auto& e : edges) {
			const double y = 1.0 / c.branches[e.branch].x;
			if (local[e.from] >= 0 && controlled[e.to])
				rhs[local[e.from]] += y * r.vm[e.to];
			if (local[e.to] >= 0 && controlled[e.from])
				rhs[local[e.to]] += y * r.vm[e.from];
		}
		Eigen::VectorXd x;
		if (solve_reduced(edges, c, local, m, rhs, x)) {
			for (std::size_t i = 0; i < n; ++i)
				if (local[i] >= 0)
					r.vm[i] = x[local[i]];
		}
	}

	std::vector<double> q_out(n, 0.0);
	for (const auto& e : edges) {
		if (!energized[e.from])
			continue;
		const auto& br = c.branches[e.branch];
		const double dv = r.vm[e.from] - r.vm[e.to];
		r.branch_q_mvar[e.branch] = (dv / br.x - br.b / 2.0) * base;
		q_out[e.from] += r.branch_q_mvar[e.branch];
		q_out[e.to] += (-dv / br.x - br.b / 2.0) * base;
	}

	// generator Q closes the balance at its bus, shared equally between units
	std::vector<int> units(n, 0);
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		const auto b = *c.bus_index(c.generators[g].bus);
		if (s.gen_on[g] && energized[b])
			++units[b];
	}
	for (std::size_t g = 0; g < c.generators.size(); ++g) {
		const auto b = *c.bus_index(c.generators[g].bus);
		if (!s.gen_on[g] || !energized[b])
			continue;
		double need = q_out[b];
		if (s.load_on[b])
			need += c.buses[b].load_mvar;
		if (s.shunt_on[b])
			need -= c.buses[b].shunt_mvar;
		r.gen_q_mvar[g] = need / units[b];
	}
	return r;
}

} // namespace gridtb::grid
