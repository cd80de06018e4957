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

#include "gridtb/grid/case.hpp"

#include "json.hpp"

#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

namespace gridtb::grid {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& record)
{
	auto it = obj.find(key);
	if (it == obj.end())
		throw CaseError(CaseError::Kind::Schema, record, fmt::format("missing field '{}'", key));
	return *it;
}

double number(const json& obj, const char* key, const std::string& record, std::optional<double> fallback = {})
{
	auto it = obj.find(key);
	if (it == obj.end()) {
		if (fallback)
			return *fallback;
		throw CaseError(CaseError::Kind::Schema, record, fmt::format("missing field '{}'", key));
	}
	if (!it->is_number())
		throw CaseError(CaseError::Kind::Schema, record, fmt::format("field '{}' must be a number", key));
	return it->get<double>();
}

int integer(const json& obj, const char* key, const std::string& record)
{
	const auto& v = require(obj, key, record);
	if (!v.is_number_integer())
		throw CaseError(CaseError::Kind::Schema, record, fmt::format("field '{}' must be an integer", key));
	return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& record, const char* fallback)
{
	auto it = obj.find(key);
	if (it == obj.end())
		return fallback;
	if (it->is_string())
		return it->get<std::string>();
	if (it->is_number_integer())
		return std::to_string(it->get<long long>());
	throw CaseError(CaseError::Kind::Schema, record, fmt::format("field '{}' must be a string", key));
}

bool flag(const json& obj, const char* key, const std::string& record, bool fallback)
{
	auto it = obj.find(key);
	if (it == obj.end())
		return fallback;
	if (!it->is_boolean())
		throw CaseError(CaseError::Kind::Schema, record, fmt::format("field '{}' must be true or false", key));
	return it->get<bool>();
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& record)
{
	if (!obj.is_object())
		throw CaseError(CaseError::Kind::Schema, record, "record must be an object");
	for (const auto& [k, v] : obj.items()) {
		bool ok = false;
		for (const char* a : allowed)
			ok = ok || k == a;
		if (!ok)
			throw CaseError(CaseError::Kind::Schema, record, fmt::format("unknown field '{}'", k));
	}
}

const json& array_field(const json& doc, const char* key)
{
	static const json kEmpty = json::array();
	auto it = doc.find(key);
	if (it == doc.end())
		return kEmpty;
	if (!it->is_array())
		throw CaseError(CaseError::Kind::Schema, key, "must be an array");
	return *it;
}

} // namespace

const char* to_string(DeviceType t)
{
	switch (t) {
	case DeviceType::Generator: return "Generator";
	case DeviceType::Branch: return "Branch";
	case DeviceType::Load: return "Load";
	case DeviceType::Shunt: return "Shunt";
	case DeviceType::Bus: return "Bus";
	}
	return "?";
}

std::optional<DeviceType> device_type_from_string(std::string_view s)
{
	for (auto t : {DeviceType::Generator, DeviceType::Branch, DeviceType::Load, DeviceType::Shunt, DeviceType::Bus})
		if (s == to_string(t))
			return t;
	return std::nullopt;
}

std::string load_key(int bus_id) { return fmt::format("{}_1", bus_id); }

CaseError::CaseError(Kind kind, std::string record, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", record, message))
    , kind_(kind)
    , record_(std::move(record))
{}

std::optional<std::size_t> GridCase::bus_index(int bus_id) const
{
	auto it = bus_lookup_.find(bus_id);
	return it == bus_lookup_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<std::size_t> GridCase::branch_index(std::string_view id) const
{
	auto it = branch_lookup_.find(id);
	return it == branch_lookup_.end() ? std::nullopt : std::optional(it->second);
}

std::optional<std::size_t> GridCase::generator_index(std::string_view id) const
{
	auto it = gen_lookup_.find(id);
	return it == gen_lookup_.end() ? std::nullopt : std::optional(it->second);
}

namespace {

std::optional<int> bus_from_key(std::string_view key)
{
	if (key.size() < 3 || key.substr(key.size() - 2) != "_1")
		return std::nullopt;
	int id = 0;
	for (char c : key.substr(0, key.size() - 2)) {
		if (c < '0' || c > '9')
			return std::nullopt;
		id = id * 10 + (c - '0');
	}
	return id;
}

} // namespace

std::optional<std::size_t> GridCase::load_bus_index(std::string_view key) const
{
	const auto id = bus_from_key(key);
	if (!id)
		return std::nullopt;
	const auto idx = bus_index(*id);
	if (!idx || !buses[*idx].has_load)
		return std::nullopt;
	return idx;
}

std::optional<std::size_t> GridCase::shunt_bus_index(std::string_view key) const
{
	const auto id = bus_from_key(key);
	if (!id)
		return std::nullopt;
	const auto idx = bus_index(*id);
	if (!idx || !buses[*idx].has_shunt)
		return std::nullopt;
	return idx;
}

std::optional<std::size_t> GridCase::device_index(DeviceType type, std::string_view key) const
{
	switch (type) {
	case DeviceType::Generator: return generator_index(key);
	case DeviceType::Branch: return branch_index(key);
	case DeviceType::Load: return load_bus_index(key);
	case DeviceType::Shunt: return shunt_bus_index(key);
	case DeviceType::Bus: {
		int id = 0;
		if (key.empty())
			return std::nullopt;
		for (char c : key) {
			if (c < '0' || c > '9')
				return std::nullopt;
			id = id * 10 + (c - '0');
		}
		return bus_index(id);
	}
	}
	return std::nullopt;
}

void GridCase::reindex()
{
	bus_lookup_.clear();
	branch_lookup_.clear();
	gen_lookup_.clear();
	for (std::size_t i = 0; i < buses.size(); ++i)
		bus_lookup_.emplace(buses[i].id, i);
	for (std::size_t i = 0; i < branches.size(); ++i)
		branch_lookup_.emplace(branches[i].id, i);
	for (std::size_t i = 0; i < generators.size(); ++i)
		gen_lookup_.emplace(generators[i].id, i);
}

GridCase load_case(std::string_view text_doc)
{
	json doc;
	try {
		doc = json::parse(text_doc);
	} catch (const json::parse_error& e) {
		throw CaseError(CaseError::Kind::Schema, "document", e.what());
	}
	if (!doc.is_object())
		throw CaseError(CaseError::Kind::Schema, "document", "case must be a JSON object");
	only_keys(doc, {"name", "description", "system", "buses", "branches", "generators"}, "document");

	GridCase c;
	c.name = text(doc, "name", "document", "");
	if (auto it = doc.find("system"); it != doc.end()) {
		only_keys(*it, {"base_mva", "frequency_hz"}, "system");
		c.system.base_mva = number(*it, "base_mva", "system", 100.0);
		c.system.frequency_hz = number(*it, "frequency_hz", "system", 60.0);
		if (c.system.base_mva <= 0.0)
			throw CaseError(CaseError::Kind::Limits, "system", "base_mva must be positive");
	}

	std::set<int> bus_ids;
	std::size_t n = 0;
	for (const auto& jb : array_field(doc, "buses")) {
		std::string rec = fmt::format("bus #{}", n++);
		only_keys(jb, {"id", "substation", "name", "kv", "load_mw", "load_mvar", "shunt_mvar"}, rec);
		Bus b;
		b.id = integer(jb, "id", rec);
		rec = fmt::format("bus {}", b.id);
		b.substation = jb.contains("substation") ? integer(jb, "substation", rec) : 0;
		b.name = text(jb, "name", rec, "");
		b.nominal_kv = number(jb, "kv", rec, 0.0);
		b.has_load = jb.contains("load_mw") || jb.contains("load_mvar");
		b.load_mw = number(jb, "load_mw", rec, 0.0);
		b.load_mvar = number(jb, "load_mvar", rec, 0.0);
		b.has_shunt = jb.contains("shunt_mvar");
		b.shunt_mvar = number(jb, "shunt_mvar", rec, 0.0);
		if (b.id <= 0)
			throw CaseError(CaseError::Kind::Limits, rec, "bus id must be positive");
		if (!bus_ids.insert(b.id).second)
			throw CaseError(CaseError::Kind::Duplicate, rec, "duplicate bus id");
		c.buses.push_back(std::move(b));
	}

	std::set<std::string> branch_ids;
	n = 0;
	for (const auto& jb : array_field(doc, "branches")) {
		std::string rec = fmt::format("branch #{}", n++);
		only_keys(jb, {"from", "to", "ckt", "x", "b", "status", "rating_mva", "transformer"}, rec);
		Branch br;
		br.from_bus = integer(jb, "from", rec);
		br.to_bus = integer(jb, "to", rec);
		br.circuit = text(jb, "ckt", rec, "1");
		br.id = fmt::format("{}_{}_{}", br.from_bus, br.to_bus, br.circuit);
		rec = fmt::format("branch {}", br.id);
		br.x = number(jb, "x", rec);
		br.b = number(jb, "b", rec, 0.0);
		br.closed = flag(jb, "status", rec, true);
		br.rating_mva = number(jb, "rating_mva", rec, 0.0);
		br.is_transformer = flag(jb, "transformer", rec, false);
		if (!bus_ids.count(br.from_bus))
			throw CaseError(CaseError::Kind::DanglingReference, rec, fmt::format("from bus {} does not exist", br.from_bus));
		if (!bus_ids.count(br.to_bus))
			throw CaseError(CaseError::Kind::DanglingReference, rec, fmt::format("to bus {} does not exist", br.to_bus));
		if (br.from_bus == br.to_bus)
			throw CaseError(CaseError::Kind::Schema, rec, "branch connects a bus to itself");
		if (!(br.x > 0.0))
			throw CaseError(CaseError::Kind::NonPositiveReactance, rec, fmt::format("reactance {} must be positive", br.x));
		if (br.b < 0.0 || br.rating_mva < 0.0)
			throw CaseError(CaseError::Kind::Limits, rec, "charging and rating must be non-negative");
		if (!branch_ids.insert(br.id).second)
			throw CaseError(CaseError::Kind::Duplicate, rec, "duplicate branch id");
		c.branches.push_back(std::move(br));
	}

	std::set<std::string> gen_ids;
	n = 0;
	for (const auto& jg : array_field(doc, "generators")) {
		std::string rec = fmt::format("generator #{}", n++);
		only_keys(jg, {"bus", "ckt", "p_mw", "p_min", "p_max", "droop_gain", "ramp_tau", "vset", "status"}, rec);
		Generator g;
		g.bus = integer(jg, "bus", rec);
		g.circuit = text(jg, "ckt", rec, "1");
		g.id = fmt::format("{}_{}", g.bus, g.circuit);
		rec = fmt::format("generator {}", g.id);
		g.p_init = number(jg, "p_mw", rec);
		g.p_min = number(jg, "p_min", rec, 0.0);
		g.p_max = number(jg, "p_max", rec);
		g.droop_gain = number(jg, "droop_gain", rec, default_droop_gain(g.p_max));
		g.ramp_tau = number(jg, "ramp_tau", rec, 5.0);
		g.vset = number(jg, "vset", rec, 1.0);
		g.on = flag(jg, "status", rec, true);
		if (!bus_ids.count(g.bus))
			throw CaseError(CaseError::Kind::DanglingReference, rec, fmt::format("bus {} does not exist", g.bus));
		if (!(g.p_min <= g.p_init && g.p_init <= g.p_max))
			throw CaseError(CaseError::Kind::Limits, rec,
			                fmt::format("requires p_min <= p_mw <= p_max, got {} / {} / {}", g.p_min, g.p_init, g.p_max));
		if (!(g.droop_gain > 0.0) || !(g.ramp_tau > 0.0) || !(g.vset > 0.0))
			throw CaseError(CaseError::Kind::Limits, rec, "droop_gain, ramp_tau and vset must be positive");
		if (!gen_ids.insert(g.id).second)
			throw CaseError(CaseError::Kind::Duplicate, rec, "duplicate generator id");
		c.generators.push_back(std::move(g));
	}

	c.reindex();
	return c;
}

GridCase load_case_file(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw CaseError(CaseError::Kind::Schema, path.string(), "cannot open case file");
	std::stringstream ss;
	ss << in.rdbuf();
	return load_case(ss.str());
}

std::string save_case(const GridCase& c)
{
	json doc;
	doc["name"] = c.name;
	doc["system"] = {{"base_mva", c.system.base_mva}, {"frequency_hz", c.system.frequency_hz}};
	doc["buses"] = json::array();
	for (const auto& b : c.buses) {
		json jb = {{"id", b.id}, {"substation", b.substation}, {"name", b.name}, {"kv", b.nominal_kv}};
		if (b.has_load) {
			jb["load_mw"] = b.load_mw;
			jb["load_mvar"] = b.load_mvar;
		}
		if (b.has_shunt)
			jb["shunt_mvar"] = b.shunt_mvar;
		doc["buses"].push_back(jb);
	}
	doc["branches"] = json::array();
	for (const auto& br : c.branches)
		doc["branches"].push_back({{"from", br.from_bus}, {"to", br.to_bus}, {"ckt", br.circuit}, {"x", br.x}, {"b", br.b},
		                           {"status", br.closed}, {"rating_mva", br.rating_mva}, {"transformer", br.is_transformer}});
	doc["generators"] = json::array();
	for (const auto& g : c.generators)
		doc["generators"].push_back({{"bus", g.bus}, {"ckt", g.circuit}, {"p_mw", g.p_init}, {"p_min", g.p_min},
		                             {"p_max", g.p_max}, {"droop_gain", g.droop_gain}, {"ramp_tau", g.ramp_tau},
		                             {"vset", g.vset}, {"status", g.on}});
	return doc.dump(2);
}

} // namespace gridtb::grid
