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

#include "gridtb/pointmap/pointmap.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

namespace gridtb::pointmap {

using json = nlohmann::ordered_json;

namespace {

constexpr PointType kAllTypes[] = {PointType::BinaryInput, PointType::AnalogInput, PointType::CounterInput,
                                   PointType::BinaryOutput, PointType::AnalogOutput};

} // namespace

const char* prefix(PointType t)
{
	switch (t) {
	case PointType::BinaryInput: return "BI";
	case PointType::AnalogInput: return "AI";
	case PointType::CounterInput: return "CI";
	case PointType::BinaryOutput: return "BO";
	case PointType::AnalogOutput: return "AO";
	}
	return "??";
}

std::optional<PointType> point_type_from_prefix(std::string_view s)
{
	for (auto t : kAllTypes)
		if (s == prefix(t))
			return t;
	return std::nullopt;
}

const char* to_string(Field f)
{
	switch (f) {
	case Field::STATUS: return "STATUS";
	case Field::MW: return "MW";
	case Field::MVAR: return "MVAR";
	case Field::VPU: return "VPU";
	case Field::MWSETPOINT: return "MWSETPOINT";
	case Field::VPUSETPOINT: return "VPUSETPOINT";
	}
	return "?";
}

std::optional<Field> field_from_string(std::string_view s)
{
	for (auto f : {Field::STATUS, Field::MW, Field::MVAR, Field::VPU, Field::MWSETPOINT, Field::VPUSETPOINT})
		if (s == to_string(f))
			return f;
	return std::nullopt;
}

bool is_legal(PointType type, DeviceType device, Field field)
{
	const bool equipment = device != DeviceType::Bus;
	switch (type) {
	case PointType::BinaryInput: return field == Field::STATUS;
	case PointType::AnalogInput:
		if (field == Field::MW || field == Field::MVAR)
			return equipment;
		return field == Field::VPU && device == DeviceType::Bus;
	case PointType::BinaryOutput: return field == Field::STATUS && equipment;
	case PointType::AnalogOutput:
		return device == DeviceType::Generator && (field == Field::MWSETPOINT || field == Field::VPUSETPOINT);
	case PointType::CounterInput: return true; // constant zero, binding is informational
	}
	return false;
}

std::vector<const Point*> OutstationDef::of_type(PointType t) const
{
	std::vector<const Point*> out;
	for (const auto& p : points)
		if (p.type == t)
			out.push_back(&p);
	std::sort(out.begin(), out.end(), [](const Point* a, const Point* b) { return a->index < b->index; });
	return out;
}

const Point* OutstationDef::find(PointType t, std::uint16_t index) const
{
	for (const auto& p : points)
		if (p.type == t && p.index == index)
			return &p;
	return nullptr;
}

std::size_t OutstationDef::count(PointType t) const
{
	return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [t](const Point& p) { return p.type == t; }));
}

std::string tag_name(const Point& p, std::uint16_t outstation)
{
	return fmt::format("{}_{}_{}_{}_{}", prefix(p.type), outstation, grid::to_string(p.device), p.key, to_string(p.field));
}

std::string tag_name(const Point& p, const OutstationDef& os) { return tag_name(p, os.number); }

MapError::MapError(Kind kind, std::string where, const std::string& message)
	: std::runtime_error(fmt::format("{}: {}", where, message)), kind_(kind), where_(std::move(where))
{}

PointMap::PointMap(std::vector<OutstationDef> outstations, const grid::GridCase* grid)
	: outstations_(std::move(outstations))
{
	std::set<std::uint16_t> numbers;
	for (const auto& os : outstations_) {
		const auto where_os = fmt::format("outstation {}", os.number);
		if (os.number > 65519)
			throw MapError(MapError::Kind::Schema, where_os, "outstation number must be 0-65519");
		if (!numbers.insert(os.number).second)
			throw MapError(MapError::Kind::Duplicate, where_os, "duplicate outstation number");

		std::map<PointType, std::set<std::uint16_t>> seen;
		for (const auto& p : os.points) {
			const auto where = fmt::format("{} point {}{}", where_os, prefix(p.type), p.index);
			if (!seen[p.type].insert(p.index).second)
				throw MapError(MapError::Kind::Duplicate, where, "duplicate index");
			if (!is_legal(p.type, p.device, p.field))
				throw MapError(MapError::Kind::Illegal, where,
				               fmt::format("{} cannot bind {} of a {}", prefix(p.type), to_string(p.field), grid::to_string(p.device)));
			if (p.event_class < 0 || p.event_class > 3)
				throw MapError(MapError::Kind::Schema, where, "event class must be 0-3");
			if (!is_input(p.type) && p.event_class != 0)
				throw MapError(MapError::Kind::Illegal, where, "output points are static (class 0)");
			if (!(p.deadband >= 0.0) || !std::isfinite(p.deadband))
				throw MapError(MapError::Kind::Schema, where, "deadband must be a finite value >= 0");
			if (p.deadband != 0.0 && p.type != PointType::AnalogInput)
				throw MapError(MapError::Kind::Schema, where, "deadband applies to analog inputs only");
			if (grid && !grid->device_index(p.device, p.key))
				throw MapError(MapError::Kind::UnknownDevice, where,
				               fmt::format("no {} '{}' in case", grid::to_string(p.device), p.key));
			const auto tag = tag_name(p, os);
			if (!by_tag_.emplace(tag, PointRef{os.number, p.type, p.index}).second)
				throw MapError(MapError::Kind::Duplicate, where, fmt::format("tag {} bound twice", tag));
		}
		for (const auto& [type, indices] : seen) {
			if (!indices.empty() && *indices.rbegin() != indices.size() - 1)
				throw MapError(MapError::Kind::NonContiguous, fmt::format("{} {}", where_os, prefix(type)),
				               fmt::format("indices must run 0..{} without gaps", indices.size() - 1));
		}
	}
}

const OutstationDef* PointMap::outstation(std::uint16_t number) const
{
	for (const auto& os : outstations_)
		if (os.number == number)
			return &os;
	return nullptr;
}

const Point* PointMap::resolve(const PointRef& ref) const
{
	const auto* os = outstation(ref.outstation);
	return os ? os->find(ref.type, ref.index) : nullptr;
}

std::optional<PointRef> PointMap::resolve(std::string_view tag) const
{
	auto it = by_tag_.find(tag);
	if (it == by_tag_.end())
		return std::nullopt;
	return it->second;
}

std::size_t PointMap::point_count() const { return by_tag_.size(); }

namespace {

template <class T>
T field_as(const json& j, const char* key, const std::string& where)
{
	auto it = j.find(key);
	if (it == j.end())
		throw MapError(MapError::Kind::Schema, where, fmt::format("missing field '{}'", key));
	try {
		return it->template get<T>();
	} catch (const json::exception&) {
		throw MapError(MapError::Kind::Schema, where, fmt::format("field '{}' has the wrong type", key));
	}
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
	if (!j.is_object())
		throw MapError(MapError::Kind::Schema, where, "must be an object");
	for (const auto& [k, v] : j.items()) {
		if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
			throw MapError(MapError::Kind::Schema, where, fmt::format("unknown field '{}'", k));
	}
}

} // namespace

PointMap parse_map(std::string_view text, const grid::GridCase* grid)
{
	json doc;
	try {
		doc = json::parse(text);
	} catch (const json::exception& e) {
		throw MapError(MapError::Kind::Schema, "document", e.what());
	}
	only_keys(doc, {"outstations"}, "document");
	if (!doc.contains("outstations") || !doc["outstations"].is_array())
		throw MapError(MapError::Kind::Schema, "document", "'outstations' must be an array");

	std::vector<OutstationDef> defs;
	std::size_t n = 0;
	for (const auto& jo : doc["outstations"]) {
		auto where = fmt::format("outstation #{}", n++);
		only_keys(jo, {"number", "name", "points"}, where);
		OutstationDef os;
		const auto number = field_as<long long>(jo, "number", where);
		if (number < 0 || number > 65519)
			throw MapError(MapError::Kind::Schema, where, "outstation number must be 0-65519");
		os.number = static_cast<std::uint16_t>(number);
		where = fmt::format("outstation {}", os.number);
		os.name = jo.contains("name") ? field_as<std::string>(jo, "name", where) : std::string{};
		if (jo.contains("points")) {
			if (!jo["points"].is_array())
				throw MapError(MapError::Kind::Schema, where, "'points' must be an array");
			std::size_t k = 0;
			for (const auto& jp : jo["points"]) {
				const auto pwhere = fmt::format("{} point #{}", where, k++);
				only_keys(jp, {"type", "index", "device", "key", "field", "class", "deadband"}, pwhere);
				Point p;
				const auto type = field_as<std::string>(jp, "type", pwhere);
				const auto t = point_type_from_prefix(type);
				if (!t)
					throw MapError(MapError::Kind::Schema, pwhere, fmt::format("unknown point type '{}'", type));
				p.type = *t;
				const auto index = field_as<long long>(jp, "index", pwhere);
				if (index < 0 || index > 65535)
					throw MapError(MapError::Kind::Schema, pwhere, "index must be 0-65535");
				p.index = static_cast<std::uint16_t>(index);
				const auto device = field_as<std::string>(jp, "device", pwhere);
				const auto d = grid::device_type_from_string(device);
				if (!d)
					throw MapError(MapError::Kind::Schema, pwhere, fmt::format("unknown device type '{}'", device));
				p.device = *d;
				p.key = field_as<std::string>(jp, "key", pwhere);
				const auto field = field_as<std::string>(jp, "field", pwhere);
				const auto f = field_from_string(field);
				if (!f)
					throw MapError(MapError::Kind::Schema, pwhere, fmt::format("unknown field '{}'", field));
				p.field = *f;
				p.event_class = jp.contains("class") ? field_as<int>(jp, "class", pwhere) : 0;
				p.deadband = jp.contains("deadband") ? field_as<double>(jp, "deadband", pwhere) : 0.0;
				os.points.push_back(std::move(p));
			}
		}
		defs.push_back(std::move(os));
	}
	return PointMap(std::move(defs), grid);
}

PointMap load_map_file(const std::filesystem::path& path, const grid::GridCase* grid)
{
	std::ifstream in(path);
	if (!in)
		throw MapError(MapError::Kind::Schema, path.string(), "cannot open map file");
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_map(ss.str(), grid);
}

std::string save_map(const PointMap& map)
{
	json doc;
	doc["outstations"] = json::array();
	for (const auto& os : map.outstations()) {
		json jo;
		jo["number"] = os.number;
		jo["name"] = os.name;
		jo["points"] = json::array();
		for (const auto& p : os.points) {
			json jp;
			jp["type"] = prefix(p.type);
			jp["index"] = p.index;
			jp["device"] = grid::to_string(p.device);
			jp["key"] = p.key;
			jp["field"] = to_string(p.field);
			jp["class"] = p.event_class;
			if (p.type == PointType::AnalogInput)
				jp["deadband"] = p.deadband;
			jo["points"].push_back(std::move(jp));
		}
		doc["outstations"].push_back(std::move(jo));
	}
	return doc.dump(2) + "\n";
}

namespace {

int branch_substation(const grid::GridCase& c, const grid::Branch& br)
{
	const int from = c.buses[*c.bus_index(br.from_bus)].substation;
	return from != 0 ? from : c.buses[*c.bus_index(br.to_bus)].substation;
}

class Builder
{
public:
	Builder(OutstationDef& os, const AutogenPolicy& policy) : os_(os), policy_(policy) {}

	void add(PointType type, DeviceType device, const std::string& key, Field field, double size = 0.0)
	{
		auto& next = next_[type];
		if (next > 65535)
			throw MapError(MapError::Kind::Capacity, fmt::format("outstation {}", os_.number),
			               fmt::format("more than 65536 {} points", prefix(type)));
		Point p;
		p.type = type;
		p.index = static_cast<std::uint16_t>(next++);
		p.device = device;
		p.key = key;
		p.field = field;
		if (type == PointType::BinaryInput)
			p.event_class = policy_.binary_class;
		if (type == PointType::AnalogInput) {
			p.event_class = policy_.analog_class;
			p.deadband = field == Field::VPU ? policy_.vpu_deadband : policy_.deadband_fraction * size;
		}
		os_.points.push_back(std::move(p));
	}

	void equipment(DeviceType device, const std::string& key, double size)
	{
		add(PointType::BinaryInput, device, key, Field::STATUS);
		add(PointType::AnalogInput, device, key, Field::MW, size);
		add(PointType::AnalogInput, device, key, Field::MVAR, size);
	}

private:
	OutstationDef& os_;
	const AutogenPolicy& policy_;
	std::map<PointType, std::size_t> next_;
};

} // namespace

PointMap autogen_map(const grid::GridCase& c, const AutogenPolicy& policy)
{
	std::set<int> substations;
	std::map<int, std::string> names;
	for (const auto& b : c.buses) {
		if (b.substation == 0)
			continue;
		substations.insert(b.substation);
		names.emplace(b.substation, b.name);
	}

	std::vector<OutstationDef> defs;
	const double fallback = c.system.base_mva;
	auto sized = [&](double v) { return v > 0.0 ? v : fallback; };
	for (int sub : substations) {
		OutstationDef os;
		os.number = static_cast<std::uint16_t>(sub);
		os.name = names[sub];
		Builder b(os, policy);
		for (const auto& g : c.generators) {
			if (c.buses[*c.bus_index(g.bus)].substation != sub)
				continue;
			b.equipment(DeviceType::Generator, g.id, sized(g.p_max));
			b.add(PointType::AnalogOutput, DeviceType::Generator, g.id, Field::MWSETPOINT);
			b.add(PointType::AnalogOutput, DeviceType::Generator, g.id, Field::VPUSETPOINT);
			b.add(PointType::BinaryOutput, DeviceType::Generator, g.id, Field::STATUS);
		}
		for (const auto& br : c.branches) {
			if (branch_substation(c, br) != sub)
				continue;
			b.equipment(DeviceType::Branch, br.id, sized(br.rating_mva));
			b.add(PointType::BinaryOutput, DeviceType::Branch, br.id, Field::STATUS);
		}
		for (const auto& bus : c.buses) {
			if (bus.substation != sub || !bus.has_load)
				continue;
			const auto key = grid::load_key(bus.id);
			b.equipment(DeviceType::Load, key, sized(std::hypot(bus.load_mw, bus.load_mvar)));
			b.add(PointType::BinaryOutput, DeviceType::Load, key, Field::STATUS);
		}
		for (const auto& bus : c.buses) {
			if (bus.substation != sub || !bus.has_shunt)
				continue;
			const auto key = grid::load_key(bus.id);
			b.equipment(DeviceType::Shunt, key, sized(std::abs(bus.shunt_mvar)));
			b.add(PointType::BinaryOutput, DeviceType::Shunt, key, Field::STATUS);
		}
		for (const auto& bus : c.buses) {
			if (bus.substation != sub)
				continue;
			const auto key = std::to_string(bus.id);
			b.add(PointType::BinaryInput, DeviceType::Bus, key, Field::STATUS);
			b.add(PointType::AnalogInput, DeviceType::Bus, key, Field::VPU);
		}
		defs.push_back(std::move(os));
	}
	return PointMap(std::move(defs), &c);
}

Reading read_point(const grid::GridCase& c, const grid::GridState& s, const Point& p)
{
	Reading r;
	if (p.type == PointType::CounterInput)
		return r;
	const auto idx = c.device_index(p.device, p.key);
	if (!idx) {
		r.online = false;
		return r;
	}
	const auto i = *idx;
	bool status = false;
	bool energized = false;
	double mw = 0.0;
	double mvar = 0.0;
	switch (p.device) {
	case DeviceType::Generator: {
		const auto bus = *c.bus_index(c.generators[i].bus);
		status = s.status.gen_on[i] != 0;
		energized = s.energized[bus] != 0;
		mw = s.gen_p[i];
		mvar = s.gen_q[i];
		if (p.field == Field::MWSETPOINT)
			r.value = s.gen_setpoint[i];
		else if (p.field == Field::VPUSETPOINT)
			r.value = s.gen_vset[i];
		break;
	}
	case DeviceType::Branch: {
		const auto& br = c.branches[i];
		status = s.status.branch_closed[i] != 0;
		energized = s.energized[*c.bus_index(br.from_bus)] || s.energized[*c.bus_index(br.to_bus)];
		mw = s.branch_p[i];
		mvar = s.branch_q[i];
		break;
	}
	case DeviceType::Load:
		status = s.status.load_on[i] != 0;
		energized = s.energized[i] != 0;
		mw = s.load_mw(c, i);
		mvar = s.load_mvar(c, i);
		break;
	case DeviceType::Shunt:
		status = s.status.shunt_on[i] != 0;
		energized = s.energized[i] != 0;
		mvar = s.shunt_mvar(c, i);
		break;
	case DeviceType::Bus:
		status = s.energized[i] != 0;
		energized = status;
		if (p.field == Field::VPU)
			r.value = s.vm[i];
		break;
	}
	switch (p.field) {
	case Field::STATUS:
		r.state = status;
		r.value = status ? 1.0 : 0.0;
		return r; // switch positions stay observable without voltage
	case Field::MW: r.value = mw; break;
	case Field::MVAR: r.value = mvar; break;
	case Field::VPU:
	case Field::MWSETPOINT:
	case Field::VPUSETPOINT: break;
	}
	if (p.type == PointType::AnalogInput)
		r.online = energized;
	return r;
}

} // namespace gridtb::pointmap
