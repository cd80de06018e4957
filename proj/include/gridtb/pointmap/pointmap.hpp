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
#include "gridtb/grid/state.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace gridtb::pointmap {

using grid::DeviceType;

enum class PointType
{
	BinaryInput,
	AnalogInput,
	CounterInput,
	BinaryOutput,
	AnalogOutput,
};

/// "BI", "AI", "CI", "BO", "AO".
const char* prefix(PointType t);
std::optional<PointType> point_type_from_prefix(std::string_view s);
inline bool is_input(PointType t) { return t == PointType::BinaryInput || t == PointType::AnalogInput || t == PointType::CounterInput; }

enum class Field
{
	STATUS,
	MW,
	MVAR,
	VPU,
	MWSETPOINT,
	VPUSETPOINT,
};

const char* to_string(Field f);
std::optional<Field> field_from_string(std::string_view s);

/// Whether `field` may be bound for this point type and device type.
bool is_legal(PointType type, DeviceType device, Field field);

struct Point
{
	PointType type = PointType::BinaryInput;
	std::uint16_t index = 0;
	DeviceType device = DeviceType::Generator;
	std::string key; // device keyfield: "5262_1", "5047_5260_1", "5261_1", "5260"
	Field field = Field::STATUS;
	int event_class = 0; // 0 = static only
	double deadband = 0.0;

	bool operator==(const Point&) const = default;
};

struct OutstationDef
{
	std::uint16_t number = 0;
	std::string name;
	std::vector<Point> points;

	/// Points of one type, ordered by index.
	std::vector<const Point*> of_type(PointType t) const;
	const Point* find(PointType t, std::uint16_t index) const;
	std::size_t count(PointType t) const;

	bool operator==(const OutstationDef&) const = default;
};

/// {AI|AO|BI|BO|CI}_{outstation}_{DeviceType}_{key}_{field}
std::string tag_name(const Point& p, const OutstationDef& os);
std::string tag_name(const Point& p, std::uint16_t outstation);

/// Coordinates of a point in a map.
struct PointRef
{
	std::uint16_t outstation = 0;
	PointType type = PointType::BinaryInput;
	std::uint16_t index = 0;

	auto operator<=>(const PointRef&) const = default;
};

class MapError : public std::runtime_error
{
public:
	enum class Kind
	{
		Schema,
		Duplicate,
		Illegal,
		UnknownDevice,
		NonContiguous,
		Capacity,
	};
	MapError(Kind kind, std::string where, const std::string& message);
	Kind kind() const { return kind_; }
	const std::string& where() const { return where_; }

private:
	Kind kind_;
	std::string where_;
};

class PointMap
{
public:
	PointMap() = default;
	/// Validates and indexes. Throws MapError. When `grid` is given every
	/// device reference is checked against it.
	explicit PointMap(std::vector<OutstationDef> outstations, const grid::GridCase* grid = nullptr);

	const std::vector<OutstationDef>& outstations() const { return outstations_; }
	const OutstationDef* outstation(std::uint16_t number) const;

	const Point* resolve(const PointRef& ref) const;
	std::optional<PointRef> resolve(std::string_view tag) const;
	std::size_t point_count() const;

	bool operator==(const PointMap& o) const { return outstations_ == o.outstations_; }

private:
	std::vector<OutstationDef> outstations_;
	std::map<std::string, PointRef, std::less<>> by_tag_;
};

PointMap parse_map(std::string_view text, const grid::GridCase* grid = nullptr);
PointMap load_map_file(const std::filesystem::path& path, const grid::GridCase* grid = nullptr);
std::string save_map(const PointMap& map);

struct AutogenPolicy
{
	int binary_class = 1;
	int analog_class = 2;
	double deadband_fraction = 0.02; // of gen P_max, branch rating, load/shunt size
	double vpu_deadband = 0.005;
};

/// One outstation per substation (external substation 0 skipped); devices in
/// declaration order: generators, branches, loads, shunts, buses.
PointMap autogen_map(const grid::GridCase& c, const AutogenPolicy& policy = {});

/// Live value of a point in a solved state.
struct Reading
{
	double value = 0.0; // analog engineering value, or 0/1 for binary
	bool state = false; // binary value
	bool online = true;
};

Reading read_point(const grid::GridCase& c, const grid::GridState& s, const Point& p);

} // namespace gridtb::pointmap
