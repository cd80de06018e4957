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

#include "gridtb/pointmap/pointmap.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace gridtb::master {

enum class Validity
{
	Good,
	Invalid,
};

const char* to_string(Validity v);

struct TagEntry
{
	std::string name;
	double inst_mag = 0.0;
	std::optional<double> mag; // last event-reported value
	Validity q = Validity::Invalid;
	std::uint8_t flags = 0;
	std::uint64_t timestamp_ms = 0; // wall time of the last update
	pointmap::PointRef point;
	std::string unit;

	bool operator==(const TagEntry&) const = default;
};

/// "MW", "MVAR", "pu" or "" for status and counter points.
const char* unit_hint(pointmap::Field f);

/// Tags of one session, in map order. Many readers, one writer.
class TagDatabase
{
public:
	explicit TagDatabase(const pointmap::OutstationDef& def);

	std::vector<TagEntry> snapshot() const;
	std::optional<TagEntry> get(std::string_view name) const;
	std::size_t size() const { return entries_.size(); }

	/// Writes a polled value. Events also move mag. Returns the entry if it
	/// changed, or nullopt when the point is not in the map.
	std::optional<TagEntry> apply(pointmap::PointType type, std::uint16_t index, double value, std::uint8_t flags,
	                              bool event, std::uint64_t now_ms);
	/// Sets the validity of every tag. Returns the entries that changed.
	std::vector<TagEntry> set_validity(Validity q);

private:
	mutable std::shared_mutex mutex_;
	std::vector<TagEntry> entries_;
	std::map<std::pair<pointmap::PointType, std::uint16_t>, std::size_t> by_point_;
	std::map<std::string, std::size_t, std::less<>> by_name_;
};

} // namespace gridtb::master
