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

#include "gridtb/master/tags.hpp"

#include <mutex>

namespace gridtb::master {

const char* to_string(Validity v) { return v == Validity::Good ? "good" : "invalid"; }

const char* unit_hint(pointmap::Field f)
{
	switch (f) {
	case pointmap::Field::MW:
	case pointmap::Field::MWSETPOINT: return "MW";
	case pointmap::Field::MVAR: return "MVAR";
	case pointmap::Field::VPU:
	case pointmap::Field::VPUSETPOINT: return "pu";
	case pointmap::Field::STATUS: return "";
	}
	return "";
}

TagDatabase::TagDatabase(const pointmap::OutstationDef& def)
{
	for (const auto& p : def.points) {
		TagEntry e;
		e.name = pointmap::tag_name(p, def);
		e.point = pointmap::PointRef{def.number, p.type, p.index};
		e.unit = p.type == pointmap::PointType::CounterInput ? "" : unit_hint(p.field);
		by_point_[{p.type, p.index}] = entries_.size();
		by_name_[e.name] = entries_.size();
		entries_.push_back(std::move(e));
	}
}

std::vector<TagEntry> TagDatabase::snapshot() const
{
	std::shared_lock lock(mutex_);
	return entries_;
}

std::optional<TagEntry> TagDatabase::get(std::string_view name) const
{
	std::shared_lock lock(mutex_);
	auto it = by_name_.find(name);
	if (it == by_name_.end())
		return std::nullopt;
	return entries_[it->second];
}

std::optional<TagEntry> TagDatabase::apply(pointmap::PointType type, std::uint16_t index, double value, std::uint8_t flags,
                                           bool event, std::uint64_t now_ms)
{
	std::unique_lock lock(mutex_);
	auto it = by_point_.find({type, index});
	if (it == by_point_.end())
		return std::nullopt;
	auto& e = entries_[it->second];
	e.inst_mag = value;
	if (event)
		e.mag = value;
	e.flags = flags;
	e.q = Validity::Good;
	e.timestamp_ms = now_ms;
	return e;
}

std::vector<TagEntry> TagDatabase::set_validity(Validity q)
{
	std::unique_lock lock(mutex_);
	std::vector<TagEntry> changed;
	for (auto& e : entries_) {
		if (e.q != q) {
			e.q = q;
			changed.push_back(e);
		}
	}
	return changed;
}

} // namespace gridtb::master
