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

#include "gridtb/outstation/command_log.hpp"

#include "json.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

namespace gridtb::outstation {

bool CommandLogEntry::same_command(const CommandLogEntry& o) const
{
	return source_address == o.source_address && peer == o.peer && outstation == o.outstation && target == o.target &&
	       command == o.command && value == o.value && status == o.status;
}

std::string to_json_line(const CommandLogEntry& e)
{
	nlohmann::ordered_json j;
	j["first_wall_ms"] = e.first_wall_ms;
	j["last_wall_ms"] = e.last_wall_ms;
	j["sim_time_s"] = e.sim_time_s;
	j["source_address"] = e.source_address;
	j["peer"] = e.peer;
	j["outstation"] = e.outstation;
	j["target"] = e.target;
	j["command"] = e.command;
	j["value"] = e.value ? nlohmann::ordered_json(*e.value) : nlohmann::ordered_json(nullptr);
	j["status"] = e.status;
	j["count"] = e.count;
	return j.dump();
}

CommandLog::CommandLog(std::size_t ring_capacity, std::optional<std::filesystem::path> path)
	: capacity_(std::max<std::size_t>(1, ring_capacity))
{
	if (path) {
		file_.emplace(*path, std::ios::app);
		if (!*file_)
			throw std::runtime_error("cannot open command log " + path->string());
	}
}

void CommandLog::record(CommandLogEntry entry)
{
	std::lock_guard lock(mutex_);
	auto it = std::find_if(ring_.begin(), ring_.end(), [&](const CommandLogEntry& e) { return e.same_command(entry); });
	if (it != ring_.end()) {
		entry.count = it->count + 1;
		entry.first_wall_ms = it->first_wall_ms;
		ring_.erase(it);
	}
	ring_.push_back(entry);
	while (ring_.size() > capacity_)
		ring_.pop_front();
	if (file_) {
		*file_ << to_json_line(entry) << '\n';
		file_->flush();
	}
}

std::vector<CommandLogEntry> CommandLog::page(std::size_t offset, std::size_t limit) const
{
	std::lock_guard lock(mutex_);
	std::vector<CommandLogEntry> out;
	for (auto it = ring_.rbegin(); it != ring_.rend() && out.size() < limit; ++it) {
		if (offset > 0) {
			--offset;
			continue;
		}
		out.push_back(*it);
	}
	return out;
}

std::size_t CommandLog::size() const
{
	std::lock_guard lock(mutex_);
	return ring_.size();
}

void CommandLog::flush()
{
	std::lock_guard lock(mutex_);
	if (file_)
		file_->flush();
}

} // namespace gridtb::outstation
