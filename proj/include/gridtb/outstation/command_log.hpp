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

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gridtb::outstation {

struct CommandLogEntry
{
	std::uint64_t first_wall_ms = 0;
	std::uint64_t last_wall_ms = 0;
	double sim_time_s = 0.0; // of the latest occurrence
	std::uint16_t source_address = 0;
	std::string peer; // client IP
	std::uint16_t outstation = 0;
	std::string target; // tag name of the point
	std::string command; // "DIRECT_OPERATE LATCH_OFF", "OPERATE ANALOG"
	std::optional<double> value;
	std::string status;
	std::uint64_t count = 1;

	bool same_command(const CommandLogEntry& o) const;
};

/// Append-only command log: JSON lines on disk plus an in-memory ring.
/// Identical repeated commands fold into one entry with a higher count.
class CommandLog
{
public:
	explicit CommandLog(std::size_t ring_capacity = 1000, std::optional<std::filesystem::path> path = std::nullopt);

	void record(CommandLogEntry entry);

	/// Newest first.
	std::vector<CommandLogEntry> page(std::size_t offset, std::size_t limit) const;
	std::size_t size() const;
	void flush();

private:
	mutable std::mutex mutex_;
	std::size_t capacity_;
	std::deque<CommandLogEntry> ring_; // oldest at front
	std::optional<std::ofstream> file_;
};

std::string to_json_line(const CommandLogEntry& e);

} // namespace gridtb::outstation
