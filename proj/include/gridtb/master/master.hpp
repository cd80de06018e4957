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

#include "gridtb/master/session.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridtb::master {

struct SessionSpec
{
	SessionConfig config;
	pointmap::OutstationDef points;
};

struct MasterConfig
{
	std::vector<SessionSpec> sessions;
	std::optional<std::filesystem::path> capture;
};

/// Parses a master config. Map paths are resolved against `base_dir`.
/// Throws std::invalid_argument on schema errors and duplicate names.
MasterConfig parse_master_config(std::string_view text, const std::filesystem::path& base_dir);
MasterConfig load_master_config(const std::filesystem::path& path);

/// All sessions of one master process.
class Master
{
public:
	explicit Master(const MasterConfig& config, Session::Options options = {});
	~Master();

	Master(const Master&) = delete;
	Master& operator=(const Master&) = delete;

	void start();
	void stop();

	const std::vector<std::unique_ptr<Session>>& sessions() const { return sessions_; }
	Session* find(std::string_view name) const;
	/// Session holding a tag, searched in config order.
	Session* session_of_tag(std::string_view tag) const;

	/// Registers a tag delta callback on every session. Call before start().
	void on_update(const Session::UpdateFn& fn);

private:
	std::shared_ptr<CaptureWriter> capture_;
	std::vector<std::unique_ptr<Session>> sessions_;
};

} // namespace gridtb::master
