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

#include "gridtb/master/master.hpp"

#include "json.hpp"

#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

namespace gridtb::master {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback)
{
	if (!j.contains(key))
		return fallback;
	try {
		return j.at(key).get<T>();
	} catch (const json::exception&) {
		throw std::invalid_argument(fmt::format("field '{}' has the wrong type", key));
	}
}

} // namespace

MasterConfig parse_master_config(std::string_view text, const std::filesystem::path& base_dir)
{
	json root;
	try {
		root = json::parse(text);
	} catch (const json::parse_error& e) {
		throw std::invalid_argument(fmt::format("master config is not JSON: {}", e.what()));
	}
	if (!root.is_object())
		throw std::invalid_argument("master config must be an object");

	MasterConfig cfg;
	if (root.contains("capture"))
		cfg.capture = base_dir / field<std::string>(root, "capture", "");
	const auto sessions = root.value("sessions", json::array());
	if (!sessions.is_array())
		throw std::invalid_argument("'sessions' must be an array");

	std::set<std::string> names;
	for (const auto& s : sessions) {
		if (!s.is_object())
			throw std::invalid_argument("each session must be an object");
		SessionSpec spec;
		auto& c = spec.config;
		c.name = field<std::string>(s, "name", "");
		c.server_ip = field<std::string>(s, "server_ip", c.server_ip);
		c.server_port = static_cast<std::uint16_t>(field<int>(s, "server_port", c.server_port));
		const int server_addr = field<int>(s, "server_dnp_address", -1);
		const int client_addr = field<int>(s, "client_dnp_address", c.client_dnp_address);
		if (server_addr < 0 || server_addr > 65519 || client_addr < 0 || client_addr > 65519)
			throw std::invalid_argument(fmt::format("session '{}': DNP addresses must be 0..65519", c.name));
		c.server_dnp_address = static_cast<std::uint16_t>(server_addr);
		c.client_dnp_address = static_cast<std::uint16_t>(client_addr);
		c.integrity_poll_period_s = field<double>(s, "integrity_poll_period_s", c.integrity_poll_period_s);
		c.class123_poll_period_s = field<double>(s, "class123_poll_period_s", c.class123_poll_period_s);
		c.poll_timeout_s = field<double>(s, "poll_timeout_s", c.poll_timeout_s);
		c.max_retries = field<int>(s, "max_retries", c.max_retries);
		c.validate();
		if (!names.insert(c.name).second)
			throw std::invalid_argument(fmt::format("duplicate session name '{}'", c.name));

		const auto map_path = field<std::string>(s, "map", "");
		if (map_path.empty())
			throw std::invalid_argument(fmt::format("session '{}': 'map' is required", c.name));
		const auto map = pointmap::load_map_file(base_dir / map_path);
		const auto* def = map.outstation(c.server_dnp_address);
		if (!def)
			throw std::invalid_argument(
			    fmt::format("session '{}': map {} has no outstation {}", c.name, map_path, c.server_dnp_address));
		spec.points = *def;
		cfg.sessions.push_back(std::move(spec));
	}
	return cfg;
}

MasterConfig load_master_config(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw std::invalid_argument("cannot read master config " + path.string());
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_master_config(ss.str(), path.parent_path());
}

Master::Master(const MasterConfig& config, Session::Options options)
{
	if (config.capture && !options.capture)
		options.capture = std::make_shared<CaptureWriter>(*config.capture);
	capture_ = options.capture;
	for (const auto& spec : config.sessions)
		sessions_.push_back(std::make_unique<Session>(spec.config, spec.points, options));
}

Master::~Master() { stop(); }

void Master::start()
{
	for (auto& s : sessions_)
		s->start();
}

void Master::stop()
{
	for (auto& s : sessions_)
		s->stop();
}

Session* Master::find(std::string_view name) const
{
	for (const auto& s : sessions_)
		if (s->name() == name)
			return s.get();
	return nullptr;
}

Session* Master::session_of_tag(std::string_view tag) const
{
	for (const auto& s : sessions_)
		if (s->tags().get(tag))
			return s.get();
	return nullptr;
}

void Master::on_update(const Session::UpdateFn& fn)
{
	for (auto& s : sessions_)
		s->on_update(fn);
}

} // namespace gridtb::master
