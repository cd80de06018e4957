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

#include "cli.hpp"

#include "gridtb/api/service.hpp"
#include "gridtb/dnp3/framedump.hpp"
#include "gridtb/grid/dispatch.hpp"
#include "gridtb/grid/simulator.hpp"
#include "gridtb/master/master.hpp"
#include "gridtb/outstation/server.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <sstream>
#include <thread>

namespace gridtb::cli {

using nlohmann::json;
using namespace std::chrono_literals;

namespace {

/// Bad flags, files or configs: exit 2.
class ConfigError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

struct HostPort
{
	std::string host;
	std::uint16_t port = 0;
};

HostPort parse_host_port(const std::string& s)
{
	const auto colon = s.rfind(':');
	if (colon == std::string::npos || colon == 0)
		throw ConfigError(fmt::format("'{}' is not HOST:PORT", s));
	HostPort hp;
	hp.host = s.substr(0, colon);
	const auto port = s.substr(colon + 1);
	if (port.empty() || !std::all_of(port.begin(), port.end(), ::isdigit) || std::stoul(port) > 65535)
		throw ConfigError(fmt::format("'{}' has a bad port", s));
	hp.port = static_cast<std::uint16_t>(std::stoul(port));
	return hp;
}

std::string read_text(const std::string& path)
{
	if (path == "-") {
		std::stringstream ss;
		ss << std::cin.rdbuf();
		return ss.str();
	}
	std::ifstream in(path);
	if (!in)
		throw ConfigError("cannot read " + path);
	std::stringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void wait_until(std::atomic<bool>& stop, double duration_s)
{
	const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s);
	while (!stop.load()) {
		if (duration_s > 0 && std::chrono::steady_clock::now() >= end)
			break;
		std::this_thread::sleep_for(50ms);
	}
}

void setup_logging(const std::string& level)
{
	static bool installed = false;
	if (!installed) {
		spdlog::set_default_logger(spdlog::stderr_color_mt("gridtb"));
		installed = true;
	}
	spdlog::set_level(spdlog::level::from_str(level));
}

struct OutstationArgs
{
	std::string case_path;
	std::string map_path;
	std::string bind = "0.0.0.0";
	int port = 20000;
	int tick_ms = 100;
	bool tick_virtual = false;
	int virtual_pause_ms = 1;
	std::string command_log;
	std::string api;
	std::size_t event_capacity = 1024;
	std::size_t max_fragment = 2048;
	double duration_s = 0;
};

int outstation_run(const OutstationArgs& a, std::ostream& out, std::atomic<bool>& stop)
{
	if (a.tick_ms <= 0)
		throw ConfigError("--tick-ms must be positive");
	if (a.max_fragment < 64 || a.max_fragment > 2048)
		throw ConfigError("--max-fragment must be 64..2048");
	if (a.event_capacity == 0)
		throw ConfigError("--event-capacity must be positive");
	std::optional<HostPort> api_at;
	if (!a.api.empty())
		api_at = parse_host_port(a.api);

	auto grid = std::make_shared<const grid::GridCase>(grid::load_case_file(a.case_path));
	const auto map = pointmap::load_map_file(a.map_path, grid.get());
	grid::Simulator sim(grid, a.tick_ms / 1000.0);

	outstation::ServerOptions so;
	so.bind = a.bind;
	so.port = static_cast<std::uint16_t>(a.port);
	so.outstation.event_capacity = a.event_capacity;
	so.outstation.max_fragment = a.max_fragment;
	so.outstation.epoch_ms = static_cast<std::uint64_t>(
	    std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count());
	if (!a.command_log.empty())
		so.command_log_path = a.command_log;

	outstation::Server server(map, sim, so);
	std::unique_ptr<api::ApiServer> service;
	if (api_at) {
		api::ApiOptions ao;
		ao.host = api_at->host;
		ao.port = api_at->port;
		service = std::make_unique<api::ApiServer>(nullptr, &server.command_log(), ao);
	}
	server.start();
	if (service)
		service->start();
	if (a.tick_virtual)
		sim.start_virtual(std::chrono::milliseconds(a.virtual_pause_ms));
	else
		sim.start_realtime();
	out << fmt::format("serving {} outstation(s) on {}:{}\n", map.outstations().size(), a.bind, server.port()) << std::flush;

	wait_until(stop, a.duration_s);
	sim.stop();
	if (service)
		service->stop();
	server.stop();
	server.command_log().flush();
	out << fmt::format("stopped after {:.1f} simulated s, {} command(s) logged\n", sim.snapshot()->state.time_s,
	                   server.command_log().size());
	return kOk;
}

struct MasterRunArgs
{
	std::string config;
	std::string api = "127.0.0.1:8080";
	std::string capture;
	double duration_s = 0;
};

int master_run(const MasterRunArgs& a, std::ostream& out, std::atomic<bool>& stop)
{
	const auto api_at = parse_host_port(a.api);
	master::MasterConfig cfg;
	try {
		cfg = master::load_master_config(a.config);
	} catch (const std::invalid_argument& e) {
		throw ConfigError(e.what());
	}
	if (!a.capture.empty())
		cfg.capture = a.capture;
	if (cfg.sessions.empty())
		spdlog::warn("config {} has no sessions; serving an empty API", a.config);

	master::Master master(cfg);
	api::ApiOptions ao;
	ao.host = api_at.host;
	ao.port = api_at.port;
	api::ApiServer service(&master, nullptr, ao);
	service.start();
	master.start();
	out << fmt::format("{} session(s), API on http://{}:{}\n", cfg.sessions.size(), ao.host, service.port()) << std::flush;
	wait_until(stop, a.duration_s);
	master.stop();
	service.stop();
	return kOk;
}

std::unique_ptr<httplib::Client> api_client(const std::string& api)
{
	const auto at = parse_host_port(api);
	auto c = std::make_unique<httplib::Client>(at.host, at.port);
	c->set_connection_timeout(3, 0);
	c->set_read_timeout(30, 0);
	return c;
}

std::string format_value(const json& t)
{
	const std::string type = t["point"]["type"];
	if (type == "BI" || type == "BO")
		return t["instMag"].get<double>() != 0.0 ? "true" : "false";
	auto s = fmt::format("{}", t["instMag"].get<double>());
	const std::string unit = t.value("unit", "");
	return unit.empty() ? s : s + " " + unit;
}

int master_read(const std::string& api, const std::string& tag, bool as_json, std::ostream& out, std::ostream& err)
{
	auto c = api_client(api);
	auto r = c->Get("/api/tags?prefix=" + httplib::detail::encode_query_param(tag));
	if (!r) {
		err << "cannot reach the master API at " << api << "\n";
		return kRuntime;
	}
	if (r->status != 200) {
		err << "API error " << r->status << ": " << r->body << "\n";
		return kRuntime;
	}
	for (const auto& t : json::parse(r->body)) {
		if (t["name"] != tag)
			continue;
		if (as_json)
			out << t.dump() << "\n";
		else
			out << format_value(t) << " (" << t["validity"].get<std::string>() << ")\n";
		return kOk;
	}
	err << "unknown tag " << tag << "\n";
	return kUsage;
}

struct OperateArgs
{
	std::string api = "127.0.0.1:8080";
	std::string tag;
	bool on = false;
	bool off = false;
	std::optional<double> value;
	bool select_operate = false;
};

int master_operate(const OperateArgs& a, std::ostream& out, std::ostream& err)
{
	api::ControlRequest req;
	req.tag = a.tag;
	req.mode = a.select_operate ? master::OperateMode::SelectOperate : master::OperateMode::Direct;
	if (static_cast<int>(a.on) + static_cast<int>(a.off) + static_cast<int>(a.value.has_value()) != 1)
		throw ConfigError("give exactly one of --on, --off or --value");
	if (a.value) {
		req.action = master::ControlAction::Analog;
		req.value = a.value;
	} else {
		req.action = a.on ? master::ControlAction::LatchOn : master::ControlAction::LatchOff;
	}
	auto c = api_client(a.api);
	auto r = c->Post("/api/control", api::control_request_json(req).dump(), "application/json");
	if (!r) {
		err << "cannot reach the master API at " << a.api << "\n";
		return kRuntime;
	}
	json body = json::object();
	try {
		body = json::parse(r->body);
	} catch (const json::parse_error&) {
	}
	if (r->status == 400 || r->status == 404) {
		err << body.value("error", r->body) << "\n";
		return kUsage;
	}
	if (r->status != 200) {
		err << "control failed (" << r->status << "): " << body.value("error", body.value("detail", r->body)) << "\n";
		return kRuntime;
	}
	const auto status = body["status"].is_string() ? body["status"].get<std::string>() : std::string("NONE");
	out << status << "\n";
	return status == "SUCCESS" ? kOk : kRuntime;
}

int mapgen(const std::string& case_path, const std::string& output, const pointmap::AutogenPolicy& policy,
           std::ostream& out)
{
	const auto c = grid::load_case_file(case_path);
	const auto map = pointmap::autogen_map(c, policy);
	const auto text = pointmap::save_map(map);
	if (output.empty() || output == "-") {
		out << text << "\n";
	} else {
		std::ofstream f(output);
		if (!f)
			throw std::runtime_error("cannot write " + output);
		f << text << "\n";
		spdlog::info("wrote {} outstation(s), {} point(s) to {}", map.outstations().size(), map.point_count(), output);
	}
	return kOk;
}

int framedump(const std::string& capture, std::ostream& out)
{
	const auto text = read_text(capture);
	std::vector<std::string> lines;
	try {
		lines = dnp3::dump_capture(text);
	} catch (const std::invalid_argument& e) {
		throw ConfigError(e.what());
	}
	for (const auto& l : lines)
		out << l << "\n";
	return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::atomic<bool>& stop)
{
	CLI::App app{"gridtb: a simulated grid behind DNP3 outstations, and a polling DNP3 master"};
	app.name("gridtb");
	app.require_subcommand(1);
	app.fallthrough();
	std::string log_level = "info";
	app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
	    ->envname("GW_LOG_LEVEL")
	    ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

	auto* os = app.add_subcommand("outstation", "Simulated outstation server");
	os->require_subcommand(1);
	OutstationArgs oa;
	auto* os_run = os->add_subcommand("run", "Run the simulator and serve its outstations until a signal");
	os_run->add_option("--case", oa.case_path, "Grid case JSON")->required()->envname("GW_CASE");
	os_run->add_option("--map", oa.map_path, "Point map JSON")->required()->envname("GW_MAP");
	os_run->add_option("--bind", oa.bind, "Listen address")->envname("GW_BIND");
	os_run->add_option("--port", oa.port, "DNP3 TCP port (0 = ephemeral)")->envname("GW_PORT")->check(CLI::Range(0, 65535));
	os_run->add_option("--tick-ms", oa.tick_ms, "Simulation tick")->envname("GW_TICK_MS");
	os_run->add_flag("--tick-virtual", oa.tick_virtual, "Tick back to back on a virtual clock")->envname("GW_TICK_VIRTUAL");
	os_run->add_option("--virtual-pause-ms", oa.virtual_pause_ms, "Wall pause between virtual ticks")->check(CLI::Range(0, 10000));
	os_run->add_option("--command-log", oa.command_log, "Append commands to this JSON-lines file")->envname("GW_COMMAND_LOG");
	os_run->add_option("--api", oa.api, "Serve /api/logs on HOST:PORT")->envname("GW_API");
	os_run->add_option("--event-capacity", oa.event_capacity, "Events per class per connection")->envname("GW_EVENT_CAPACITY");
	os_run->add_option("--max-fragment", oa.max_fragment, "Largest response fragment")->envname("GW_MAX_FRAGMENT");
	os_run->add_option("--duration", oa.duration_s, "Stop after this many wall seconds (0 = until a signal)");

	auto* ms = app.add_subcommand("master", "DNP3 master sessions and their API");
	ms->require_subcommand(1);
	MasterRunArgs ma;
	auto* ms_run = ms->add_subcommand("run", "Run the sessions of a config and serve the API");
	ms_run->add_option("--config", ma.config, "Master config JSON")->required()->envname("GW_CONFIG");
	ms_run->add_option("--api", ma.api, "API listen HOST:PORT")->envname("GW_API");
	ms_run->add_option("--capture", ma.capture, "Record all traffic to this capture file")->envname("GW_CAPTURE");
	ms_run->add_option("--duration", ma.duration_s, "Stop after this many wall seconds (0 = until a signal)");

	std::string read_api = "127.0.0.1:8080";
	std::string read_tag;
	bool read_json = false;
	auto* ms_read = ms->add_subcommand("read", "Print one tag from a running master");
	ms_read->add_option("--api", read_api, "Master API HOST:PORT")->envname("GW_API");
	ms_read->add_option("--tag", read_tag, "Tag name")->required()->envname("GW_TAG");
	ms_read->add_flag("--json", read_json, "Print the full tag view");

	OperateArgs opa;
	auto* ms_op = ms->add_subcommand("operate", "Send one control through a running master");
	ms_op->add_option("--api", opa.api, "Master API HOST:PORT")->envname("GW_API");
	ms_op->add_option("--tag", opa.tag, "BO or AO tag name")->required()->envname("GW_TAG");
	auto* on = ms_op->add_flag("--on", opa.on, "LATCH_ON");
	auto* off = ms_op->add_flag("--off", opa.off, "LATCH_OFF");
	auto* value = ms_op->add_option("--value", opa.value, "Analog output value");
	on->excludes(off)->excludes(value);
	off->excludes(value);
	ms_op->add_flag("--select-operate", opa.select_operate, "SELECT then OPERATE instead of DIRECT_OPERATE");

	std::string mg_case;
	std::string mg_out;
	pointmap::AutogenPolicy policy;
	auto* mg = app.add_subcommand("mapgen", "Generate a point map from a grid case");
	mg->add_option("--case", mg_case, "Grid case JSON")->required()->envname("GW_CASE");
	mg->add_option("-o,--output", mg_out, "Output map file (default stdout)");
	mg->add_option("--binary-class", policy.binary_class, "Event class of status points")->check(CLI::Range(0, 3));
	mg->add_option("--analog-class", policy.analog_class, "Event class of analog points")->check(CLI::Range(0, 3));
	mg->add_option("--deadband-fraction", policy.deadband_fraction, "Deadband as a fraction of device size")
	    ->check(CLI::Range(0.0, 1.0));

	std::string capture;
	auto* fd = app.add_subcommand("framedump", "Decode a capture file to one line per frame");
	fd->add_option("--pcapish,capture", capture, "Capture file ('-' for stdin)")->required();

	std::vector<std::string> reversed(args.rbegin(), args.rend());
	try {
		app.parse(reversed);
	} catch (const CLI::CallForHelp& e) {
		app.exit(e, out, err);
		return kOk;
	} catch (const CLI::CallForAllHelp& e) {
		app.exit(e, out, err);
		return kOk;
	} catch (const CLI::ParseError& e) {
		app.exit(e, out, err);
		return kUsage;
	}

	setup_logging(log_level);
	try {
		if (*os_run)
			return outstation_run(oa, out, stop);
		if (*ms_run)
			return master_run(ma, out, stop);
		if (*ms_read)
			return master_read(read_api, read_tag, read_json, out, err);
		if (*ms_op)
			return master_operate(opa, out, err);
		if (*mg)
			return mapgen(mg_case, mg_out, policy, out);
		if (*fd)
			return framedump(capture, out);
	} catch (const ConfigError& e) {
		err << "error: " << e.what() << "\n";
		return kUsage;
	} catch (const grid::CaseError& e) {
		err << "case error: " << e.what() << "\n";
		return kUsage;
	} catch (const pointmap::MapError& e) {
		err << "map error at " << e.where() << ": " << e.what() << "\n";
		return kUsage;
	} catch (const grid::DispatchError& e) {
		err << "case cannot be solved: " << e.what() << "\n";
		return kUsage;
	} catch (const std::invalid_argument& e) {
		err << "error: " << e.what() << "\n";
		return kUsage;
	} catch (const std::exception& e) {
		err << "error: " << e.what() << "\n";
		return kRuntime;
	}
	return kUsage;
}

} // namespace gridtb::cli
