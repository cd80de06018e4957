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

#include "doctest.h"

#include "gridtb/master/master.hpp"
#include "gridtb/outstation/server.hpp"
#include "support/wire_support.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

using namespace gridtb;
using namespace gridtb::master;
using namespace std::chrono_literals;
using dnp3::CommandStatus;

namespace {

struct Rig
{
	Rig()
		: grid(std::make_shared<const grid::GridCase>(grid::load_case_file("data/cases/glenrose.json"))), sim(grid, 0.1),
		  map(pointmap::load_map_file("data/maps/glenrose_multi.json", grid.get())), server(map, sim, server_options())
	{
		server.start();
	}

	static outstation::ServerOptions server_options()
	{
		outstation::ServerOptions o;
		o.bind = "127.0.0.1";
		o.port = 0;
		return o;
	}

	SessionConfig config(std::uint16_t os, std::uint16_t port = 0) const
	{
		SessionConfig c;
		c.name = "PowerWorld_RTAC_" + std::to_string(os);
		c.server_port = port ? port : server.port();
		c.server_dnp_address = os;
		c.client_dnp_address = 1;
		c.integrity_poll_period_s = 60;
		c.class123_poll_period_s = 2;
		c.poll_timeout_s = 0.3;
		c.max_retries = 3;
		return c;
	}

	std::unique_ptr<Session> session(std::uint16_t os, std::uint16_t port = 0) const
	{
		Session::Options o;
		o.backoff_initial = 20ms;
		o.backoff_cap = 100ms;
		return std::make_unique<Session>(config(os, port), *map.outstation(os), o);
	}

	std::shared_ptr<const grid::GridCase> grid;
	grid::Simulator sim;
	pointmap::PointMap map;
	outstation::Server server;
};

double tag(const Session& s, const std::string& name) { return s.tags().get(name).value().inst_mag; }

void check_counters(const SessionHealth& h)
{
	CHECK(h.message_success_count + h.message_failure_count <= h.message_sent_count);
}

} // namespace

TEST_CASE("session config validation")
{
	SessionConfig c;
	c.name = "x";
	c.server_dnp_address = 560;
	CHECK_NOTHROW(c.validate());
	auto bad = [](auto mutate) {
		SessionConfig c;
		c.name = "x";
		mutate(c);
		CHECK_THROWS_AS(c.validate(), std::invalid_argument);
	};
	bad([](SessionConfig& c) { c.name.clear(); });
	bad([](SessionConfig& c) { c.integrity_poll_period_s = 0; });
	bad([](SessionConfig& c) { c.class123_poll_period_s = -1; });
	bad([](SessionConfig& c) { c.poll_timeout_s = 60; });
	bad([](SessionConfig& c) { c.server_dnp_address = 65520; });
	bad([](SessionConfig& c) { c.client_dnp_address = 65535; });
	bad([](SessionConfig& c) { c.max_retries = 0; });
}

TEST_CASE("master config parsing")
{
	const auto dir = std::filesystem::temp_directory_path() / "gridtb_master_cfg";
	std::filesystem::create_directories(dir);
	const auto map = std::filesystem::absolute("data/maps/glenrose_multi.json").string();

	const std::string good = R"({"sessions": [
		{"name": "PowerWorld_RTAC_560", "server_ip": "172.168.2.10", "server_dnp_address": 560, "map": ")" + map + R"("},
		{"name": "PowerWorld_RTAC_561", "server_dnp_address": 561, "client_dnp_address": 2, "poll_timeout_s": 1, "map": ")" + map + R"("}]})";
	const auto cfg = parse_master_config(good, dir);
	REQUIRE(cfg.sessions.size() == 2);
	CHECK(cfg.sessions[0].config.server_ip == "172.168.2.10");
	CHECK(cfg.sessions[0].config.server_port == 20000);
	CHECK(cfg.sessions[0].config.integrity_poll_period_s == 60.0);
	CHECK(cfg.sessions[0].config.class123_poll_period_s == 2.0);
	CHECK(cfg.sessions[0].config.poll_timeout_s == 5.0);
	CHECK(cfg.sessions[0].config.max_retries == 3);
	CHECK(cfg.sessions[0].points.number == 560);
	CHECK(cfg.sessions[1].config.client_dnp_address == 2);

	const std::string dup = R"({"sessions": [
		{"name": "a", "server_dnp_address": 560, "map": ")" + map + R"("},
		{"name": "a", "server_dnp_address": 561, "map": ")" + map + R"("}]})";
	CHECK_THROWS_AS(parse_master_config(dup, dir), std::invalid_argument);
	CHECK_THROWS_AS(parse_master_config(R"({"sessions": [{"name": "a", "server_dnp_address": 999, "map": ")" + map + R"("}]})", dir),
	                std::invalid_argument);
	CHECK_THROWS_AS(parse_master_config(R"({"sessions": [{"name": "a", "server_dnp_address": 560}]})", dir), std::invalid_argument);
	CHECK_THROWS_AS(parse_master_config("[1,", dir), std::invalid_argument);
	CHECK(parse_master_config("{}", dir).sessions.empty());
}

TEST_CASE("integrity poll fills the tag database with simulator values")
{
	Rig rig;
	auto s = rig.session(560);
	CHECK(s->health().offline);
	for (const auto& t : s->tags().snapshot())
		CHECK(t.q == Validity::Invalid);

	REQUIRE(s->poll_integrity());
	const auto h = s->health();
	CHECK_FALSE(h.offline);
	CHECK(h.message_sent_count == 1);
	CHECK(h.message_received_count == 1);
	CHECK(h.message_success_count == 1);

	const auto snap = rig.sim.snapshot();
	const auto& def = *rig.map.outstation(560);
	for (const auto& t : s->tags().snapshot()) {
		CHECK(t.q == Validity::Good);
		const auto* p = rig.map.resolve(t.point);
		REQUIRE(p);
		CHECK(t.name == pointmap::tag_name(*p, def));
		const auto reading = pointmap::read_point(*rig.grid, snap->state, *p);
		if (p->type == pointmap::PointType::AnalogInput)
			CHECK(t.inst_mag == static_cast<double>(static_cast<float>(reading.value)));
		else if (p->type == pointmap::PointType::AnalogOutput)
			CHECK(t.inst_mag == std::round(reading.value));
		else
			CHECK(t.inst_mag == (reading.state ? 1.0 : 0.0));
		CHECK_FALSE(t.mag);
	}
	CHECK(s->tags().get("AI_560_Branch_5047_5260_1_MVAR")->point.index == 3);
	CHECK(s->tags().get("AI_560_Branch_5047_5260_1_MVAR")->unit == "MVAR");
}

TEST_CASE("breaker control feeds back through events")
{
	Rig rig;
	auto s = rig.session(560);
	REQUIRE(s->poll_integrity());
	const auto r = s->operate_tag("BO_560_Branch_5047_5260_1_STATUS", ControlAction::LatchOff, std::nullopt);
	CHECK(r.success());
	rig.sim.advance(1);
	REQUIRE(s->poll_class());
	const auto bi = s->tags().get("BI_560_Branch_5047_5260_1_STATUS").value();
	CHECK(bi.inst_mag == 0.0);
	CHECK(bi.mag == 0.0);
	CHECK(tag(*s, "AI_560_Branch_5047_5260_1_MW") == 0.0);
	CHECK(tag(*s, "AI_560_Branch_5047_5260_1_MVAR") == 0.0);
	// events were confirmed, so the next poll brings nothing new
	const auto before = s->health().message_received_count;
	REQUIRE(s->poll_class());
	CHECK(s->health().message_received_count == before + 1);

	const auto log = rig.server.command_log().page(0, 10);
	REQUIRE(log.size() == 1);
	CHECK(log[0].source_address == 1);
	CHECK(log[0].status == "SUCCESS");
	check_counters(s->health());
}

TEST_CASE("select-operate takes two exchanges and local type errors send nothing")
{
	Rig rig;
	auto s = rig.session(561);
	REQUIRE(s->poll_integrity());
	auto h0 = s->health();
	const auto r = s->operate_tag("AO_561_Generator_5263_1_VPUSETPOINT", ControlAction::Analog, 0.98, OperateMode::SelectOperate);
	CHECK(r.success());
	auto h1 = s->health();
	CHECK(h1.message_sent_count == h0.message_sent_count + 2);
	CHECK(h1.message_received_count == h0.message_received_count + 2);
	rig.sim.advance(1);
	REQUIRE(s->poll_integrity());
	CHECK(tag(*s, "AI_561_Bus_5263_VPU") == doctest::Approx(0.98).epsilon(1e-6));
	const auto sent = s->health().message_sent_count;

	CHECK_THROWS_AS(s->operate_tag("BI_561_Generator_5263_1_STATUS", ControlAction::LatchOff, std::nullopt), ControlError);
	CHECK_THROWS_AS(s->operate_tag("AO_561_Generator_5263_1_MWSETPOINT", ControlAction::Analog, std::nullopt), ControlError);
	CHECK_THROWS_AS(s->operate_tag("AO_561_Generator_5263_1_MWSETPOINT", ControlAction::LatchOn, std::nullopt), ControlError);
	CHECK_THROWS_AS(s->operate_tag("nope", ControlAction::LatchOn, std::nullopt), ControlError);
	CHECK(s->health().message_sent_count == sent);

	const auto bad = s->operate_binary(40, false);
	CHECK(bad.wire_ok);
	CHECK(bad.status == CommandStatus::NotSupported);

	// a setpoint beyond Pmax succeeds and is clamped by the simulator
	const auto big = s->operate_analog(0, 5000.0);
	CHECK(big.success());
	rig.sim.advance(1);
	CHECK(rig.sim.snapshot()->state.gen_setpoint[*rig.grid->generator_index("5263_1")] == 1300.0);
}

TEST_CASE("offline after max_retries failures and recovery after restart")
{
	Rig rig;
	auto s = rig.session(562);
	REQUIRE(s->poll_integrity());
	CHECK_FALSE(s->health().offline);

	rig.server.stop();
	for (int i = 1; i <= 3; ++i) {
		CHECK(s->health().offline == false);
		// failures during the backoff window make no attempt
		while (!s->poll_class()) {
			if (s->health().consecutive_failures >= i)
				break;
			std::this_thread::sleep_for(5ms);
		}
		CHECK(s->health().consecutive_failures == i);
	}
	CHECK(s->health().offline);
	for (const auto& t : s->tags().snapshot())
		CHECK(t.q == Validity::Invalid);
	check_counters(s->health());

	rig.server.start();
	bool ok = false;
	for (int i = 0; i < 50 && !ok; ++i) {
		ok = s->poll_integrity();
		if (!ok)
			std::this_thread::sleep_for(20ms);
	}
	REQUIRE(ok);
	CHECK_FALSE(s->health().offline);
	for (const auto& t : s->tags().snapshot())
		CHECK(t.q == Validity::Good);
}

TEST_CASE("timeouts through a silent link count as sent failures")
{
	Rig rig;
	wire::Proxy proxy(rig.server.port());
	auto s = rig.session(560, proxy.port());
	REQUIRE(s->poll_integrity());
	proxy.silence(true);
	const auto h0 = s->health();
	for (int i = 0; i < 3; ++i)
		CHECK_FALSE(s->poll_class());
	const auto h = s->health();
	CHECK(h.offline);
	CHECK(h.message_failure_count == h0.message_failure_count + 3);
	CHECK(h.message_sent_count == h0.message_sent_count + 3);
	check_counters(h);
	proxy.silence(false);
	REQUIRE(s->poll_integrity());
	CHECK_FALSE(s->health().offline);
}

TEST_CASE("unreachable server leaves the session offline without crashing")
{
	std::uint16_t port = 0;
	{
		net::Listener probe("127.0.0.1", 0);
		port = probe.port();
	}
	Rig rig;
	auto s = rig.session(560, port);
	s->start();
	std::this_thread::sleep_for(400ms);
	s->stop();
	const auto h = s->health();
	CHECK(h.offline);
	CHECK(h.consecutive_failures >= 3);
	CHECK(h.message_sent_count == 0);
	for (const auto& t : s->tags().snapshot())
		CHECK(t.q == Validity::Invalid);
}

TEST_CASE("scheduler polls at its periods and pushes deltas")
{
	Rig rig;
	auto cfg = rig.config(560);
	cfg.integrity_poll_period_s = 0.5;
	cfg.class123_poll_period_s = 0.05;
	cfg.poll_timeout_s = 0.2;
	Session s(cfg, *rig.map.outstation(560));
	std::mutex m;
	std::vector<double> mw;
	s.on_update([&](const std::string& name, const std::vector<TagEntry>& changed) {
		CHECK(name == "PowerWorld_RTAC_560");
		std::lock_guard lock(m);
		for (const auto& t : changed)
			if (t.name == "AI_560_Generator_5262_1_MW")
				mw.push_back(t.inst_mag);
	});
	rig.sim.start_virtual(5ms);
	s.start();
	std::this_thread::sleep_for(150ms);
	REQUIRE(s.operate_tag("AO_560_Generator_5262_1_MWSETPOINT", ControlAction::Analog, 1000.0).success());
	std::this_thread::sleep_for(1200ms);
	s.stop();
	rig.sim.stop();
	const auto h = s.health();
	CHECK_FALSE(h.offline);
	CHECK(h.message_success_count >= 10);
	check_counters(h);
	std::lock_guard lock(m);
	REQUIRE(mw.size() >= 3);
	CHECK(mw.front() == doctest::Approx(1211.0));
	for (std::size_t i = 1; i < mw.size(); ++i)
		CHECK(mw[i] <= mw[i - 1] + 0.5); // events carry whole MW
}

TEST_CASE("capture file records both directions")
{
	Rig rig;
	const auto path = std::filesystem::temp_directory_path() / "gridtb_capture_test.txt";
	Session::Options o;
	o.capture = std::make_shared<CaptureWriter>(path);
	Session s(rig.config(560), *rig.map.outstation(560), o);
	REQUIRE(s.poll_integrity());
	std::ifstream in(path);
	std::stringstream ss;
	ss << in.rdbuf();
	const auto lines = dnp3::dump_capture(ss.str());
	REQUIRE(lines.size() >= 2);
	CHECK(lines[0].find("READ") != std::string::npos);
	CHECK(lines[0].find("g60") != std::string::npos);
	CHECK(lines[1].find("RESPONSE") != std::string::npos);
}
