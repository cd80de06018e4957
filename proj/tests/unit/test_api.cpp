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

#include "gridtb/api/service.hpp"
#include "gridtb/outstation/server.hpp"

#include "httplib.h"

#include <atomic>
#include <thread>

using namespace gridtb;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

std::uint16_t dead_port()
{
	net::Listener probe("127.0.0.1", 0);
	return probe.port();
}

struct ApiRig
{
	ApiRig()
		: grid(std::make_shared<const grid::GridCase>(grid::load_case_file("data/cases/glenrose.json"))), sim(grid, 0.1),
		  map(pointmap::load_map_file("data/maps/glenrose_multi.json", grid.get())), server(map, sim, server_options())
	{
		server.start();
		master::MasterConfig cfg;
		for (std::uint16_t os : {560, 561, 562}) {
			master::SessionSpec spec;
			spec.config.name = "PowerWorld_RTAC_" + std::to_string(os);
			spec.config.server_port = os == 562 ? dead_port() : server.port();
			spec.config.server_dnp_address = os;
			spec.config.poll_timeout_s = 0.3;
			spec.points = *map.outstation(os);
			cfg.sessions.push_back(spec);
		}
		master = std::make_unique<master::Master>(cfg);
		api::ApiOptions ao;
		ao.port = 0;
		service = std::make_unique<api::ApiServer>(master.get(), &server.command_log(), ao);
		service->start();
		client = std::make_unique<httplib::Client>("127.0.0.1", service->port());
		client->set_read_timeout(5, 0);
	}

	static outstation::ServerOptions server_options()
	{
		outstation::ServerOptions o;
		o.bind = "127.0.0.1";
		o.port = 0;
		return o;
	}

	json get(const std::string& path, int expect = 200)
	{
		auto r = client->Get(path);
		REQUIRE(r);
		CHECK(r->status == expect);
		return json::parse(r->body);
	}

	std::pair<int, json> post(const json& body)
	{
		auto r = client->Post("/api/control", body.dump(), "application/json");
		REQUIRE(r);
		return {r->status, json::parse(r->body)};
	}

	std::shared_ptr<const grid::GridCase> grid;
	grid::Simulator sim;
	pointmap::PointMap map;
	outstation::Server server;
	std::unique_ptr<master::Master> master;
	std::unique_ptr<api::ApiServer> service;
	std::unique_ptr<httplib::Client> client;
};

} // namespace

TEST_CASE("control request validation")
{
	using api::parse_control_request;
	const auto ok = parse_control_request(json{{"tag", "AO_560_Generator_5262_1_MWSETPOINT"}, {"action", "analog"}, {"value", 1000.0}});
	CHECK(ok.action == master::ControlAction::Analog);
	CHECK(*ok.value == 1000.0);
	CHECK(ok.mode == master::OperateMode::Direct);
	CHECK(api::control_request_json(ok) ==
	      json{{"tag", "AO_560_Generator_5262_1_MWSETPOINT"}, {"action", "analog"}, {"value", 1000.0}, {"mode", "direct"}});
	const auto off = parse_control_request(json{{"tag", "x"}, {"action", "latch_off"}, {"mode", "select_operate"}});
	CHECK(off.mode == master::OperateMode::SelectOperate);
	CHECK(api::parse_control_request(api::control_request_json(off)).tag == "x");

	CHECK_THROWS_AS(parse_control_request(json{{"tag", "x"}, {"action", "analog"}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json{{"tag", "x"}, {"action", "analog"}, {"value", "1"}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json{{"tag", "x"}, {"action", "latch_on"}, {"value", 1}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json{{"tag", "x"}, {"action", "toggle"}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json{{"action", "latch_on"}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json{{"tag", "x"}, {"action", "latch_on"}, {"mode", "fast"}}), std::invalid_argument);
	CHECK_THROWS_AS(parse_control_request(json::array()), std::invalid_argument);
}

TEST_CASE("tag view serialization")
{
	master::TagEntry t;
	t.name = "AI_560_Branch_5047_5260_1_MVAR";
	t.inst_mag = -127.5;
	t.q = master::Validity::Good;
	t.point = {560, pointmap::PointType::AnalogInput, 3};
	t.unit = "MVAR";
	const auto j = api::tag_view(t);
	CHECK(j["validity"] == "good");
	CHECK(j["mag"].is_null());
	CHECK(j["point"]["type"] == "AI");
	CHECK(j["point"]["index"] == 3);
	CHECK(j["instMag"] == -127.5);
	t.mag = 3.0;
	CHECK(api::tag_view(t)["mag"] == 3.0);
}

TEST_CASE("sessions, tags and logs endpoints")
{
	ApiRig rig;
	REQUIRE(rig.master->find("PowerWorld_RTAC_560")->poll_integrity());

	auto sessions = rig.get("/api/sessions");
	REQUIRE(sessions.size() == 3);
	CHECK(sessions[0]["name"] == "PowerWorld_RTAC_560");
	CHECK(sessions[0]["health"]["Offline"] == false);
	CHECK(sessions[0]["health"]["Message_Sent_Count"] == 1);
	CHECK(sessions[1]["health"]["Offline"] == true);
	rig.get("/api/sessions/nope", 404);
	CHECK(rig.get("/api/sessions/PowerWorld_RTAC_560")["messages"].size() >= 1);

	const auto t0 = std::chrono::steady_clock::now();
	auto tags = rig.get("/api/tags?session=PowerWorld_RTAC_560&prefix=AI_560");
	CHECK(std::chrono::steady_clock::now() - t0 < 100ms);
	REQUIRE(tags.size() == 4);
	for (const auto& t : tags) {
		CHECK(t["point"]["type"] == "AI");
		CHECK(t["validity"] == "good");
	}
	CHECK(rig.get("/api/tags?session=PowerWorld_RTAC_560&prefix=ZZ").empty());
	CHECK(rig.get("/api/tags").size() == 30);
	rig.get("/api/tags?session=nope", 404);

	auto logs = rig.get("/api/logs");
	CHECK(logs["commands"].empty());
	CHECK(logs["colocated"] == true);
	rig.get("/api/logs?limit=x", 400);
}

TEST_CASE("control endpoint statuses")
{
	ApiRig rig;
	auto* s = rig.master->find("PowerWorld_RTAC_560");
	REQUIRE(s->poll_integrity());

	const json open{{"tag", "BO_560_Branch_5047_5260_1_STATUS"}, {"action", "latch_off"}};
	auto [code, body] = rig.post(open);
	CHECK(code == 200);
	CHECK(body["status"] == "SUCCESS");
	std::tie(code, body) = rig.post(open);
	CHECK(body["status"] == "SUCCESS");

	auto logs = rig.get("/api/logs");
	REQUIRE(logs["commands"].size() == 1);
	CHECK(logs["commands"][0]["count"] == 2);
	CHECK(logs["commands"][0]["target"] == "BO_560_Branch_5047_5260_1_STATUS");
	CHECK(rig.get("/api/logs?offset=5")["commands"].empty());

	CHECK(rig.post(json{{"tag", "AO_560_Generator_5262_1_MWSETPOINT"}, {"action", "analog"}}).first == 400);
	CHECK(rig.post(json{{"tag", "BI_560_Generator_5262_1_STATUS"}, {"action", "latch_on"}}).first == 400);
	CHECK(rig.post(json{{"tag", "AO_560_Generator_5262_1_MWSETPOINT"}, {"action", "latch_on"}}).first == 400);
	CHECK(rig.post(json{{"tag", "BO_999_Nothing_STATUS"}, {"action", "latch_on"}}).first == 404);
	CHECK(rig.post(json{{"tag", "BO_562_Load_5261_1_STATUS"}, {"action", "latch_off"}}).first == 409);
	auto raw = rig.client->Post("/api/control", "{nope", "application/json");
	CHECK(raw->status == 400);

	const auto before = rig.server.command_log().size();
	std::tie(code, body) = rig.post(json{{"tag", "AO_560_Generator_5262_1_MWSETPOINT"}, {"action", "analog"}, {"value", 1000.0},
	                                     {"mode", "select_operate"}});
	CHECK(code == 200);
	CHECK(body["status"] == "SUCCESS");
	CHECK(rig.server.command_log().size() == before + 1);

	rig.server.stop();
	std::tie(code, body) = rig.post(open);
	CHECK(code == 502);
}

TEST_CASE("stream pushes tag deltas")
{
	ApiRig rig;
	std::atomic<bool> stop{false};
	std::mutex m;
	std::string received;
	std::thread reader([&] {
		httplib::Client c("127.0.0.1", rig.service->port());
		c.set_read_timeout(5, 0);
		c.Get("/api/stream?session=PowerWorld_RTAC_560", [&](const char* data, std::size_t len) {
			std::lock_guard lock(m);
			received.append(data, len);
			return !stop.load();
		});
	});
	for (int i = 0; i < 100 && rig.service->hub().subscribers() == 0; ++i)
		std::this_thread::sleep_for(10ms);
	REQUIRE(rig.service->hub().subscribers() == 1);
	REQUIRE(rig.master->find("PowerWorld_RTAC_560")->poll_integrity());
	REQUIRE(rig.master->find("PowerWorld_RTAC_561")->poll_integrity()); // filtered out
	for (int i = 0; i < 100; ++i) {
		{
			std::lock_guard lock(m);
			if (received.find("\n\n") != std::string::npos)
				break;
		}
		std::this_thread::sleep_for(10ms);
	}
	stop = true;
	rig.service->stop();
	reader.join();
	std::lock_guard lock(m);
	const auto start = received.find("data: ");
	REQUIRE(start != std::string::npos);
	const auto end = received.find("\n\n", start);
	const auto msg = json::parse(received.substr(start + 6, end - start - 6));
	CHECK(msg["session"] == "PowerWorld_RTAC_560");
	CHECK(msg["tags"].size() == 9);
	CHECK(received.find("PowerWorld_RTAC_561") == std::string::npos);
}

TEST_CASE("slow stream subscribers are dropped")
{
	api::StreamHub hub(2);
	auto sub = hub.subscribe(std::nullopt);
	master::TagEntry t;
	t.name = "x";
	hub.publish("s", {t});
	hub.publish("s", {t});
	CHECK(hub.subscribers() == 1);
	hub.publish("s", {t});
	CHECK(hub.subscribers() == 0);
	CHECK(sub->dropped);
}
