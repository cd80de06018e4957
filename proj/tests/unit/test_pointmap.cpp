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

#include "gridtb/grid/state.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <set>

using namespace gridtb;
using namespace gridtb::pointmap;

namespace {

grid::GridCase glenrose() { return grid::load_case_file("data/cases/glenrose.json"); }
grid::GridCase twobus() { return grid::load_case_file("data/cases/twobus.json"); }

std::string one_point_map(const std::string& point)
{
	return R"({"outstations": [{"number": 7, "points": [)" + point + "]}]}";
}

MapError::Kind error_kind(const std::string& text, const grid::GridCase* c = nullptr)
{
	try {
		parse_map(text, c);
	} catch (const MapError& e) {
		return e.kind();
	}
	FAIL("map parsed");
	return MapError::Kind::Schema;
}

} // namespace

TEST_CASE("pointmap: substation 560 map parses and round-trips")
{
	const auto c = glenrose();
	const auto m = load_map_file("data/maps/glenrose_560.json", &c);
	REQUIRE(m.outstations().size() == 1);
	const auto& os = m.outstations()[0];
	CHECK(os.number == 560);
	CHECK(os.count(PointType::BinaryInput) == 2);
	CHECK(os.count(PointType::AnalogInput) == 4);
	CHECK(os.count(PointType::AnalogOutput) == 1);
	CHECK(os.count(PointType::BinaryOutput) == 2);

	const auto ref = m.resolve("AI_560_Branch_5047_5260_1_MVAR");
	REQUIRE(ref);
	CHECK(ref->type == PointType::AnalogInput);
	CHECK(ref->index == 3);
	CHECK(m.resolve("BO_560_Generator_5262_1_STATUS")->index == 0);
	CHECK(m.resolve("AO_560_Generator_5262_1_MWSETPOINT")->index == 0);
	CHECK_FALSE(m.resolve("AI_561_Branch_5047_5260_1_MVAR"));

	const auto again = parse_map(save_map(m), &c);
	CHECK(again == m);
	CHECK(save_map(again) == save_map(m));
}

TEST_CASE("pointmap: tag names follow the naming pattern")
{
	Point p{PointType::AnalogInput, 3, grid::DeviceType::Branch, "5047_5260_1", Field::MVAR, 2, 1.0};
	CHECK(tag_name(p, 560) == "AI_560_Branch_5047_5260_1_MVAR");
	Point q{PointType::BinaryOutput, 0, grid::DeviceType::Generator, "5262_1", Field::STATUS, 0, 0.0};
	CHECK(tag_name(q, 560) == "BO_560_Generator_5262_1_STATUS");
}

TEST_CASE("pointmap: validation")
{
	const auto c = glenrose();
	CHECK(error_kind(one_point_map(R"({"type": "AO", "index": 0, "device": "Branch", "key": "5047_5260_1", "field": "MWSETPOINT"})")) ==
	      MapError::Kind::Illegal);
	CHECK(error_kind(one_point_map(R"({"type": "AI", "index": 0, "device": "Bus", "key": "5260", "field": "MW"})")) ==
	      MapError::Kind::Illegal);
	CHECK(error_kind(one_point_map(R"({"type": "BO", "index": 0, "device": "Bus", "key": "5260", "field": "STATUS"})")) ==
	      MapError::Kind::Illegal);
	CHECK(error_kind(one_point_map(R"({"type": "AI", "index": 1, "device": "Bus", "key": "5260", "field": "VPU"})")) ==
	      MapError::Kind::NonContiguous);
	CHECK(error_kind(one_point_map(R"({"type": "BI", "index": 0, "device": "Bus", "key": "5260", "field": "STATUS"},
	                                 {"type": "BI", "index": 0, "device": "Bus", "key": "5261", "field": "STATUS"})")) ==
	      MapError::Kind::Duplicate);
	CHECK(error_kind(one_point_map(R"({"type": "BI", "index": 0, "device": "Bus", "key": "5260", "field": "STATUS"},
	                                 {"type": "BI", "index": 1, "device": "Bus", "key": "5260", "field": "STATUS"})")) ==
	      MapError::Kind::Duplicate);
	CHECK(error_kind(one_point_map(R"({"type": "BI", "index": 0, "device": "Branch", "key": "1_2_1", "field": "STATUS"})"), &c) ==
	      MapError::Kind::UnknownDevice);
	CHECK(error_kind(one_point_map(R"({"type": "XX", "index": 0, "device": "Bus", "key": "1", "field": "STATUS"})")) ==
	      MapError::Kind::Schema);
	CHECK(error_kind(one_point_map(R"({"type": "BI", "index": 0, "device": "Bus", "key": "1", "field": "STATUS", "class": 4})")) ==
	      MapError::Kind::Schema);
	CHECK(error_kind(one_point_map(R"({"type": "AI", "index": 0, "device": "Bus", "key": "1", "field": "VPU", "deadband": -1})")) ==
	      MapError::Kind::Schema);
	CHECK(error_kind(one_point_map(R"({"type": "BO", "index": 0, "device": "Generator", "key": "1_1", "field": "STATUS", "class": 1})")) ==
	      MapError::Kind::Illegal);
	CHECK(error_kind(R"({"outstations": [{"number": 1}, {"number": 1}]})") == MapError::Kind::Duplicate);
	CHECK(error_kind(R"({"outstations": [{"number": 70000}]})") == MapError::Kind::Schema);
	CHECK(error_kind("[") == MapError::Kind::Schema);

	try {
		parse_map(one_point_map(R"({"type": "AO", "index": 0, "device": "Branch", "key": "5047_5260_1", "field": "MWSETPOINT"})"));
	} catch (const MapError& e) {
		CHECK(e.where() == "outstation 7 point AO0");
	}

	const auto empty = parse_map(R"({"outstations": [{"number": 9, "name": "EMPTY", "points": []}]})");
	CHECK(empty.outstation(9)->points.empty());
	CHECK(empty.point_count() == 0);
}

TEST_CASE("pointmap: autogen counts follow the policy")
{
	const auto c = twobus();
	const auto m = autogen_map(c);
	REQUIRE(m.outstations().size() == 2);
	struct Counts
	{
		int gens, branches, loads, shunts, buses;
	};
	// substation 1 holds the generator, the branch (by its from bus) and bus 1;
	// substation 2 the load and bus 2
	const Counts expect[] = {{1, 1, 0, 0, 1}, {0, 0, 1, 0, 1}};
	for (int k = 0; k < 2; ++k) {
		const auto& os = m.outstations()[static_cast<std::size_t>(k)];
		const auto& e = expect[k];
		const int equipment = e.gens + e.branches + e.loads + e.shunts;
		CHECK(os.number == k + 1);
		CHECK(os.count(PointType::BinaryInput) == static_cast<std::size_t>(equipment + e.buses));
		CHECK(os.count(PointType::AnalogInput) == static_cast<std::size_t>(2 * equipment + e.buses));
		CHECK(os.count(PointType::AnalogOutput) == static_cast<std::size_t>(2 * e.gens));
		CHECK(os.count(PointType::BinaryOutput) == static_cast<std::size_t>(equipment));
		CHECK(os.count(PointType::CounterInput) == 0);
	}
}

TEST_CASE("pointmap: autogen on glenrose")
{
	const auto c = glenrose();
	const auto a = autogen_map(c);
	const auto b = autogen_map(c);
	CHECK(save_map(a) == save_map(b));
	REQUIRE(a.outstations().size() == 1);
	const auto& os = a.outstations()[0];
	CHECK(os.number == 560);
	CHECK(os.name == "GLEN ROSE1 345");

	// 2 gens, 7 branches (the four lines count from their substation end), 1 load, 4 buses
	CHECK(os.count(PointType::BinaryInput) == 2 + 7 + 1 + 4);
	CHECK(os.count(PointType::AnalogOutput) == 4);
	const auto* mw = os.find(PointType::AnalogInput, 0);
	REQUIRE(mw);
	CHECK(mw->key == "5262_1");
	CHECK(mw->field == Field::MW);
	CHECK(mw->deadband == doctest::Approx(26.0));
	CHECK(mw->event_class == 2);
	CHECK(os.find(PointType::BinaryInput, 0)->event_class == 1);
	for (const auto* p : os.of_type(PointType::AnalogInput))
		if (p->field == Field::VPU)
			CHECK(p->deadband == 0.005);

	// bijection between tags and coordinates
	std::set<std::string> tags;
	for (const auto& p : os.points) {
		const auto tag = tag_name(p, os);
		CHECK(tags.insert(tag).second);
		const auto ref = a.resolve(tag);
		REQUIRE(ref);
		CHECK(*a.resolve(*ref) == p);
	}
	CHECK(parse_map(save_map(a), &c) == a);
}

TEST_CASE("pointmap: read_point follows the solved state")
{
	const auto c = glenrose();
	const auto m = load_map_file("data/maps/glenrose_560.json", &c);
	const auto& os = m.outstations()[0];
	auto s = grid::initial_state(c);

	const auto* gen_mw = os.find(PointType::AnalogInput, 0);
	const auto* br_status = os.find(PointType::BinaryInput, 1);
	const auto* br_mvar = os.find(PointType::AnalogInput, 3);
	const auto* sp = os.find(PointType::AnalogOutput, 0);
	const auto k = *c.branch_index("5047_5260_1");

	CHECK(read_point(c, s, *gen_mw).value == s.gen_p[0]);
	CHECK(read_point(c, s, *gen_mw).online);
	CHECK(read_point(c, s, *br_status).state);
	CHECK(read_point(c, s, *br_mvar).value == s.branch_q[k]);
	CHECK(read_point(c, s, *sp).value == 1211.0);

	grid::apply_breaker(c, s, "5047_5260_1", false);
	grid::step(c, s, 0.1);
	CHECK_FALSE(read_point(c, s, *br_status).state);
	CHECK(read_point(c, s, *br_mvar).value == 0.0);
	CHECK(read_point(c, s, *os.find(PointType::AnalogInput, 2)).value == 0.0);

	Point counter{PointType::CounterInput, 0, grid::DeviceType::Bus, "5260", Field::STATUS, 0, 0.0};
	CHECK(read_point(c, s, counter).value == 0.0);
}
