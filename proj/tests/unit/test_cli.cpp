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

#include "cli.hpp"

#include "gridtb/dnp3/framedump.hpp"
#include "gridtb/dnp3/stack.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gridtb;
namespace fs = std::filesystem;

namespace {

struct Result
{
	int code;
	std::string out;
	std::string err;
};

Result run_cli(std::vector<std::string> args)
{
	std::ostringstream out, err;
	std::atomic<bool> stop{false};
	const int code = cli::run(args, out, err, stop);
	return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name, const std::string& content)
{
	const auto p = fs::temp_directory_path() / ("gridtb_cli_" + name);
	std::ofstream(p) << content;
	return p;
}

} // namespace

TEST_CASE("help and usage errors")
{
	CHECK(run_cli({"--help"}).code == cli::kOk);
	CHECK(run_cli({}).code == cli::kUsage);
	CHECK(run_cli({"bogus"}).code == cli::kUsage);
	CHECK(run_cli({"mapgen"}).code == cli::kUsage);
	CHECK(run_cli({"master", "operate", "--tag", "x", "--on", "--off"}).code == cli::kUsage);
	CHECK(run_cli({"master", "operate", "--tag", "x"}).code == cli::kUsage);
	CHECK(run_cli({"master", "read", "--tag", "x", "--api", "nohost"}).code == cli::kUsage);
}

TEST_CASE("mapgen on glenrose")
{
	auto r = run_cli({"mapgen", "--case", "data/cases/glenrose.json"});
	REQUIRE(r.code == cli::kOk);
	const auto map = pointmap::parse_map(r.out);
	REQUIRE(map.outstation(560));
	CHECK(map.outstation(560)->name == "GLEN ROSE1 345");

	const auto path = fs::temp_directory_path() / "gridtb_cli_map.json";
	r = run_cli({"mapgen", "--case", "data/cases/glenrose.json", "-o", path.string(), "--analog-class", "3"});
	REQUIRE(r.code == cli::kOk);
	CHECK(pointmap::load_map_file(path).point_count() == map.point_count());

	CHECK(run_cli({"mapgen", "--case", "data/cases/missing.json"}).code == cli::kUsage);
	CHECK(run_cli({"mapgen", "--case", "data/cases/glenrose.json", "--analog-class", "5"}).code == cli::kUsage);
}

TEST_CASE("framedump renders a capture")
{
	dnp3::AppFragment req;
	req.function = dnp3::FunctionCode::Read;
	req.objects.push_back({dnp3::ObjectHeader::all(60, 1), {}});
	std::uint8_t ts = 0;
	const auto line = dnp3::format_capture_line(dnp3::Direction::MasterToOutstation, dnp3::wrap_fragment(req, 1, 560, true, ts));
	const auto path = temp_file("cap.txt", "# gridtb capture\n" + line + "\n");
	auto r = run_cli({"framedump", "--pcapish", path.string()});
	CHECK(r.code == cli::kOk);
	CHECK(r.out == "> 1->560 UNCONFIRMED_USER_DATA | T FIR FIN seq=0 | READ seq=0 FIR FIN | g60v1 q06\n");

	CHECK(run_cli({"framedump", temp_file("empty.txt", "").string()}).out.empty());
	CHECK(run_cli({"framedump", temp_file("bad.txt", "? 00\n").string()}).code == cli::kUsage);
	CHECK(run_cli({"framedump", "--pcapish", "/nonexistent/cap"}).code == cli::kUsage);
}

TEST_CASE("outstation run rejects bad inputs")
{
	auto r = run_cli({"outstation", "run", "--case", "data/cases/glenrose.json", "--map", "data/maps/glenrose_560.json",
	                  "--max-fragment", "10"});
	CHECK(r.code == cli::kUsage);

	const auto bad_map = temp_file("badmap.json", R"({"outstations":[{"number":560,"name":"x","points":[
		{"type":"BI","index":0,"device":"Generator","key":"nope","field":"STATUS","class":1}]}]})");
	r = run_cli({"outstation", "run", "--case", "data/cases/glenrose.json", "--map", bad_map.string()});
	CHECK(r.code == cli::kUsage);
	CHECK(r.err.find("map error") != std::string::npos);
	CHECK(run_cli({"outstation", "run", "--case", "data/cases/glenrose.json", "--map", "data/maps/none.json"}).code ==
	      cli::kUsage);
}

TEST_CASE("outstation run serves for a fixed duration")
{
	const auto log = fs::temp_directory_path() / "gridtb_cli_commands.jsonl";
	fs::remove(log);
	auto r = run_cli({"outstation", "run", "--case", "data/cases/glenrose.json", "--map", "data/maps/glenrose_multi.json",
	                  "--port", "0", "--bind", "127.0.0.1", "--tick-virtual", "--duration", "0.3", "--command-log",
	                  log.string(), "--log-level", "warn"});
	CHECK(r.code == cli::kOk);
	CHECK(r.out.find("serving 3 outstation(s)") != std::string::npos);
	CHECK(r.out.find("0 command(s) logged") != std::string::npos);
}

TEST_CASE("master config errors exit with usage")
{
	const auto dup = temp_file("dup.json", R"({"sessions":[
		{"name":"a","server_dnp_address":560,"map":")" + fs::absolute("data/maps/glenrose_560.json").string() + R"("},
		{"name":"a","server_dnp_address":560,"map":")" + fs::absolute("data/maps/glenrose_560.json").string() + R"("}]})");
	auto r = run_cli({"master", "run", "--config", dup.string(), "--api", "127.0.0.1:0"});
	CHECK(r.code == cli::kUsage);
	CHECK(r.err.find("duplicate") != std::string::npos);
	CHECK(run_cli({"master", "run", "--config", "data/configs/none.json"}).code == cli::kUsage);

	r = run_cli({"master", "run", "--config", "data/configs/master_glenrose.json", "--api", "127.0.0.1:0", "--duration",
	             "0.2", "--log-level", "off"});
	CHECK(r.code == cli::kOk);
	CHECK(r.out.find("1 session(s)") != std::string::npos);
}

TEST_CASE("client commands fail cleanly without a master")
{
	CHECK(run_cli({"master", "read", "--api", "127.0.0.1:1", "--tag", "x"}).code == cli::kRuntime);
	CHECK(run_cli({"master", "operate", "--api", "127.0.0.1:1", "--tag", "x", "--on"}).code == cli::kRuntime);
}
