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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridtb::grid {

/// Kinds of simulated equipment a SCADA point can bind to.
enum class DeviceType
{
	Generator,
	Branch,
	Load,
	Shunt,
	Bus,
};

const char* to_string(DeviceType t);
std::optional<DeviceType> device_type_from_string(std::string_view s);

struct SystemInfo
{
	double base_mva = 100.0;
	double frequency_hz = 60.0;
};

struct Bus
{
	int id = 0;
	int substation = 0; // 0 marks an external equivalent, not owned by any outstation
	std::string name;
	double nominal_kv = 0.0;
	double load_mw = 0.0;
	double load_mvar = 0.0;
	double shunt_mvar = 0.0; // positive injects reactive power
	bool has_load = false;
	bool has_shunt = false;
};

struct Branch
{
	std::string id; // "from_to_ckt"
	int from_bus = 0;
	int to_bus = 0;
	std::string circuit = "1";
	double x = 0.0; // series reactance, pu on system base
	double b = 0.0; // total line charging, pu
	bool closed = true;
	double rating_mva = 0.0;
	bool is_transformer = false;
};

struct Generator
{
	std::string id; // "bus_ckt"
	int bus = 0;
	std::string circuit = "1";
	double p_init = 0.0;
	double p_min = 0.0;
	double p_max = 0.0;
	double droop_gain = 0.0; // MW per pu frequency
	double ramp_tau = 5.0;   // s
	double vset = 1.0;       // pu
	bool on = true;
};

struct GridCase
{
	std::string name;
	SystemInfo system;
	std::vector<Bus> buses;
	std::vector<Branch> branches;
	std::vector<Generator> generators;

	std::optional<std::size_t> bus_index(int bus_id) const;
	std::optional<std::size_t> branch_index(std::string_view id) const;
	std::optional<std::size_t> generator_index(std::string_view id) const;
	/// Loads and shunts are keyed "<bus>_1"; buses by their id.
	std::optional<std::size_t> load_bus_index(std::string_view key) const;
	std::optional<std::size_t> shunt_bus_index(std::string_view key) const;
	std::optional<std::size_t> device_index(DeviceType type, std::string_view key) const;

	/// Rebuilds lookup tables; call after editing the device lists.
	void reindex();

private:
	std::map<int, std::size_t> bus_lookup_;
	std::map<std::string, std::size_t, std::less<>> branch_lookup_;
	std::map<std::string, std::size_t, std::less<>> gen_lookup_;
};

std::string load_key(int bus_id);

class CaseError : public std::runtime_error
{
public:
	enum class Kind
	{
		Schema,
		DanglingReference,
		NonPositiveReactance,
		Duplicate,
		Limits,
	};
	CaseError(Kind kind, std::string record, const std::string& message);
	Kind kind() const { return kind_; }
	const std::string& record() const { return record_; }

private:
	Kind kind_;
	std::string record_;
};

/// Parses and validates a JSON case document.
GridCase load_case(std::string_view text);
GridCase load_case_file(const std::filesystem::path& path);
std::string save_case(const GridCase& c);

/// Default droop gain when a case omits it: 5% droop on P_max.
inline double default_droop_gain(double p_max) { return 20.0 * p_max; }

} // namespace gridtb::grid
