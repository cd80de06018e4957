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

#include "gridtb/dnp3/app.hpp"
#include "gridtb/grid/simulator.hpp"
#include "gridtb/outstation/command_log.hpp"
#include "gridtb/outstation/events.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridtb::outstation {

struct OutstationOptions
{
	std::size_t max_fragment = 2048;
	std::size_t event_capacity = 1024; // per class, per connection view
	std::chrono::milliseconds select_timeout{10000};
	std::uint8_t static_analog_variation = 5; // g30v5 float or g30v1 int
	std::uint64_t epoch_ms = 0; // wall time of simulated t = 0, for event stamps
	std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

/// Undelivered events as seen by one connection.
struct EventView
{
	explicit EventView(std::size_t capacity) : classes{ClassBuffer(capacity), ClassBuffer(capacity), ClassBuffer(capacity)} {}
	std::array<ClassBuffer, 3> classes;
};

/// Who sent a request; used for the command log.
struct Requester
{
	std::uint16_t source_address = 0;
	std::string peer;
};

/// Per-connection state for one outstation.
struct Session
{
	std::shared_ptr<EventView> view;

	struct Armed
	{
		std::vector<dnp3::ObjectBlock> objects;
		std::uint8_t seq = 0;
		std::chrono::steady_clock::time_point at;
	};
	std::optional<Armed> armed;

	/// Remaining fragments of a multi-fragment response and the event ids
	/// each one carries. The head fragment has been sent and waits for its
	/// CONFIRM.
	std::deque<dnp3::AppFragment> pending;
	std::deque<std::vector<std::uint64_t>> pending_events;
	bool awaiting_confirm = false;
	std::uint64_t confirms = 0;
};

/// One simulated outstation: its point database, report state and the
/// request/response logic. Thread-safe; the lock is never held across I/O.
class Outstation
{
public:
	Outstation(const pointmap::OutstationDef& def, grid::Simulator& sim, CommandLog* log, OutstationOptions options = {});

	const pointmap::OutstationDef& def() const { return def_; }
	std::uint16_t number() const { return def_.number; }

	/// Compares a published snapshot against the report state and queues
	/// events into every attached view.
	void scan(const grid::Snapshot& snap);

	std::shared_ptr<EventView> attach();
	void detach(const std::shared_ptr<EventView>& view);

	/// Handles one application fragment. Returns the response to send now,
	/// if any; later fragments of a multi-fragment response are released by
	/// CONFIRMs.
	std::optional<dnp3::AppFragment> handle(Session& session, std::span<const std::uint8_t> request, const Requester& who);

	/// Current report state (for tests and diagnostics).
	std::vector<AnalogReportState> analog_state() const;
	std::uint64_t events_generated() const;

private:
	struct Built
	{
		std::vector<dnp3::ObjectBlock> blocks;
		std::vector<std::vector<std::uint64_t>> block_events;
		std::uint16_t iin = 0;
	};

	std::optional<dnp3::AppFragment> handle_read(Session& s, const dnp3::AppFragment& req);
	dnp3::AppFragment handle_control(Session& s, const dnp3::AppFragment& req, const Requester& who);
	std::optional<dnp3::AppFragment> handle_confirm(Session& s, const dnp3::AppFragment& req);

	void add_static(Built& out, const grid::Snapshot& snap, std::uint8_t group, std::uint8_t variation,
	                std::optional<std::pair<std::uint16_t, std::uint16_t>> range);
	void add_events(Built& out, const Session& s, std::optional<int> event_class, std::optional<pointmap::PointType> type);

	dnp3::CommandStatus check_control(const grid::Snapshot& snap, const dnp3::ObjectBlock& block, const dnp3::IndexedValue& v) const;
	dnp3::CommandStatus execute_control(const dnp3::ObjectBlock& block, const dnp3::IndexedValue& v, const std::string& kind,
	                                    const Requester& who, double sim_time);

	std::uint16_t event_iin(const Session& s) const;
	std::vector<dnp3::AppFragment> pack(Built built, std::uint8_t seq, std::deque<std::vector<std::uint64_t>>& ids) const;
	std::uint64_t stamp(double sim_time_s) const;

	pointmap::OutstationDef def_;
	grid::Simulator& sim_;
	CommandLog* log_;
	OutstationOptions options_;

	mutable std::mutex mutex_;
	std::vector<const pointmap::Point*> bi_, ai_, ci_, bo_, ao_;
	std::vector<AnalogReportState> analog_;
	std::vector<bool> binary_;
	std::vector<std::weak_ptr<EventView>> views_;
	std::uint64_t next_event_id_ = 1;
};

dnp3::PointValue static_value(const pointmap::Point& p, const pointmap::Reading& r, std::uint8_t analog_variation);

} // namespace gridtb::outstation
