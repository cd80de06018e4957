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

#include "gridtb/grid/case.hpp"
#include "gridtb/grid/state.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace gridtb::grid {

struct BreakerCommand
{
	std::string branch_id;
	bool closed = false;
};

struct StatusCommand
{
	DeviceType type = DeviceType::Generator; // Generator, Load or Shunt
	std::string key;
	bool on = false;
};

struct SetpointCommand
{
	std::string gen_id;
	SetpointKind kind = SetpointKind::MW;
	double value = 0.0;
};

using Command = std::variant<BreakerCommand, StatusCommand, SetpointCommand>;

std::string describe(const Command& cmd);

/// Applies one command to `s`. Throws UnknownDevice / SetpointRejected.
void apply_command(const GridCase& c, GridState& s, const Command& cmd);

struct Snapshot
{
	std::shared_ptr<const GridCase> grid;
	GridState state;
};

using SnapshotPtr = std::shared_ptr<const Snapshot>;

/// Owns the grid state. Commands are queued from any thread and applied in
/// arrival order right before the next solve; readers get immutable
/// snapshots published after every tick.
class Simulator
{
public:
	using Listener = std::function<void(const SnapshotPtr&)>;

	explicit Simulator(std::shared_ptr<const GridCase> grid, double tick_s = 0.1);
	~Simulator();

	Simulator(const Simulator&) = delete;
	Simulator& operator=(const Simulator&) = delete;

	const GridCase& grid() const { return *grid_; }
	double tick_seconds() const { return tick_s_; }

	SnapshotPtr snapshot() const;
	void submit(Command cmd);

	/// Called on the ticking thread after each publish. Not removable;
	/// register before starting.
	void add_listener(Listener l);

	/// Runs `ticks` ticks synchronously on the calling thread (virtual clock).
	void advance(std::size_t ticks = 1);
	void advance_seconds(double seconds);

	/// Real-time pacer on a background thread. Sleeps until each deadline;
	/// when more than one second behind it logs and jumps the schedule.
	void start_realtime();
	/// Virtual pacer: ticks as fast as possible on a background thread.
	void start_virtual(std::chrono::milliseconds pause = std::chrono::milliseconds(0));
	void stop();
	bool running() const { return running_.load(); }

	std::uint64_t commands_applied() const { return applied_.load(); }
	std::uint64_t commands_failed() const { return failed_.load(); }

private:
	void tick_once();
	void start_thread(bool realtime, std::chrono::milliseconds pause);

	std::shared_ptr<const GridCase> grid_;
	double tick_s_;
	GridState state_; // ticking thread only (guarded by tick_mutex_)

	std::mutex tick_mutex_;
	mutable std::mutex snap_mutex_;
	SnapshotPtr snap_;

	std::mutex queue_mutex_;
	std::vector<Command> queue_;

	std::vector<Listener> listeners_;

	std::atomic<bool> running_{false};
	std::mutex run_mutex_;
	std::condition_variable run_cv_;
	bool stop_requested_ = false;
	std::thread thread_;

	std::atomic<std::uint64_t> applied_{0};
	std::atomic<std::uint64_t> failed_{0};
};

} // namespace gridtb::grid
