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

#include "gridtb/grid/simulator.hpp"

#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace gridtb::grid {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
	using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string describe(const Command& cmd)
{
	return std::visit(overloaded{
	                      [](const BreakerCommand& c) {
		                      return fmt::format("breaker {} {}", c.branch_id, c.closed ? "close" : "open");
	                      },
	                      [](const StatusCommand& c) {
		                      return fmt::format("{} {} {}", to_string(c.type), c.key, c.on ? "on" : "off");
	                      },
	                      [](const SetpointCommand& c) {
		                      return fmt::format("{} {} = {}", c.gen_id,
		                                         c.kind == SetpointKind::MW ? "MWSETPOINT" : "VPUSETPOINT", c.value);
	                      },
	                  },
	                  cmd);
}

void apply_command(const GridCase& c, GridState& s, const Command& cmd)
{
	std::visit(overloaded{
	               [&](const BreakerCommand& b) { apply_breaker(c, s, b.branch_id, b.closed); },
	               [&](const StatusCommand& st) {
		               switch (st.type) {
		               case DeviceType::Generator: apply_gen_status(c, s, st.key, st.on); break;
		               case DeviceType::Load: apply_load_status(c, s, st.key, st.on); break;
		               case DeviceType::Shunt: apply_shunt_status(c, s, st.key, st.on); break;
		               default: throw UnknownDevice(fmt::format("{} has no switchable status", to_string(st.type)));
		               }
	               },
	               [&](const SetpointCommand& sp) {
		               const auto out = apply_setpoint(c, s, sp.gen_id, sp.kind, sp.value);
		               if (out.clamped)
			               spdlog::warn("setpoint {} for {} clamped to {}", sp.value, sp.gen_id, out.applied);
	               },
	           },
	           cmd);
}

Simulator::Simulator(std::shared_ptr<const GridCase> grid, double tick_s)
	: grid_(std::move(grid)), tick_s_(tick_s)
{
	if (!grid_)
		throw std::invalid_argument("simulator needs a case");
	if (!(tick_s_ > 0.0))
		throw std::invalid_argument("tick must be positive");
	state_ = initial_state(*grid_);
	snap_ = std::make_shared<const Snapshot>(Snapshot{grid_, state_});
}

Simulator::~Simulator() { stop(); }

SnapshotPtr Simulator::snapshot() const
{
	std::lock_guard lock(snap_mutex_);
	return snap_;
}

void Simulator::submit(Command cmd)
{
	std::lock_guard lock(queue_mutex_);
	queue_.push_back(std::move(cmd));
}

void Simulator::add_listener(Listener l) { listeners_.push_back(std::move(l)); }

void Simulator::tick_once()
{
	std::vector<Command> pending;
	{
		std::lock_guard lock(queue_mutex_);
		pending.swap(queue_);
	}
	SnapshotPtr snap;
	{
		std::lock_guard lock(tick_mutex_);
		for (const auto& cmd : pending) {
			try {
				apply_command(*grid_, state_, cmd);
				++applied_;
				spdlog::info("sim t={:.1f}s applied {}", state_.time_s, describe(cmd));
			} catch (const std::exception& e) {
				++failed_;
				spdlog::warn("sim t={:.1f}s rejected {}: {}", state_.time_s, describe(cmd), e.what());
			}
		}
		step(*grid_, state_, tick_s_);
		for (const auto& a : state_.alerts)
			spdlog::debug("sim t={:.1f}s {}", state_.time_s, a);
		snap = std::make_shared<const Snapshot>(Snapshot{grid_, state_});
		{
			std::lock_guard slock(snap_mutex_);
			snap_ = snap;
		}
	}
	for (const auto& l : listeners_)
		l(snap);
}

void Simulator::advance(std::size_t ticks)
{
	for (std::size_t i = 0; i < ticks; ++i)
		tick_once();
}

void Simulator::advance_seconds(double seconds)
{
	advance(static_cast<std::size_t>(std::llround(seconds / tick_s_)));
}

void Simulator::start_realtime() { start_thread(true, std::chrono::milliseconds(0)); }

void Simulator::start_virtual(std::chrono::milliseconds pause) { start_thread(false, pause); }

void Simulator::start_thread(bool realtime, std::chrono::milliseconds pause)
{
	if (running_.exchange(true))
		throw std::logic_error("simulator already running");
	{
		std::lock_guard lock(run_mutex_);
		stop_requested_ = false;
	}
	thread_ = std::thread([this, realtime, pause] {
		using clock = std::chrono::steady_clock;
		const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(tick_s_));
		auto deadline = clock::now() + period;
		for (;;) {
			{
				std::unique_lock lock(run_mutex_);
				if (realtime)
					run_cv_.wait_until(lock, deadline, [this] { return stop_requested_; });
				else if (pause.count() > 0)
					run_cv_.wait_for(lock, pause, [this] { return stop_requested_; });
				if (stop_requested_)
					break;
			}
			tick_once();
			if (realtime) {
				deadline += period;
				const auto now = clock::now();
				if (now - deadline > std::chrono::seconds(1)) {
					spdlog::warn("sim pacer {} ms behind; skipping ahead",
					             std::chrono::duration_cast<std::chrono::milliseconds>(now - deadline).count());
					deadline = now + period;
				}
			}
		}
	});
}

void Simulator::stop()
{
	{
		std::lock_guard lock(run_mutex_);
		stop_requested_ = true;
	}
	run_cv_.notify_all();
	if (thread_.joinable())
		thread_.join();
	running_ = false;
}

} // namespace gridtb::grid
