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
#include "gridtb/dnp3/framedump.hpp"
#include "gridtb/dnp3/stack.hpp"
#include "gridtb/master/tags.hpp"
#include "gridtb/net/tcp.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace gridtb::master {

struct SessionConfig
{
	std::string name;
	std::string server_ip = "127.0.0.1";
	std::uint16_t server_port = 20000;
	std::uint16_t server_dnp_address = 0;
	std::uint16_t client_dnp_address = 1;
	double integrity_poll_period_s = 60.0;
	double class123_poll_period_s = 2.0;
	double poll_timeout_s = 5.0;
	int max_retries = 3;

	/// Throws std::invalid_argument naming the bad field.
	void validate() const;
};

struct SessionHealth
{
	bool offline = true;
	std::uint64_t message_sent_count = 0;
	std::uint64_t message_received_count = 0;
	std::uint64_t message_success_count = 0;
	std::uint64_t message_failure_count = 0;
	int consecutive_failures = 0;
	bool connected = false;
};

enum class OperateMode
{
	Direct,
	SelectOperate,
};

enum class ControlAction
{
	LatchOn,
	LatchOff,
	Analog,
};

struct CommandResult
{
	bool wire_ok = false; // a response arrived
	std::optional<dnp3::CommandStatus> status;
	std::uint16_t iin = 0;
	std::string detail;

	bool success() const { return wire_ok && status == dnp3::CommandStatus::Success; }
};

/// Local rejection of a control before any wire traffic.
class ControlError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Appends both directions of a session's traffic in the capture text format.
class CaptureWriter
{
public:
	explicit CaptureWriter(const std::filesystem::path& path);
	void write(dnp3::Direction dir, std::span<const std::uint8_t> bytes);

private:
	std::mutex mutex_;
	std::ofstream out_;
};

/// One master session to one outstation over its own TCP connection.
/// Requests are stop-and-wait; every public operation is serialized.
class Session
{
public:
	using UpdateFn = std::function<void(const std::string& session, const std::vector<TagEntry>& changed)>;

	struct Options
	{
		std::shared_ptr<CaptureWriter> capture;
		std::chrono::milliseconds backoff_initial{1000};
		std::chrono::milliseconds backoff_cap{30000};
	};

	Session(SessionConfig config, const pointmap::OutstationDef& def, Options options);
	Session(SessionConfig config, const pointmap::OutstationDef& def) : Session(std::move(config), def, Options{}) {}
	~Session();

	Session(const Session&) = delete;
	Session& operator=(const Session&) = delete;

	const std::string& name() const { return config_.name; }
	const SessionConfig& config() const { return config_; }
	const pointmap::OutstationDef& def() const { return def_; }

	/// Class 1/2/3 events plus class 0. Returns true on success.
	bool poll_integrity();
	/// Event poll of the classes in `classes` (bit 0 = class 1).
	bool poll_class(std::uint8_t classes = 0x07);

	CommandResult operate_binary(std::uint16_t index, bool on, OperateMode mode = OperateMode::Direct);
	CommandResult operate_analog(std::uint16_t index, double value, OperateMode mode = OperateMode::Direct);
	/// Resolves a tag of this session. Throws ControlError if the tag is
	/// unknown or not an output of the right kind.
	CommandResult operate_tag(const std::string& tag, ControlAction action, std::optional<double> value,
	                          OperateMode mode = OperateMode::Direct);

	/// Background scheduler: integrity and class polls at their periods.
	void start();
	void stop();
	bool running() const { return running_.load(); }

	/// Closes the connection; the next request reconnects.
	void disconnect();

	SessionHealth health() const;
	const TagDatabase& tags() const { return tags_; }
	/// Recent warnings and state changes, newest last.
	std::vector<std::string> messages() const;

	/// Called after every poll with the tags that changed. Register before start().
	void on_update(UpdateFn fn) { update_fn_ = std::move(fn); }

private:
	struct Exchange
	{
		std::vector<dnp3::AppFragment> fragments; // one or more response fragments
		std::uint16_t iin = 0;
	};

	std::optional<Exchange> transact(dnp3::AppFragment request);
	bool ensure_connected();
	void close_connection();
	void send(std::span<const std::uint8_t> bytes);
	void record_success();
	void record_failure(const std::string& why, bool message_sent);
	void note(const std::string& msg);
	void absorb(const Exchange& ex, std::vector<TagEntry>& changed);
	void publish(std::vector<TagEntry> changed);
	CommandResult control(dnp3::ObjectBlock block, OperateMode mode);
	void request_feedback();
	void run();

	SessionConfig config_;
	pointmap::OutstationDef def_;
	Options options_;
	TagDatabase tags_;
	UpdateFn update_fn_;

	std::mutex op_mutex_; // one exchange at a time
	std::optional<net::Socket> socket_;
	dnp3::StackReader reader_;
	std::uint8_t app_seq_ = 0;
	std::uint8_t transport_seq_ = 0;
	std::chrono::steady_clock::time_point next_connect_{};
	std::chrono::milliseconds backoff_;
	std::atomic<bool> just_connected_{false};

	mutable std::mutex health_mutex_;
	SessionHealth health_;
	std::deque<std::string> messages_;

	std::atomic<bool> running_{false};
	std::mutex run_mutex_;
	std::condition_variable run_cv_;
	bool stop_requested_ = false;
	bool feedback_requested_ = false;
	std::thread thread_;
};

} // namespace gridtb::master
