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

#include "gridtb/master/master.hpp"
#include "gridtb/outstation/command_log.hpp"

#include "json.hpp"

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace gridtb::api {

nlohmann::json tag_view(const master::TagEntry& t);
nlohmann::json health_view(const master::SessionHealth& h);
nlohmann::json session_view(const master::Session& s, bool with_messages);
nlohmann::json command_view(const outstation::CommandLogEntry& e);

struct ControlRequest
{
	std::string tag;
	master::ControlAction action = master::ControlAction::LatchOff;
	std::optional<double> value;
	master::OperateMode mode = master::OperateMode::Direct;
};

/// Validates a control body. Throws std::invalid_argument with the reason.
ControlRequest parse_control_request(const nlohmann::json& body);
nlohmann::json control_request_json(const ControlRequest& r);

/// Fan-out of tag deltas to push subscribers. Each subscriber has a bounded
/// queue; a subscriber that falls behind is dropped with a logged notice.
class StreamHub
{
public:
	struct Subscriber
	{
		std::optional<std::string> session; // filter
		std::mutex mutex;
		std::condition_variable cv;
		std::deque<std::string> queue;
		bool dropped = false;
		bool closed = false;
	};

	explicit StreamHub(std::size_t queue_limit = 256) : limit_(queue_limit) {}

	std::shared_ptr<Subscriber> subscribe(std::optional<std::string> session);
	void unsubscribe(const std::shared_ptr<Subscriber>& s);
	void publish(const std::string& session, const std::vector<master::TagEntry>& changed);
	void close();
	std::size_t subscribers() const;

private:
	std::size_t limit_;
	mutable std::mutex mutex_;
	std::vector<std::shared_ptr<Subscriber>> subs_;
};

struct ApiOptions
{
	std::string host = "127.0.0.1";
	std::uint16_t port = 8080; // 0 picks an ephemeral port
	std::size_t stream_queue = 256;
};

/// HTTP/JSON gateway over a master and, when colocated, an outstation
/// command log. Either may be null.
class ApiServer
{
public:
	/// Registers the tag delta hook, so construct before master->start().
	ApiServer(master::Master* master, outstation::CommandLog* command_log, ApiOptions options = {});
	~ApiServer();

	ApiServer(const ApiServer&) = delete;
	ApiServer& operator=(const ApiServer&) = delete;

	/// Binds and serves on a background thread. Throws std::runtime_error
	/// when the address cannot be bound.
	void start();
	void stop();
	std::uint16_t port() const { return port_; }
	StreamHub& hub() { return hub_; }

private:
	void routes();

	master::Master* master_;
	outstation::CommandLog* log_;
	ApiOptions options_;
	StreamHub hub_;
	std::unique_ptr<httplib::Server> http_;
	std::thread thread_;
	std::uint16_t port_ = 0;
};

} // namespace gridtb::api
