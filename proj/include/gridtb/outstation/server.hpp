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

#include "gridtb/grid/simulator.hpp"
#include "gridtb/net/tcp.hpp"
#include "gridtb/outstation/command_log.hpp"
#include "gridtb/outstation/outstation.hpp"
#include "gridtb/pointmap/pointmap.hpp"

#include <atomic>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace gridtb::outstation {

struct ServerOptions
{
	std::string bind = "0.0.0.0";
	std::uint16_t port = 20000; // 0 picks an ephemeral port
	OutstationOptions outstation;
	std::optional<std::filesystem::path> command_log_path;
	std::size_t command_log_ring = 1000;
};

struct ServerStats
{
	std::uint64_t connections_accepted = 0;
	std::uint64_t connections_open = 0;
	std::uint64_t frames_received = 0;
	std::uint64_t frames_unknown_destination = 0;
	std::uint64_t fragments_handled = 0;
	std::uint64_t connection_errors = 0;
};

/// Serves every outstation of a point map on one TCP port. Frames are routed
/// by link destination address. Each connection has its own session, event
/// view and transport sequence per outstation.
class Server
{
public:
	Server(const pointmap::PointMap& map, grid::Simulator& sim, ServerOptions options = {});
	~Server();

	Server(const Server&) = delete;
	Server& operator=(const Server&) = delete;

	/// Binds and starts accepting. Throws net::NetError on bind failure.
	/// May be called again after stop(); the port is reused if it was fixed.
	void start();
	/// Closes the listener and every connection, then joins all threads.
	void stop();
	bool running() const { return running_.load(); }

	std::uint16_t port() const { return port_; }
	CommandLog& command_log() { return core_->log; }
	Outstation* outstation(std::uint16_t number);
	ServerStats stats() const;

private:
	struct Core
	{
		Core(std::size_t ring, std::optional<std::filesystem::path> path) : log(ring, std::move(path)) {}
		CommandLog log;
		std::map<std::uint16_t, std::unique_ptr<Outstation>> outstations;
	};

	struct Connection
	{
		std::shared_ptr<net::Socket> socket;
		std::thread thread;
		std::shared_ptr<std::atomic<bool>> done;
	};

	void accept_loop();
	void serve(std::shared_ptr<net::Socket> socket, std::shared_ptr<std::atomic<bool>> done);
	void reap(bool all);

	grid::Simulator& sim_;
	ServerOptions options_;
	std::shared_ptr<Core> core_;

	std::unique_ptr<net::Listener> listener_;
	std::uint16_t port_ = 0;
	std::atomic<bool> running_{false};
	std::thread acceptor_;

	std::mutex conn_mutex_;
	std::list<Connection> connections_;

	std::atomic<std::uint64_t> accepted_{0};
	std::atomic<std::uint64_t> open_{0};
	std::atomic<std::uint64_t> frames_{0};
	std::atomic<std::uint64_t> unknown_{0};
	std::atomic<std::uint64_t> fragments_{0};
	std::atomic<std::uint64_t> errors_{0};
};

} // namespace gridtb::outstation
