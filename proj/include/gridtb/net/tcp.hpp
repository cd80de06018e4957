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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace gridtb::net {

class NetError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Owning wrapper around a connected TCP socket.
class Socket
{
public:
	Socket() = default;
	explicit Socket(int fd);
	~Socket();
	Socket(Socket&& o) noexcept;
	Socket& operator=(Socket&& o) noexcept;
	Socket(const Socket&) = delete;
	Socket& operator=(const Socket&) = delete;

	bool valid() const { return fd_ >= 0; }
	int fd() const { return fd_; }

	/// Writes everything or throws NetError.
	void send_all(std::span<const std::uint8_t> data);

	/// Waits up to `timeout` for data. Returns nullopt on timeout, 0 on orderly
	/// close, otherwise the octet count. Throws NetError on socket errors.
	std::optional<std::size_t> recv_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout);

	/// Unblocks readers in other threads; the descriptor stays owned.
	void shutdown();
	void close();

	std::string peer_ip() const { return peer_ip_; }
	std::uint16_t peer_port() const { return peer_port_; }
	void set_peer(std::string ip, std::uint16_t port);

private:
	int fd_ = -1;
	std::string peer_ip_;
	std::uint16_t peer_port_ = 0;
};

class Listener
{
public:
	/// Binds and listens. Port 0 picks an ephemeral port. Throws NetError.
	Listener(const std::string& host, std::uint16_t port);
	~Listener();
	Listener(const Listener&) = delete;
	Listener& operator=(const Listener&) = delete;

	std::uint16_t port() const { return port_; }
	/// Returns nullopt on timeout or after close().
	std::optional<Socket> accept(std::chrono::milliseconds timeout);
	void close();

private:
	int fd_ = -1;
	std::uint16_t port_ = 0;
};

/// Connects with a timeout. Throws NetError.
Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

} // namespace gridtb::net
