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

#include "gridtb/net/tcp.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fmt/format.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace gridtb::net {

namespace {

std::string errno_text(const char* what) { return fmt::format("{}: {}", what, std::strerror(errno)); }

int poll_one(int fd, short events, std::chrono::milliseconds timeout)
{
	pollfd p{fd, events, 0};
	for (;;) {
		const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
		if (rc < 0 && errno == EINTR)
			continue;
		if (rc < 0)
			throw NetError(errno_text("poll"));
		return rc == 0 ? 0 : p.revents;
	}
}

sockaddr_in resolve(const std::string& host, std::uint16_t port)
{
	sockaddr_in addr{};
	addr.sin_family = AF_INET;
	addr.sin_port = htons(port);
	if (host.empty() || host == "0.0.0.0" || host == "*") {
		addr.sin_addr.s_addr = htonl(INADDR_ANY);
		return addr;
	}
	if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1)
		return addr;
	addrinfo hints{};
	hints.ai_family = AF_INET;
	hints.ai_socktype = SOCK_STREAM;
	addrinfo* res = nullptr;
	if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
		throw NetError(fmt::format("cannot resolve host '{}'", host));
	addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
	::freeaddrinfo(res);
	return addr;
}

void describe_peer(Socket& s, const sockaddr_in& addr)
{
	char buf[INET_ADDRSTRLEN] = {};
	::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
	s.set_peer(buf, ntohs(addr.sin_port));
}

} // namespace

Socket::Socket(int fd) : fd_(fd) {}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& o) noexcept
	: fd_(std::exchange(o.fd_, -1)), peer_ip_(std::move(o.peer_ip_)), peer_port_(o.peer_port_)
{}

Socket& Socket::operator=(Socket&& o) noexcept
{
	if (this != &o) {
		close();
		fd_ = std::exchange(o.fd_, -1);
		peer_ip_ = std::move(o.peer_ip_);
		peer_port_ = o.peer_port_;
	}
	return *this;
}

void Socket::set_peer(std::string ip, std::uint16_t port)
{
	peer_ip_ = std::move(ip);
	peer_port_ = port;
}

void Socket::send_all(std::span<const std::uint8_t> data)
{
	std::size_t sent = 0;
	while (sent < data.size()) {
		const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
		if (n < 0) {
			if (errno == EINTR)
				continue;
			if (errno == EAGAIN || errno == EWOULDBLOCK) {
				poll_one(fd_, POLLOUT, std::chrono::milliseconds(1000));
				continue;
			}
			throw NetError(errno_text("send"));
		}
		sent += static_cast<std::size_t>(n);
	}
}

std::optional<std::size_t> Socket::recv_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout)
{
	if (fd_ < 0)
		return std::size_t{0};
	const int ev = poll_one(fd_, POLLIN, timeout);
	if (ev == 0)
		return std::nullopt;
	for (;;) {
		const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
		if (n < 0 && errno == EINTR)
			continue;
		if (n < 0) {
			if (errno == EAGAIN || errno == EWOULDBLOCK)
				return std::nullopt;
			if (errno == ECONNRESET)
				return std::size_t{0};
			throw NetError(errno_text("recv"));
		}
		return static_cast<std::size_t>(n);
	}
}

void Socket::shutdown()
{
	if (fd_ >= 0)
		::shutdown(fd_, SHUT_RDWR);
}

void Socket::close()
{
	if (fd_ >= 0) {
		::close(fd_);
		fd_ = -1;
	}
}

Listener::Listener(const std::string& host, std::uint16_t port)
{
	const auto addr = resolve(host, port);
	fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
	if (fd_ < 0)
		throw NetError(errno_text("socket"));
	const int one = 1;
	::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
	if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
		const auto msg = fmt::format("bind {}:{}: {}", host, port, std::strerror(errno));
		close();
		throw NetError(msg);
	}
	if (::listen(fd_, 64) < 0) {
		const auto msg = errno_text("listen");
		close();
		throw NetError(msg);
	}
	sockaddr_in bound{};
	socklen_t len = sizeof bound;
	::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
	port_ = ntohs(bound.sin_port);
}

Listener::~Listener() { close(); }

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout)
{
	if (fd_ < 0)
		return std::nullopt;
	if (poll_one(fd_, POLLIN, timeout) == 0)
		return std::nullopt;
	sockaddr_in peer{};
	socklen_t len = sizeof peer;
	const int fd = ::accept4(fd_, reinterpret_cast<sockaddr*>(&peer), &len, SOCK_CLOEXEC);
	if (fd < 0) {
		if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED || errno == EBADF || errno == EINVAL)
			return std::nullopt;
		throw NetError(errno_text("accept"));
	}
	const int one = 1;
	::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
	Socket s(fd);
	describe_peer(s, peer);
	return s;
}

void Listener::close()
{
	if (fd_ >= 0) {
		::shutdown(fd_, SHUT_RDWR);
		::close(fd_);
		fd_ = -1;
	}
}

Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
{
	const auto addr = resolve(host, port);
	const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
	if (fd < 0)
		throw NetError(errno_text("socket"));
	Socket s(fd);
	const int flags = ::fcntl(fd, F_GETFL, 0);
	::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
	if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
		if (errno != EINPROGRESS)
			throw NetError(fmt::format("connect {}:{}: {}", host, port, std::strerror(errno)));
		if (poll_one(fd, POLLOUT, timeout) == 0)
			throw NetError(fmt::format("connect {}:{}: timed out", host, port));
		int err = 0;
		socklen_t len = sizeof err;
		::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
		if (err != 0)
			throw NetError(fmt::format("connect {}:{}: {}", host, port, std::strerror(err)));
	}
	::fcntl(fd, F_SETFL, flags);
	const int one = 1;
	::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
	describe_peer(s, addr);
	return s;
}

} // namespace gridtb::net
