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

#include "gridtb/outstation/server.hpp"

#include "gridtb/dnp3/stack.hpp"

#include <array>
#include <spdlog/spdlog.h>

namespace gridtb::outstation {

using namespace std::chrono_literals;

Server::Server(const pointmap::PointMap& map, grid::Simulator& sim, ServerOptions options)
	: sim_(sim), options_(std::move(options)),
	  core_(std::make_shared<Core>(options_.command_log_ring, options_.command_log_path))
{
	for (const auto& def : map.outstations())
		core_->outstations.emplace(def.number, std::make_unique<Outstation>(def, sim_, &core_->log, options_.outstation));

	// the simulator outlives no one in particular, so hold the core weakly
	std::weak_ptr<Core> weak = core_;
	sim_.add_listener([weak](const grid::SnapshotPtr& snap) {
		if (auto core = weak.lock()) {
			for (auto& [number, os] : core->outstations)
				os->scan(*snap);
		}
	});
}

Server::~Server()
{
	stop();
	core_->log.flush();
}

Outstation* Server::outstation(std::uint16_t number)
{
	auto it = core_->outstations.find(number);
	return it == core_->outstations.end() ? nullptr : it->second.get();
}

ServerStats Server::stats() const
{
	return ServerStats{accepted_.load(), open_.load(), frames_.load(), unknown_.load(), fragments_.load(), errors_.load()};
}

void Server::start()
{
	if (running_.load())
		return;
	listener_ = std::make_unique<net::Listener>(options_.bind, port_ != 0 ? port_ : options_.port);
	port_ = listener_->port();
	running_ = true;
	acceptor_ = std::thread([this] { accept_loop(); });
	spdlog::info("outstation server listening on {}:{} ({} outstations)", options_.bind, port_, core_->outstations.size());
}

void Server::stop()
{
	if (!running_.exchange(false))
		return;
	if (listener_)
		listener_->close();
	if (acceptor_.joinable())
		acceptor_.join();
	{
		std::lock_guard lock(conn_mutex_);
		for (auto& c : connections_)
			c.socket->shutdown();
	}
	reap(true);
	listener_.reset();
	core_->log.flush();
	spdlog::info("outstation server on port {} stopped", port_);
}

void Server::reap(bool all)
{
	std::list<Connection> finished;
	{
		std::lock_guard lock(conn_mutex_);
		for (auto it = connections_.begin(); it != connections_.end();) {
			if (all || it->done->load()) {
				auto next = std::next(it);
				finished.splice(finished.end(), connections_, it);
				it = next;
			} else {
				++it;
			}
		}
	}
	for (auto& c : finished)
		if (c.thread.joinable())
			c.thread.join();
}

void Server::accept_loop()
{
	while (running_.load()) {
		std::optional<net::Socket> sock;
		try {
			sock = listener_->accept(200ms);
		} catch (const net::NetError& e) {
			spdlog::warn("accept failed: {}", e.what());
			std::this_thread::sleep_for(50ms);
		}
		reap(false);
		if (!sock)
			continue;
		++accepted_;
		spdlog::info("client connected from {}:{}", sock->peer_ip(), sock->peer_port());
		auto shared = std::make_shared<net::Socket>(std::move(*sock));
		auto done = std::make_shared<std::atomic<bool>>(false);
		std::lock_guard lock(conn_mutex_);
		if (!running_.load()) {
			shared->close();
			break;
		}
		connections_.push_back(Connection{shared, std::thread([this, shared, done] { serve(shared, done); }), done});
	}
}

void Server::serve(std::shared_ptr<net::Socket> socket, std::shared_ptr<std::atomic<bool>> done)
{
	++open_;
	struct PerOutstation
	{
		Session session;
		std::uint8_t tseq = 0;
	};
	std::map<std::uint16_t, PerOutstation> sessions;
	dnp3::StackReader reader(options_.outstation.max_fragment);
	const std::string peer = socket->peer_ip();
	std::array<std::uint8_t, 4096> buf{};

	auto reply_link = [&](const dnp3::LinkFrame& in, std::uint8_t function) {
		dnp3::LinkFrame out;
		out.control.dir = false;
		out.control.prm = false;
		out.control.function = function;
		out.destination = in.source;
		out.source = in.destination;
		socket->send_all(dnp3::encode_link_frame(out));
	};

	try {
		while (running_.load()) {
			const auto n = socket->recv_some(buf, 200ms);
			if (!n)
				continue;
			if (*n == 0)
				break;
			reader.feed(std::span(buf.data(), *n));
			while (auto item = reader.next()) {
				++frames_;
				const auto& frame = item->frame;
				if (!frame.control.prm)
					continue;
				auto* os = outstation(frame.destination);
				if (!os) {
					++unknown_;
					spdlog::warn("dropped frame from {} ({}) for unknown outstation {}", frame.source, peer,
					             frame.destination);
					continue;
				}
				switch (frame.control.function) {
				case dnp3::link_func::kResetLinkStates:
				case dnp3::link_func::kTestLinkStates: reply_link(frame, dnp3::link_func::kAck); continue;
				case dnp3::link_func::kRequestLinkStatus: reply_link(frame, dnp3::link_func::kLinkStatus); continue;
				case dnp3::link_func::kConfirmedUserData: reply_link(frame, dnp3::link_func::kAck); break;
				case dnp3::link_func::kUnconfirmedUserData: break;
				default: reply_link(frame, dnp3::link_func::kNotSupported); continue;
				}
				if (!item->fragment)
					continue;
				++fragments_;
				auto& po = sessions[frame.destination];
				auto resp = os->handle(po.session, *item->fragment, Requester{frame.source, peer});
				if (resp)
					socket->send_all(dnp3::wrap_fragment(*resp, frame.destination, frame.source, false, po.tseq));
			}
		}
	} catch (const std::exception& e) {
		++errors_;
		spdlog::warn("connection {} closed on error: {}", peer, e.what());
	}
	for (auto& [number, po] : sessions)
		if (po.session.view)
			outstation(number)->detach(po.session.view);
	socket->shutdown();
	spdlog::info("client {} disconnected", peer);
	--open_;
	done->store(true);
}

} // namespace gridtb::outstation
