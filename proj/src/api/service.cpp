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

#include "gridtb/api/service.hpp"

#include "httplib.h"

#include <algorithm>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace gridtb::api {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body)
{
	res.status = status;
	res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message)
{
	reply(res, status, json{{"error", message}});
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback)
{
	if (!req.has_param(key))
		return fallback;
	const auto v = req.get_param_value(key);
	std::size_t used = 0;
	const auto n = std::stoll(v, &used);
	if (used != v.size() || n < 0)
		throw std::invalid_argument(fmt::format("'{}' must be a non-negative integer", key));
	return static_cast<std::size_t>(n);
}

const char* action_name(master::ControlAction a)
{
	switch (a) {
	case master::ControlAction::LatchOn: return "latch_on";
	case master::ControlAction::LatchOff: return "latch_off";
	case master::ControlAction::Analog: return "analog";
	}
	return "";
}

} // namespace

json tag_view(const master::TagEntry& t)
{
	return json{{"name", t.name},
	            {"instMag", t.inst_mag},
	            {"mag", t.mag ? json(*t.mag) : json(nullptr)},
	            {"validity", master::to_string(t.q)},
	            {"timestamp", t.timestamp_ms},
	            {"flags", t.flags},
	            {"point", {{"outstation", t.point.outstation}, {"type", pointmap::prefix(t.point.type)}, {"index", t.point.index}}},
	            {"unit", t.unit}};
}

json health_view(const master::SessionHealth& h)
{
	return json{{"Offline", h.offline},
	            {"Message_Sent_Count", h.message_sent_count},
	            {"Message_Received_Count", h.message_received_count},
	            {"Message_Success_Count", h.message_success_count},
	            {"Message_Failure_Count", h.message_failure_count},
	            {"consecutive_failures", h.consecutive_failures},
	            {"connected", h.connected}};
}

json session_view(const master::Session& s, bool with_messages)
{
	const auto& c = s.config();
	json j{{"name", c.name},
	       {"server_ip", c.server_ip},
	       {"server_port", c.server_port},
	       {"server_dnp_address", c.server_dnp_address},
	       {"client_dnp_address", c.client_dnp_address},
	       {"integrity_poll_period_s", c.integrity_poll_period_s},
	       {"class123_poll_period_s", c.class123_poll_period_s},
	       {"poll_timeout_s", c.poll_timeout_s},
	       {"max_retries", c.max_retries},
	       {"tag_count", s.tags().size()},
	       {"health", health_view(s.health())}};
	if (with_messages)
		j["messages"] = s.messages();
	return j;
}

json command_view(const outstation::CommandLogEntry& e)
{
	return json::parse(outstation::to_json_line(e));
}

ControlRequest parse_control_request(const json& body)
{
	if (!body.is_object())
		throw std::invalid_argument("body must be a JSON object");
	ControlRequest r;
	if (!body.contains("tag") || !body["tag"].is_string() || body["tag"].get<std::string>().empty())
		throw std::invalid_argument("'tag' is required");
	r.tag = body["tag"].get<std::string>();
	if (!body.contains("action") || !body["action"].is_string())
		throw std::invalid_argument("'action' is required");
	const auto action = body["action"].get<std::string>();
	if (action == "latch_on")
		r.action = master::ControlAction::LatchOn;
	else if (action == "latch_off")
		r.action = master::ControlAction::LatchOff;
	else if (action == "analog")
		r.action = master::ControlAction::Analog;
	else
		throw std::invalid_argument("'action' must be latch_on, latch_off or analog");

	const bool has_value = body.contains("value") && !body["value"].is_null();
	if (r.action == master::ControlAction::Analog) {
		if (!has_value)
			throw std::invalid_argument("analog control needs a numeric 'value'");
		if (!body["value"].is_number())
			throw std::invalid_argument("'value' must be a number");
		r.value = body["value"].get<double>();
		if (!std::isfinite(*r.value))
			throw std::invalid_argument("'value' must be finite");
	} else if (has_value) {
		throw std::invalid_argument("latch controls take no 'value'");
	}

	const auto mode = body.value("mode", std::string("direct"));
	if (mode == "direct")
		r.mode = master::OperateMode::Direct;
	else if (mode == "select_operate")
		r.mode = master::OperateMode::SelectOperate;
	else
		throw std::invalid_argument("'mode' must be direct or select_operate");
	return r;
}

json control_request_json(const ControlRequest& r)
{
	json j{{"tag", r.tag}, {"action", action_name(r.action)}};
	if (r.value)
		j["value"] = *r.value;
	j["mode"] = r.mode == master::OperateMode::Direct ? "direct" : "select_operate";
	return j;
}

std::shared_ptr<StreamHub::Subscriber> StreamHub::subscribe(std::optional<std::string> session)
{
	auto s = std::make_shared<Subscriber>();
	s->session = std::move(session);
	std::lock_guard lock(mutex_);
	subs_.push_back(s);
	return s;
}

void StreamHub::unsubscribe(const std::shared_ptr<Subscriber>& s)
{
	std::lock_guard lock(mutex_);
	std::erase(subs_, s);
}

std::size_t StreamHub::subscribers() const
{
	std::lock_guard lock(mutex_);
	return subs_.size();
}

void StreamHub::publish(const std::string& session, const std::vector<master::TagEntry>& changed)
{
	json arr = json::array();
	for (const auto& t : changed)
		arr.push_back(tag_view(t));
	json msg{{"session", session}, {"tags", std::move(arr)}};
	const auto text = msg.dump();

	std::lock_guard lock(mutex_);
	for (auto it = subs_.begin(); it != subs_.end();) {
		auto& s = **it;
		if (s.session && *s.session != session) {
			++it;
			continue;
		}
		std::lock_guard sl(s.mutex);
		if (s.queue.size() >= limit_) {
			s.dropped = true;
			s.cv.notify_all();
			spdlog::warn("stream subscriber fell {} messages behind; dropped", limit_);
			it = subs_.erase(it);
			continue;
		}
		s.queue.push_back(text);
		s.cv.notify_all();
		++it;
	}
}

void StreamHub::close()
{
	std::lock_guard lock(mutex_);
	for (auto& s : subs_) {
		std::lock_guard sl(s->mutex);
		s->closed = true;
		s->cv.notify_all();
	}
	subs_.clear();
}

ApiServer::ApiServer(master::Master* master, outstation::CommandLog* command_log, ApiOptions options)
	: master_(master), log_(command_log), options_(std::move(options)), hub_(options_.stream_queue),
	  http_(std::make_unique<httplib::Server>())
{
	if (master_)
		master_->on_update([this](const std::string& session, const std::vector<master::TagEntry>& changed) {
			hub_.publish(session, changed);
		});
	routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start()
{
	int port = options_.port;
	if (port == 0)
		port = http_->bind_to_any_port(options_.host);
	else if (!http_->bind_to_port(options_.host, port))
		port = -1;
	if (port <= 0)
		throw std::runtime_error(fmt::format("cannot bind service API to {}:{}", options_.host, options_.port));
	port_ = static_cast<std::uint16_t>(port);
	thread_ = std::thread([this] { http_->listen_after_bind(); });
	http_->wait_until_ready();
	spdlog::info("service API on http://{}:{}", options_.host, port_);
}

void ApiServer::stop()
{
	hub_.close();
	if (http_)
		http_->stop();
	if (thread_.joinable())
		thread_.join();
}

void ApiServer::routes()
{
	auto& http = *http_;

	http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
		try {
			std::rethrow_exception(ep);
		} catch (const std::invalid_argument& e) {
			error(res, 400, e.what());
		} catch (const std::exception& e) {
			error(res, 500, e.what());
		}
	});

	http.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
		json out = json::array();
		if (master_)
			for (const auto& s : master_->sessions())
				out.push_back(session_view(*s, false));
		reply(res, 200, out);
	});

	http.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
		const auto* s = master_ ? master_->find(req.matches[1].str()) : nullptr;
		if (!s)
			return error(res, 404, "unknown session");
		reply(res, 200, session_view(*s, true));
	});

	http.Get("/api/tags", [this](const httplib::Request& req, httplib::Response& res) {
		std::vector<const master::Session*> chosen;
		if (req.has_param("session")) {
			const auto* s = master_ ? master_->find(req.get_param_value("session")) : nullptr;
			if (!s)
				return error(res, 404, "unknown session");
			chosen.push_back(s);
		} else if (master_) {
			for (const auto& s : master_->sessions())
				chosen.push_back(s.get());
		}
		const auto prefix = req.has_param("prefix") ? req.get_param_value("prefix") : std::string();
		json out = json::array();
		for (const auto* s : chosen)
			for (const auto& t : s->tags().snapshot())
				if (t.name.starts_with(prefix))
					out.push_back(tag_view(t));
		reply(res, 200, out);
	});

	http.Get("/api/stream", [this](const httplib::Request& req, httplib::Response& res) {
		std::optional<std::string> session;
		if (req.has_param("session")) {
			session = req.get_param_value("session");
			if (!master_ || !master_->find(*session))
				return error(res, 404, "unknown session");
		}
		auto sub = hub_.subscribe(session);
		res.set_header("Cache-Control", "no-cache");
		res.set_chunked_content_provider(
		    "text/event-stream",
		    [this, sub](std::size_t, httplib::DataSink& sink) {
			    std::unique_lock lock(sub->mutex);
			    sub->cv.wait_for(lock, std::chrono::milliseconds(500),
			                     [&] { return !sub->queue.empty() || sub->dropped || sub->closed; });
			    if (sub->dropped || sub->closed) {
				    sink.done();
				    return true;
			    }
			    if (sub->queue.empty()) {
				    // keepalive comment so dead peers are noticed
				    const std::string ping = ": ping\n\n";
				    return sink.write(ping.data(), ping.size());
			    }
			    while (!sub->queue.empty()) {
				    const auto msg = "data: " + sub->queue.front() + "\n\n";
				    sub->queue.pop_front();
				    if (!sink.write(msg.data(), msg.size()))
					    return false;
			    }
			    return true;
		    },
		    [this, sub](bool) { hub_.unsubscribe(sub); });
	});

	http.Post("/api/control", [this](const httplib::Request& req, httplib::Response& res) {
		json body;
		try {
			body = json::parse(req.body);
		} catch (const json::parse_error&) {
			return error(res, 400, "body is not JSON");
		}
		const auto cr = parse_control_request(body);
		auto* s = master_ ? master_->session_of_tag(cr.tag) : nullptr;
		if (!s)
			return error(res, 404, "unknown tag " + cr.tag);
		const auto type = s->tags().get(cr.tag)->point.type;
		const bool analog = cr.action == master::ControlAction::Analog;
		if (analog && type != pointmap::PointType::AnalogOutput)
			return error(res, 400, cr.tag + " is not an analog output");
		if (!analog && type != pointmap::PointType::BinaryOutput)
			return error(res, 400, cr.tag + " is not a binary output");
		if (s->health().offline)
			return error(res, 409, "session " + s->name() + " is offline");
		master::CommandResult r;
		try {
			r = s->operate_tag(cr.tag, cr.action, cr.value, cr.mode);
		} catch (const master::ControlError& e) {
			return error(res, 400, e.what());
		}
		if (!r.wire_ok)
			return reply(res, 502, json{{"status", nullptr}, {"detail", r.detail}});
		reply(res, 200,
		      json{{"status", r.status ? json(dnp3::to_string(*r.status)) : json(nullptr)},
		           {"detail", r.detail},
		           {"iin", r.iin},
		           {"session", s->name()}});
	});

	http.Get("/api/logs", [this](const httplib::Request& req, httplib::Response& res) {
		const auto offset = query_size(req, "offset", 0);
		const auto limit = std::min<std::size_t>(query_size(req, "limit", 100), 1000);
		json commands = json::array();
		if (log_)
			for (const auto& e : log_->page(offset, limit))
				commands.push_back(command_view(e));
		json sessions = json::array();
		if (master_) {
			std::vector<json> all;
			for (const auto& s : master_->sessions()) {
				const auto msgs = s->messages();
				for (auto it = msgs.rbegin(); it != msgs.rend(); ++it)
					all.push_back(json{{"session", s->name()}, {"message", *it}});
			}
			for (std::size_t i = offset; i < all.size() && sessions.size() < limit; ++i)
				sessions.push_back(all[i]);
		}
		reply(res, 200, json{{"commands", commands}, {"sessions", sessions}, {"colocated", log_ != nullptr}});
	});
}

} // namespace gridtb::api
