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

#include "gridtb/master/session.hpp"

#include <algorithm>
#include <array>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace gridtb::master {

using namespace dnp3;
using pointmap::PointType;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kMessageRing = 200;
constexpr auto kMinRetry = std::chrono::milliseconds(100);

std::uint64_t wall_ms()
{
	return static_cast<std::uint64_t>(
	    std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

std::chrono::milliseconds seconds_to_ms(double s)
{
	return std::chrono::milliseconds(static_cast<std::int64_t>(s * 1000.0));
}

std::optional<std::pair<PointType, bool>> point_of_group(std::uint8_t group)
{
	switch (group) {
	case 1: return std::pair{PointType::BinaryInput, false};
	case 2: return std::pair{PointType::BinaryInput, true};
	case 10: return std::pair{PointType::BinaryOutput, false};
	case 20: return std::pair{PointType::CounterInput, false};
	case 30: return std::pair{PointType::AnalogInput, false};
	case 32: return std::pair{PointType::AnalogInput, true};
	case 40: return std::pair{PointType::AnalogOutput, false};
	default: return std::nullopt;
	}
}

std::optional<std::pair<double, std::uint8_t>> numeric(const PointValue& v)
{
	if (const auto* b = std::get_if<BinaryValue>(&v.data))
		return std::pair{b->value ? 1.0 : 0.0, b->flags};
	if (const auto* f = std::get_if<AnalogFloat>(&v.data))
		return std::pair{static_cast<double>(f->value), f->flags};
	if (const auto* i = std::get_if<AnalogInt>(&v.data))
		return std::pair{static_cast<double>(i->value), i->flags};
	if (const auto* c = std::get_if<CounterValue>(&v.data))
		return std::pair{static_cast<double>(c->value), c->flags};
	return std::nullopt;
}

std::optional<CommandStatus> status_of(const AppFragment& f)
{
	for (const auto& b : f.objects)
		for (const auto& v : b.values) {
			if (const auto* c = std::get_if<Crob>(&v.value.data))
				return c->status;
			if (const auto* a = std::get_if<AnalogOutputCommand>(&v.value.data))
				return a->status;
		}
	return std::nullopt;
}

std::vector<ObjectBlock> strip_status(std::vector<ObjectBlock> blocks)
{
	for (auto& b : blocks)
		for (auto& v : b.values) {
			if (auto* c = std::get_if<Crob>(&v.value.data))
				c->status = CommandStatus::Success;
			if (auto* a = std::get_if<AnalogOutputCommand>(&v.value.data))
				a->status = CommandStatus::Success;
		}
	return blocks;
}

} // namespace

void SessionConfig::validate() const
{
	auto bad = [&](const std::string& what) { throw std::invalid_argument(fmt::format("session '{}': {}", name, what)); };
	if (name.empty())
		throw std::invalid_argument("session name must not be empty");
	if (server_ip.empty())
		bad("server_ip must not be empty");
	if (server_port == 0)
		bad("server_port must be nonzero");
	if (server_dnp_address > 65519)
		bad("server_dnp_address must be 0..65519");
	if (client_dnp_address > 65519)
		bad("client_dnp_address must be 0..65519");
	if (!(integrity_poll_period_s > 0.0))
		bad("integrity_poll_period_s must be > 0");
	if (!(class123_poll_period_s > 0.0))
		bad("class123_poll_period_s must be > 0");
	if (!(poll_timeout_s > 0.0))
		bad("poll_timeout_s must be > 0");
	if (!(poll_timeout_s < integrity_poll_period_s))
		bad("poll_timeout_s must be less than integrity_poll_period_s");
	if (max_retries < 1)
		bad("max_retries must be >= 1");
}

CaptureWriter::CaptureWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc)
{
	if (!out_)
		throw std::runtime_error("cannot open capture file " + path.string());
	out_ << "# gridtb capture\n";
	out_.flush();
}

void CaptureWriter::write(Direction dir, std::span<const std::uint8_t> bytes)
{
	std::lock_guard lock(mutex_);
	out_ << format_capture_line(dir, bytes) << '\n';
	out_.flush();
}

Session::Session(SessionConfig config, const pointmap::OutstationDef& def, Options options)
	: config_(std::move(config)), def_(def), options_(std::move(options)), tags_(def_), backoff_(options_.backoff_initial)
{
	config_.validate();
	if (def_.number != config_.server_dnp_address)
		throw std::invalid_argument(fmt::format("session '{}': map outstation {} does not match server_dnp_address {}",
		                                        config_.name, def_.number, config_.server_dnp_address));
}

Session::~Session()
{
	stop();
	std::lock_guard lock(op_mutex_);
	close_connection();
}

SessionHealth Session::health() const
{
	std::lock_guard lock(health_mutex_);
	return health_;
}

std::vector<std::string> Session::messages() const
{
	std::lock_guard lock(health_mutex_);
	return {messages_.begin(), messages_.end()};
}

void Session::note(const std::string& msg)
{
	spdlog::info("session {}: {}", config_.name, msg);
	std::lock_guard lock(health_mutex_);
	messages_.push_back(msg);
	while (messages_.size() > kMessageRing)
		messages_.pop_front();
}

void Session::publish(std::vector<TagEntry> changed)
{
	if (update_fn_ && !changed.empty())
		update_fn_(config_.name, changed);
}

void Session::record_success()
{
	bool recovered = false;
	{
		std::lock_guard lock(health_mutex_);
		++health_.message_success_count;
		health_.consecutive_failures = 0;
		recovered = health_.offline;
		health_.offline = false;
	}
	if (recovered)
		note("online");
}

void Session::record_failure(const std::string& why, bool message_sent)
{
	bool went_offline = false;
	{
		std::lock_guard lock(health_mutex_);
		if (message_sent)
			++health_.message_failure_count;
		++health_.consecutive_failures;
		if (health_.consecutive_failures >= config_.max_retries && !health_.offline) {
			health_.offline = true;
			went_offline = true;
		}
	}
	note(why);
	if (went_offline) {
		note(fmt::format("offline after {} consecutive failures", config_.max_retries));
		publish(tags_.set_validity(Validity::Invalid));
	}
}

void Session::close_connection()
{
	if (socket_) {
		socket_->close();
		socket_.reset();
	}
	std::lock_guard lock(health_mutex_);
	health_.connected = false;
}

void Session::disconnect()
{
	std::lock_guard lock(op_mutex_);
	close_connection();
}

bool Session::ensure_connected()
{
	if (socket_)
		return true;
	const auto now = Clock::now();
	if (now < next_connect_)
		return false;
	try {
		socket_ = net::connect_tcp(config_.server_ip, config_.server_port, seconds_to_ms(config_.poll_timeout_s));
	} catch (const net::NetError& e) {
		next_connect_ = now + backoff_;
		backoff_ = std::min(backoff_ * 2, options_.backoff_cap);
		record_failure(fmt::format("connect to {}:{} failed: {}", config_.server_ip, config_.server_port, e.what()), false);
		return false;
	}
	reader_ = StackReader();
	transport_seq_ = 0;
	backoff_ = options_.backoff_initial;
	just_connected_ = true;
	{
		std::lock_guard lock(health_mutex_);
		health_.connected = true;
	}
	note(fmt::format("connected to {}:{}", config_.server_ip, config_.server_port));
	return true;
}

void Session::send(std::span<const std::uint8_t> bytes)
{
	if (options_.capture)
		options_.capture->write(Direction::MasterToOutstation, bytes);
	socket_->send_all(bytes);
	std::lock_guard lock(health_mutex_);
	++health_.message_sent_count;
}

std::optional<Session::Exchange> Session::transact(AppFragment request)
{
	if (!ensure_connected())
		return std::nullopt;
	request.control = AppControl{true, true, false, false, app_seq_};
	app_seq_ = static_cast<std::uint8_t>((app_seq_ + 1) & 0x0F);
	const auto src = config_.client_dnp_address;
	const auto dst = config_.server_dnp_address;
	try {
		send(wrap_fragment(request, src, dst, true, transport_seq_));
	} catch (const net::NetError& e) {
		close_connection();
		record_failure(fmt::format("send failed: {}", e.what()), false);
		return std::nullopt;
	}

	Exchange ex;
	std::uint8_t expected = request.control.seq;
	const auto timeout = seconds_to_ms(config_.poll_timeout_s);
	auto deadline = Clock::now() + timeout;
	std::array<std::uint8_t, 4096> buf{};
	try {
		for (;;) {
			const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
			if (left.count() <= 0) {
				close_connection();
				record_failure(fmt::format("{} timed out", to_string(request.function)), true);
				return std::nullopt;
			}
			const auto n = socket_->recv_some(buf, left);
			if (!n)
				continue;
			if (*n == 0) {
				close_connection();
				record_failure("connection closed by outstation", true);
				return std::nullopt;
			}
			if (options_.capture)
				options_.capture->write(Direction::OutstationToMaster, std::span(buf.data(), *n));
			reader_.feed(std::span(buf.data(), *n));
			while (auto item = reader_.next()) {
				if (item->frame.source != dst || item->frame.destination != src || !item->fragment)
					continue;
				AppFragment frag;
				try {
					frag = decode_app_fragment(*item->fragment);
				} catch (const DecodeError& e) {
					close_connection();
					record_failure(fmt::format("malformed response: {}", e.what()), true);
					return std::nullopt;
				}
				if (frag.function != FunctionCode::Response || frag.control.seq != expected)
					continue;
				if (ex.fragments.empty() && !frag.control.fir)
					continue;
				{
					std::lock_guard lock(health_mutex_);
					++health_.message_received_count;
				}
				if (frag.control.con) {
					AppFragment confirm;
					confirm.control = AppControl{true, true, false, false, frag.control.seq};
					confirm.function = FunctionCode::Confirm;
					send(wrap_fragment(confirm, src, dst, true, transport_seq_));
				}
				ex.iin = frag.iin;
				const bool fin = frag.control.fin;
				ex.fragments.push_back(std::move(frag));
				if (fin) {
					record_success();
					if (ex.iin & iin::kParameterError)
						note(fmt::format("{} answered with PARAMETER_ERROR", to_string(request.function)));
					return ex;
				}
				expected = static_cast<std::uint8_t>((expected + 1) & 0x0F);
				deadline = Clock::now() + timeout;
			}
		}
	} catch (const net::NetError& e) {
		close_connection();
		record_failure(fmt::format("connection error: {}", e.what()), true);
		return std::nullopt;
	}
}

void Session::absorb(const Exchange& ex, std::vector<TagEntry>& changed)
{
	const auto now = wall_ms();
	for (const auto& frag : ex.fragments)
		for (const auto& block : frag.objects) {
			const auto kind = point_of_group(block.header.group);
			if (!kind)
				continue;
			for (const auto& v : block.values) {
				const auto num = numeric(v.value);
				if (!num)
					continue;
				if (auto e = tags_.apply(kind->first, v.index, num->first, num->second, kind->second, now))
					changed.push_back(std::move(*e));
			}
		}
}

bool Session::poll_integrity()
{
	AppFragment req;
	req.function = FunctionCode::Read;
	for (std::uint8_t v : {2, 3, 4, 1})
		req.objects.push_back(ObjectBlock{ObjectHeader::all(60, v), {}});
	std::vector<TagEntry> changed;
	{
		std::lock_guard lock(op_mutex_);
		const auto ex = transact(std::move(req));
		if (!ex)
			return false;
		absorb(*ex, changed);
	}
	publish(std::move(changed));
	return true;
}

bool Session::poll_class(std::uint8_t classes)
{
	AppFragment req;
	req.function = FunctionCode::Read;
	for (std::uint8_t c = 0; c < 3; ++c)
		if (classes & (1U << c))
			req.objects.push_back(ObjectBlock{ObjectHeader::all(60, static_cast<std::uint8_t>(c + 2)), {}});
	if (req.objects.empty())
		throw std::invalid_argument("poll_class needs at least one class");
	std::vector<TagEntry> changed;
	{
		std::lock_guard lock(op_mutex_);
		const auto ex = transact(std::move(req));
		if (!ex)
			return false;
		absorb(*ex, changed);
	}
	publish(std::move(changed));
	return true;
}

CommandResult Session::control(ObjectBlock block, OperateMode mode)
{
	auto exchange = [&](FunctionCode fc) {
		CommandResult r;
		AppFragment req;
		req.function = fc;
		req.objects.push_back(block);
		const auto sent = req.objects;
		const auto ex = transact(std::move(req));
		if (!ex) {
			r.detail = "no response";
			return r;
		}
		r.wire_ok = true;
		r.iin = ex->iin;
		const auto& resp = ex->fragments.front();
		r.status = status_of(resp);
		if (!r.status) {
			r.detail = fmt::format("response carried no command status (IIN {})", iin::describe(ex->iin));
		} else if (strip_status(resp.objects) != strip_status(sent)) {
			r.detail = "response does not echo the request";
			r.status.reset();
		} else {
			r.detail = to_string(*r.status);
		}
		return r;
	};

	CommandResult result;
	{
		std::lock_guard lock(op_mutex_);
		if (mode == OperateMode::SelectOperate) {
			result = exchange(FunctionCode::Select);
			if (result.success())
				result = exchange(FunctionCode::Operate);
		} else {
			result = exchange(FunctionCode::DirectOperate);
		}
	}
	if (result.success())
		request_feedback();
	else
		note(fmt::format("control failed: {}", result.detail));
	return result;
}

CommandResult Session::operate_binary(std::uint16_t index, bool on, OperateMode mode)
{
	ObjectBlock b;
	b.header = ObjectHeader::indexed(12, 1, 1);
	Crob crob;
	crob.code = on ? control_code::kLatchOn : control_code::kLatchOff;
	b.values.push_back({index, PointValue{crob, std::nullopt}});
	return control(std::move(b), mode);
}

CommandResult Session::operate_analog(std::uint16_t index, double value, OperateMode mode)
{
	ObjectBlock b;
	b.header = ObjectHeader::indexed(41, 3, 1);
	b.values.push_back({index, PointValue{AnalogOutputCommand{static_cast<float>(value)}, std::nullopt}});
	return control(std::move(b), mode);
}

CommandResult Session::operate_tag(const std::string& tag, ControlAction action, std::optional<double> value,
                                   OperateMode mode)
{
	const auto entry = tags_.get(tag);
	if (!entry)
		throw ControlError(fmt::format("unknown tag {}", tag));
	const auto type = entry->point.type;
	if (action == ControlAction::Analog) {
		if (type != PointType::AnalogOutput)
			throw ControlError(fmt::format("{} is not an analog output", tag));
		if (!value)
			throw ControlError("analog control needs a value");
		return operate_analog(entry->point.index, *value, mode);
	}
	if (type != PointType::BinaryOutput)
		throw ControlError(fmt::format("{} is not a binary output", tag));
	if (value)
		throw ControlError("latch controls take no value");
	return operate_binary(entry->point.index, action == ControlAction::LatchOn, mode);
}

void Session::request_feedback()
{
	{
		std::lock_guard lock(run_mutex_);
		feedback_requested_ = true;
	}
	run_cv_.notify_all();
}

void Session::start()
{
	std::lock_guard lock(run_mutex_);
	if (running_.load())
		return;
	stop_requested_ = false;
	running_ = true;
	thread_ = std::thread([this] { run(); });
}

void Session::stop()
{
	{
		std::lock_guard lock(run_mutex_);
		if (!running_.load())
			return;
		stop_requested_ = true;
	}
	run_cv_.notify_all();
	if (thread_.joinable())
		thread_.join();
	running_ = false;
}

void Session::run()
{
	const auto integrity = seconds_to_ms(config_.integrity_poll_period_s);
	const auto classes = seconds_to_ms(config_.class123_poll_period_s);
	auto next_integrity = Clock::now();
	auto next_class = next_integrity + classes;

	auto retry_at = [&](Clock::time_point now) {
		std::lock_guard lock(op_mutex_);
		const auto at = socket_ ? now : std::max(now, next_connect_);
		return std::max(at, now + kMinRetry);
	};

	for (;;) {
		bool feedback = false;
		{
			std::lock_guard lock(run_mutex_);
			if (stop_requested_)
				break;
			feedback = std::exchange(feedback_requested_, false);
		}
		auto now = Clock::now();
		if (now >= next_integrity) {
			just_connected_ = false;
			const bool ok = poll_integrity();
			now = Clock::now();
			next_integrity = ok ? now + integrity : retry_at(now);
			just_connected_ = false;
		} else if (feedback || now >= next_class) {
			just_connected_ = false;
			const bool ok = poll_class();
			now = Clock::now();
			if (now >= next_class || !ok)
				next_class = ok ? now + classes : retry_at(now);
			if (just_connected_.exchange(false))
				next_integrity = now; // integrity poll right after every (re)connect
		}
		std::unique_lock lock(run_mutex_);
		run_cv_.wait_until(lock, std::min(next_integrity, next_class),
		                   [&] { return stop_requested_ || feedback_requested_; });
	}
}

} // namespace gridtb::master
