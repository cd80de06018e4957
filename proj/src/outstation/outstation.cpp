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

#include "gridtb/outstation/outstation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <set>
#include <spdlog/spdlog.h>

namespace gridtb::outstation {

using namespace dnp3;
using pointmap::Field;
using pointmap::PointType;

namespace {

std::int32_t to_i32(double v)
{
	if (!std::isfinite(v))
		return 0;
	const double r = std::round(v);
	if (r >= static_cast<double>(std::numeric_limits<std::int32_t>::max()))
		return std::numeric_limits<std::int32_t>::max();
	if (r <= static_cast<double>(std::numeric_limits<std::int32_t>::min()))
		return std::numeric_limits<std::int32_t>::min();
	return static_cast<std::int32_t>(r);
}

std::uint8_t online_flag(bool online) { return online ? flags::kOnline : 0; }

std::uint64_t wall_ms()
{
	return static_cast<std::uint64_t>(
	    std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

AppFragment null_response(std::uint8_t seq, std::uint16_t iin)
{
	AppFragment r;
	r.control = AppControl{true, true, false, false, seq};
	r.function = FunctionCode::Response;
	r.iin = iin;
	return r;
}

std::size_t index_octets(Qualifier q)
{
	switch (q) {
	case Qualifier::CountIndex8: return 1;
	case Qualifier::CountIndex16: return 2;
	default: return 0;
	}
}

/// Strips command statuses so a SELECT and its OPERATE compare equal.
std::vector<ObjectBlock> without_status(std::vector<ObjectBlock> blocks)
{
	for (auto& b : blocks) {
		for (auto& v : b.values) {
			if (auto* c = std::get_if<Crob>(&v.value.data))
				c->status = CommandStatus::Success;
			if (auto* a = std::get_if<AnalogOutputCommand>(&v.value.data))
				a->status = CommandStatus::Success;
		}
	}
	return blocks;
}

constexpr std::size_t kMaxControls = 16;

} // namespace

PointValue static_value(const pointmap::Point& p, const pointmap::Reading& r, std::uint8_t analog_variation)
{
	PointValue v;
	switch (p.type) {
	case PointType::BinaryInput:
	case PointType::BinaryOutput: v.data = BinaryValue{r.state, online_flag(r.online)}; break;
	case PointType::CounterInput: v.data = CounterValue{0, flags::kOnline}; break;
	case PointType::AnalogInput:
		if (analog_variation == 1)
			v.data = AnalogInt{to_i32(r.value), online_flag(r.online)};
		else
			v.data = AnalogFloat{static_cast<float>(r.value), online_flag(r.online)};
		break;
	case PointType::AnalogOutput: v.data = AnalogInt{to_i32(r.value), online_flag(r.online)}; break;
	}
	return v;
}

Outstation::Outstation(const pointmap::OutstationDef& def, grid::Simulator& sim, CommandLog* log, OutstationOptions options)
	: def_(def), sim_(sim), log_(log), options_(std::move(options))
{
	if (options_.static_analog_variation != 1 && options_.static_analog_variation != 5)
		throw std::invalid_argument("static analog variation must be 1 or 5");
	if (options_.max_fragment < 64)
		throw std::invalid_argument("max fragment must be at least 64 octets");
	bi_ = def_.of_type(PointType::BinaryInput);
	ai_ = def_.of_type(PointType::AnalogInput);
	ci_ = def_.of_type(PointType::CounterInput);
	bo_ = def_.of_type(PointType::BinaryOutput);
	ao_ = def_.of_type(PointType::AnalogOutput);

	const auto snap = sim_.snapshot();
	for (const auto* p : ai_) {
		const auto r = pointmap::read_point(*snap->grid, snap->state, *p);
		analog_.push_back(AnalogReportState{r.value, r.value, p->deadband});
	}
	for (const auto* p : bi_)
		binary_.push_back(pointmap::read_point(*snap->grid, snap->state, *p).state);
}

std::uint64_t Outstation::stamp(double sim_time_s) const
{
	return options_.epoch_ms + static_cast<std::uint64_t>(std::llround(sim_time_s * 1000.0));
}

void Outstation::scan(const grid::Snapshot& snap)
{
	std::vector<EventRecord> fresh;
	std::lock_guard lock(mutex_);
	const auto ts = stamp(snap.state.time_s);
	for (std::size_t i = 0; i < bi_.size(); ++i) {
		const auto r = pointmap::read_point(*snap.grid, snap.state, *bi_[i]);
		if (r.state == binary_[i])
			continue;
		binary_[i] = r.state;
		if (bi_[i]->event_class == 0)
			continue;
		EventRecord ev;
		ev.id = next_event_id_++;
		ev.type = PointType::BinaryInput;
		ev.index = bi_[i]->index;
		ev.value.data = BinaryValue{r.state, online_flag(r.online)};
		ev.value.timestamp = ts;
		ev.event_class = bi_[i]->event_class;
		fresh.push_back(std::move(ev));
	}
	for (std::size_t i = 0; i < ai_.size(); ++i) {
		const auto r = pointmap::read_point(*snap.grid, snap.state, *ai_[i]);
		if (!analog_[i].scan(r.value) || ai_[i]->event_class == 0)
			continue;
		EventRecord ev;
		ev.id = next_event_id_++;
		ev.type = PointType::AnalogInput;
		ev.index = ai_[i]->index;
		ev.value.data = AnalogInt{to_i32(r.value), online_flag(r.online)};
		ev.value.timestamp = ts;
		ev.event_class = ai_[i]->event_class;
		fresh.push_back(std::move(ev));
	}
	if (fresh.empty())
		return;
	std::erase_if(views_, [](const std::weak_ptr<EventView>& w) { return w.expired(); });
	for (const auto& w : views_) {
		if (auto v = w.lock()) {
			for (const auto& ev : fresh)
				v->classes[static_cast<std::size_t>(ev.event_class - 1)].push(ev);
		}
	}
}

std::shared_ptr<EventView> Outstation::attach()
{
	auto v = std::make_shared<EventView>(options_.event_capacity);
	std::lock_guard lock(mutex_);
	views_.push_back(v);
	return v;
}

void Outstation::detach(const std::shared_ptr<EventView>& view)
{
	std::lock_guard lock(mutex_);
	std::erase_if(views_, [&](const std::weak_ptr<EventView>& w) {
		auto p = w.lock();
		return !p || p == view;
	});
}

std::vector<AnalogReportState> Outstation::analog_state() const
{
	std::lock_guard lock(mutex_);
	return analog_;
}

std::uint64_t Outstation::events_generated() const
{
	std::lock_guard lock(mutex_);
	return next_event_id_ - 1;
}

std::uint16_t Outstation::event_iin(const Session& s) const
{
	std::uint16_t iin = 0;
	if (!s.view)
		return iin;
	static constexpr std::uint16_t bits[3] = {iin::kClass1Events, iin::kClass2Events, iin::kClass3Events};
	for (std::size_t c = 0; c < 3; ++c) {
		if (!s.view->classes[c].empty())
			iin |= bits[c];
		if (s.view->classes[c].overflow())
			iin |= iin::kEventBufferOverflow;
	}
	return iin;
}

std::optional<AppFragment> Outstation::handle(Session& session, std::span<const std::uint8_t> request, const Requester& who)
{
	if (request.size() < 2)
		return std::nullopt;
	const auto ctl = AppControl::from_byte(request[0]);
	AppFragment req;
	std::uint16_t error = 0;
	try {
		req = decode_app_fragment(request);
	} catch (const UnsupportedFunction&) {
		error = iin::kNoFuncCodeSupport;
	} catch (const UnsupportedObject&) {
		error = iin::kObjectUnknown;
	} catch (const DecodeError&) {
		error = iin::kParameterError;
	}
	if (!session.view)
		session.view = attach();
	if (error != 0) {
		std::lock_guard lock(mutex_);
		if (ctl.fir && request[1] != static_cast<std::uint8_t>(FunctionCode::Confirm))
			session.pending.clear(), session.pending_events.clear(), session.awaiting_confirm = false;
		return null_response(ctl.seq, static_cast<std::uint16_t>(error | event_iin(session)));
	}

	if (req.function == FunctionCode::Confirm)
		return handle_confirm(session, req);
	if (is_response(req.function))
		return std::nullopt; // masters do not send these; nothing to answer

	{
		std::lock_guard lock(mutex_);
		// a new request abandons any unconfirmed remainder; its events stay queued
		session.pending.clear();
		session.pending_events.clear();
		session.awaiting_confirm = false;
		if (!req.control.fir || !req.control.fin)
			return null_response(req.control.seq, static_cast<std::uint16_t>(iin::kParameterError | event_iin(session)));
	}

	switch (req.function) {
	case FunctionCode::Read: return handle_read(session, req);
	case FunctionCode::Write: {
		// time sync is accepted and ignored
		std::lock_guard lock(mutex_);
		return null_response(req.control.seq, event_iin(session));
	}
	case FunctionCode::Select:
	case FunctionCode::Operate:
	case FunctionCode::DirectOperate: return handle_control(session, req, who);
	default: {
		std::lock_guard lock(mutex_);
		return null_response(req.control.seq, static_cast<std::uint16_t>(iin::kNoFuncCodeSupport | event_iin(session)));
	}
	}
}

std::optional<AppFragment> Outstation::handle_confirm(Session& s, const AppFragment& req)
{
	std::lock_guard lock(mutex_);
	if (!s.awaiting_confirm || s.pending.empty() || s.pending.front().control.seq != req.control.seq)
		return std::nullopt;
	++s.confirms;
	const auto& ids = s.pending_events.front();
	if (!ids.empty()) {
		for (auto& cls : s.view->classes)
			cls.remove(ids);
	}
	s.pending.pop_front();
	s.pending_events.pop_front();
	s.awaiting_confirm = false;
	if (s.pending.empty())
		return std::nullopt;
	auto next = s.pending.front();
	next.iin = static_cast<std::uint16_t>((next.iin & ~(iin::kClass1Events | iin::kClass2Events | iin::kClass3Events |
	                                                     iin::kEventBufferOverflow)) |
	                                      event_iin(s));
	s.awaiting_confirm = next.control.con;
	if (!next.control.con) {
		s.pending.pop_front();
		s.pending_events.pop_front();
	}
	return next;
}

void Outstation::add_static(Built& out, const grid::Snapshot& snap, std::uint8_t group, std::uint8_t variation,
                            std::optional<std::pair<std::uint16_t, std::uint16_t>> range)
{
	const std::vector<const pointmap::Point*>* points = nullptr;
	switch (group) {
	case 1: points = &bi_; variation = 2; break;
	case 10: points = &bo_; variation = 2; break;
	case 20: points = &ci_; variation = 1; break;
	case 30:
		points = &ai_;
		if (variation == 0)
			variation = options_.static_analog_variation;
		break;
	case 40: points = &ao_; variation = 1; break;
	default: out.iin |= iin::kObjectUnknown; return;
	}
	if (points->empty()) {
		if (range)
			out.iin |= iin::kParameterError;
		return;
	}
	std::uint16_t start = 0;
	auto stop = static_cast<std::uint16_t>(points->size() - 1);
	if (range) {
		if (range->first > range->second || range->second >= points->size()) {
			out.iin |= iin::kParameterError;
			return;
		}
		start = range->first;
		stop = range->second;
	}
	ObjectBlock block;
	block.header = ObjectHeader::range(group, variation, start, stop);
	for (std::uint32_t i = start; i <= stop; ++i) {
		const auto* p = (*points)[i];
		const auto r = pointmap::read_point(*snap.grid, snap.state, *p);
		block.values.push_back({static_cast<std::uint16_t>(i), static_value(*p, r, group == 30 ? variation : 5)});
	}
	out.blocks.push_back(std::move(block));
	out.block_events.emplace_back();
}

void Outstation::add_events(Built& out, const Session& s, std::optional<int> event_class, std::optional<PointType> type)
{
	std::set<std::uint64_t> already;
	for (const auto& ids : out.block_events)
		already.insert(ids.begin(), ids.end());
	std::vector<const EventRecord*> picked;
	for (std::size_t c = 0; c < 3; ++c) {
		if (event_class && *event_class != static_cast<int>(c) + 1)
			continue;
		for (const auto& ev : s.view->classes[c].records()) {
			if (type && ev.type != *type)
				continue;
			if (!already.count(ev.id))
				picked.push_back(&ev);
		}
	}
	std::sort(picked.begin(), picked.end(), [](const EventRecord* a, const EventRecord* b) { return a->id < b->id; });

	// one block per run of same-type events keeps the report in time order
	for (const auto* ev : picked) {
		const bool binary = ev->type == PointType::BinaryInput;
		const std::uint8_t group = binary ? 2 : 32;
		const std::uint8_t variation = binary ? 2 : 3;
		if (out.blocks.empty() || out.block_events.back().empty() || out.blocks.back().header.group != group) {
			ObjectBlock b;
			b.header = ObjectHeader::indexed(group, variation, 0);
			out.blocks.push_back(std::move(b));
			out.block_events.emplace_back();
		}
		auto& block = out.blocks.back();
		block.values.push_back({ev->index, ev->value});
		block.header.count = static_cast<std::uint16_t>(block.values.size());
		out.block_events.back().push_back(ev->id);
	}
}

std::vector<AppFragment> Outstation::pack(Built built, std::uint8_t seq, std::deque<std::vector<std::uint64_t>>& ids) const
{
	constexpr std::size_t kResponseHeader = 4;
	const std::size_t budget = options_.max_fragment - kResponseHeader;

	std::vector<AppFragment> frags(1);
	std::vector<std::vector<std::uint64_t>> frag_ids(1);
	std::size_t used = 0;
	auto new_fragment = [&] {
		frags.emplace_back();
		frag_ids.emplace_back();
		used = 0;
	};

	for (std::size_t b = 0; b < built.blocks.size(); ++b) {
		const auto& block = built.blocks[b];
		const auto* spec = find_object_spec(block.header.group, block.header.variation);
		const bool indexed = block.header.qualifier == Qualifier::CountIndex16 || block.header.qualifier == Qualifier::CountIndex8;
		const std::size_t hdr = indexed ? header_size(Qualifier::CountIndex16) : header_size(Qualifier::StartStop16);
		const std::size_t per = spec->size + (indexed ? 2 : index_octets(block.header.qualifier));
		std::size_t at = 0;
		while (at < block.values.size()) {
			if (used + hdr + per > budget) {
				new_fragment();
				continue;
			}
			const std::size_t fit = std::min(block.values.size() - at, (budget - used - hdr) / per);
			ObjectBlock part;
			part.values.assign(block.values.begin() + static_cast<long>(at), block.values.begin() + static_cast<long>(at + fit));
			if (indexed) {
				part.header = ObjectHeader::indexed(block.header.group, block.header.variation, static_cast<std::uint16_t>(fit));
				const auto& evs = built.block_events[b];
				frag_ids.back().insert(frag_ids.back().end(), evs.begin() + static_cast<long>(at),
				                       evs.begin() + static_cast<long>(at + fit));
			} else {
				part.header = ObjectHeader::range(block.header.group, block.header.variation, part.values.front().index,
				                                  part.values.back().index);
			}
			used += encoded_block_size(part);
			frags.back().objects.push_back(std::move(part));
			at += fit;
		}
	}

	for (std::size_t i = 0; i < frags.size(); ++i) {
		auto& f = frags[i];
		f.function = FunctionCode::Response;
		f.iin = built.iin;
		f.control.fir = i == 0;
		f.control.fin = i + 1 == frags.size();
		f.control.con = !f.control.fin || !frag_ids[i].empty();
		f.control.seq = static_cast<std::uint8_t>((seq + i) & 0x0F);
		ids.push_back(std::move(frag_ids[i]));
	}
	return frags;
}

std::optional<AppFragment> Outstation::handle_read(Session& s, const AppFragment& req)
{
	const auto snap = sim_.snapshot();
	std::lock_guard lock(mutex_);
	Built events;
	Built statics;
	bool class0 = false;
	for (const auto& block : req.objects) {
		const auto& h = block.header;
		std::optional<std::pair<std::uint16_t, std::uint16_t>> range;
		if (h.qualifier == Qualifier::StartStop8 || h.qualifier == Qualifier::StartStop16)
			range = std::make_pair(h.start, h.stop);
		switch (h.group) {
		case 60:
			if (h.variation == 1) {
				if (!class0) {
					for (std::uint8_t g : {1, 10, 20, 30, 40})
						add_static(statics, *snap, g, 0, std::nullopt);
					class0 = true;
				}
			} else {
				add_events(events, s, h.variation - 1, std::nullopt);
			}
			break;
		case 2: add_events(events, s, std::nullopt, PointType::BinaryInput); break;
		case 32: add_events(events, s, std::nullopt, PointType::AnalogInput); break;
		default: add_static(statics, *snap, h.group, h.variation, range); break;
		}
	}

	Built all;
	all.iin = static_cast<std::uint16_t>(events.iin | statics.iin | event_iin(s));
	for (auto* part : {&events, &statics}) {
		std::move(part->blocks.begin(), part->blocks.end(), std::back_inserter(all.blocks));
		std::move(part->block_events.begin(), part->block_events.end(), std::back_inserter(all.block_events));
	}
	std::deque<std::vector<std::uint64_t>> ids;
	auto frags = pack(std::move(all), req.control.seq, ids);
	auto first = frags.front();
	s.pending.assign(frags.begin(), frags.end());
	s.pending_events = std::move(ids);
	s.awaiting_confirm = first.control.con;
	if (!first.control.con) {
		s.pending.clear();
		s.pending_events.clear();
	}
	return first;
}

CommandStatus Outstation::check_control(const grid::Snapshot& snap, const ObjectBlock& block, const IndexedValue& v) const
{
	const auto& c = *snap.grid;
	if (block.header.group == 12) {
		const auto* p = def_.find(PointType::BinaryOutput, v.index);
		if (!p)
			return CommandStatus::NotSupported;
		const auto& crob = std::get<Crob>(v.value.data);
		if (!control_code::target_state(crob.code))
			return CommandStatus::NotSupported;
		if (!c.device_index(p->device, p->key))
			return CommandStatus::HardwareError;
		return CommandStatus::Success;
	}
	const auto* p = def_.find(PointType::AnalogOutput, v.index);
	if (!p)
		return CommandStatus::NotSupported;
	const auto g = c.generator_index(p->key);
	if (!g || !snap.state.status.gen_on[*g])
		return CommandStatus::HardwareError;
	const double value = std::get<AnalogOutputCommand>(v.value.data).value;
	if (!std::isfinite(value) || (p->field == Field::VPUSETPOINT && !(value > 0.0)))
		return CommandStatus::FormatError;
	return CommandStatus::Success;
}

CommandStatus Outstation::execute_control(const ObjectBlock& block, const IndexedValue& v, const std::string& kind,
                                          const Requester& who, double sim_time)
{
	CommandLogEntry entry;
	entry.first_wall_ms = entry.last_wall_ms = wall_ms();
	entry.sim_time_s = sim_time;
	entry.source_address = who.source_address;
	entry.peer = who.peer;
	entry.outstation = def_.number;

	CommandStatus status = CommandStatus::Success;
	const pointmap::Point* p = nullptr;
	if (block.header.group == 12) {
		const auto& crob = std::get<Crob>(v.value.data);
		p = def_.find(PointType::BinaryOutput, v.index);
		entry.command = fmt::format("{} {}", kind, control_code::describe(crob.code));
		entry.target = p ? pointmap::tag_name(*p, def_) : fmt::format("BO{}", v.index);
		status = crob.status;
		if (status == CommandStatus::Success) {
			const bool on = *control_code::target_state(crob.code);
			if (p->device == grid::DeviceType::Branch)
				sim_.submit(grid::BreakerCommand{p->key, on});
			else
				sim_.submit(grid::StatusCommand{p->device, p->key, on});
		}
	} else {
		const auto& ao = std::get<AnalogOutputCommand>(v.value.data);
		p = def_.find(PointType::AnalogOutput, v.index);
		entry.command = fmt::format("{} ANALOG", kind);
		entry.value = static_cast<double>(ao.value);
		entry.target = p ? pointmap::tag_name(*p, def_) : fmt::format("AO{}", v.index);
		status = ao.status;
		if (status == CommandStatus::Success) {
			const auto sk = p->field == Field::VPUSETPOINT ? grid::SetpointKind::VPU : grid::SetpointKind::MW;
			sim_.submit(grid::SetpointCommand{p->key, sk, static_cast<double>(ao.value)});
		}
	}
	entry.status = to_string(status);
	if (log_)
		log_->record(entry);
	spdlog::info("outstation {}: {} {} from {} ({}) -> {}", def_.number, entry.command, entry.target, who.source_address,
	             who.peer, entry.status);
	return status;
}

AppFragment Outstation::handle_control(Session& s, const AppFragment& req, const Requester& who)
{
	const auto snap = sim_.snapshot();
	const auto now = options_.clock();
	AppFragment resp = req;
	resp.function = FunctionCode::Response;
	resp.control = AppControl{true, true, false, false, req.control.seq};

	std::size_t total = 0;
	for (const auto& b : req.objects)
		total += b.values.size();

	auto set_status = [](IndexedValue& v, CommandStatus st) {
		if (auto* c = std::get_if<Crob>(&v.value.data))
			c->status = st;
		else if (auto* a = std::get_if<AnalogOutputCommand>(&v.value.data))
			a->status = st;
	};
	auto status_of = [](const IndexedValue& v) {
		if (const auto* c = std::get_if<Crob>(&v.value.data))
			return c->status;
		return std::get<AnalogOutputCommand>(v.value.data).status;
	};

	const bool select = req.function == FunctionCode::Select;
	const std::size_t limit = select ? 1 : kMaxControls;
	const auto kind = to_string(req.function);

	std::lock_guard lock(mutex_);
	if (total == 0 || total > limit) {
		for (auto& b : resp.objects)
			for (auto& v : b.values)
				set_status(v, CommandStatus::TooManyObjs);
		if (select)
			s.armed.reset();
		resp.iin = event_iin(s);
		return resp;
	}

	if (select) {
		bool ok = true;
		for (auto& b : resp.objects)
			for (auto& v : b.values) {
				const auto st = check_control(*snap, b, v);
				set_status(v, st);
				ok = ok && st == CommandStatus::Success;
			}
		if (ok)
			s.armed = Session::Armed{without_status(req.objects), req.control.seq, now};
		else
			s.armed.reset();
		resp.iin = event_iin(s);
		return resp;
	}

	bool selected = true;
	if (req.function == FunctionCode::Operate) {
		selected = s.armed && now - s.armed->at <= options_.select_timeout &&
		           s.armed->seq == static_cast<std::uint8_t>((req.control.seq + 15) & 0x0F) &&
		           s.armed->objects == without_status(req.objects);
		s.armed.reset();
	}
	for (auto& b : resp.objects)
		for (auto& v : b.values) {
			set_status(v, selected ? check_control(*snap, b, v) : CommandStatus::NoSelect);
			set_status(v, execute_control(b, v, kind, who, snap->state.time_s));
			(void)status_of;
		}
	resp.iin = event_iin(s);
	return resp;
}

} // namespace gridtb::outstation
