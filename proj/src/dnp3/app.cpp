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

#include "gridtb/dnp3/app.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fmt/format.h>

namespace gridtb::dnp3 {

namespace {

constexpr std::array kSpecs = {
	ObjectSpec{1, 0, ValueKind::None, 0, false, "binary input (any)"},
	ObjectSpec{1, 2, ValueKind::Binary, 1, false, "binary input with flags"},
	ObjectSpec{2, 0, ValueKind::None, 0, false, "binary input event (any)"},
	ObjectSpec{2, 2, ValueKind::Binary, 7, true, "binary input event with time"},
	ObjectSpec{10, 0, ValueKind::None, 0, false, "binary output (any)"},
	ObjectSpec{10, 2, ValueKind::Binary, 1, false, "binary output status"},
	ObjectSpec{12, 1, ValueKind::Crob, 11, false, "CROB"},
	ObjectSpec{20, 0, ValueKind::None, 0, false, "counter (any)"},
	ObjectSpec{20, 1, ValueKind::Counter, 5, false, "32-bit counter with flag"},
	ObjectSpec{30, 0, ValueKind::None, 0, false, "analog input (any)"},
	ObjectSpec{30, 1, ValueKind::AnalogInt, 5, false, "32-bit analog input with flag"},
	ObjectSpec{30, 5, ValueKind::AnalogFloat, 5, false, "float analog input with flag"},
	ObjectSpec{32, 0, ValueKind::None, 0, false, "analog input event (any)"},
	ObjectSpec{32, 3, ValueKind::AnalogInt, 11, true, "32-bit analog input event with time"},
	ObjectSpec{40, 0, ValueKind::None, 0, false, "analog output status (any)"},
	ObjectSpec{40, 1, ValueKind::AnalogInt, 5, false, "32-bit analog output status"},
	ObjectSpec{41, 3, ValueKind::AnalogOutputCommand, 5, false, "float analog output command"},
	ObjectSpec{50, 1, ValueKind::Time, 6, false, "absolute time"},
	ObjectSpec{60, 1, ValueKind::None, 0, false, "class 0 data"},
	ObjectSpec{60, 2, ValueKind::None, 0, false, "class 1 data"},
	ObjectSpec{60, 3, ValueKind::None, 0, false, "class 2 data"},
	ObjectSpec{60, 4, ValueKind::None, 0, false, "class 3 data"},
};

bool is_start_stop(Qualifier q) { return q == Qualifier::StartStop8 || q == Qualifier::StartStop16; }
bool is_count_index(Qualifier q) { return q == Qualifier::CountIndex8 || q == Qualifier::CountIndex16; }

bool known_qualifier(std::uint8_t q)
{
	switch (q) {
	case 0x00:
	case 0x01:
	case 0x06:
	case 0x07:
	case 0x17:
	case 0x28: return true;
	default: return false;
	}
}

bool known_function(std::uint8_t fc)
{
	switch (fc) {
	case 0x00:
	case 0x01:
	case 0x02:
	case 0x03:
	case 0x04:
	case 0x05:
	case 0x81:
	case 0x82: return true;
	default: return false;
	}
}

enum class Context
{
	ReadRequest,
	WriteRequest,
	ControlRequest,
	Response,
};

Context context_for(FunctionCode fc)
{
	switch (fc) {
	case FunctionCode::Read: return Context::ReadRequest;
	case FunctionCode::Write: return Context::WriteRequest;
	case FunctionCode::Select:
	case FunctionCode::Operate:
	case FunctionCode::DirectOperate: return Context::ControlRequest;
	default: return Context::Response;
	}
}

/// Checks a (group, variation, qualifier) triple against what each context allows.
const ObjectSpec* check_triple(Context ctx, std::uint8_t g, std::uint8_t v, std::uint8_t q)
{
	const auto* spec = find_object_spec(g, v);
	if (spec == nullptr || !known_qualifier(q))
		throw UnsupportedObject(g, v, q);
	const auto qual = static_cast<Qualifier>(q);
	bool ok = false;
	switch (ctx) {
	case Context::ReadRequest:
		if (g == 60)
			ok = qual == Qualifier::AllObjects;
		else
			ok = g != 12 && g != 41 && g != 50 && (qual == Qualifier::AllObjects || is_start_stop(qual));
		break;
	case Context::WriteRequest: ok = g == 50 && v == 1 && qual == Qualifier::Count8; break;
	case Context::ControlRequest: ok = (g == 12 || g == 41) && is_count_index(qual); break;
	case Context::Response:
		ok = spec->kind != ValueKind::None && spec->kind != ValueKind::Time &&
		     (is_start_stop(qual) || is_count_index(qual));
		break;
	}
	if (!ok)
		throw UnsupportedObject(g, v, q);
	return spec;
}

bool carries_values(Context ctx) { return ctx != Context::ReadRequest; }

// ---- little-endian writers ------------------------------------------------

void put8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
void put16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
	out.push_back(static_cast<std::uint8_t>(v & 0xFF));
	out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
	for (int i = 0; i < 4; ++i)
		out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put48(std::vector<std::uint8_t>& out, std::uint64_t v)
{
	for (int i = 0; i < 6; ++i)
		out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

class Reader
{
public:
	explicit Reader(std::span<const std::uint8_t> bytes)
	    : bytes_(bytes)
	{}

	std::size_t remaining() const { return bytes_.size() - pos_; }
	bool empty() const { return remaining() == 0; }

	void need(std::size_t n, const char* what) const
	{
		if (remaining() < n)
			throw DecodeError(fmt::format("truncated {}: need {} octets, have {}", what, n, remaining()));
	}
	std::uint8_t u8()
	{
		need(1, "octet");
		return bytes_[pos_++];
	}
	std::uint16_t u16()
	{
		need(2, "uint16");
		const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
		pos_ += 2;
		return v;
	}
	std::uint32_t u32()
	{
		need(4, "uint32");
		std::uint32_t v = 0;
		for (int i = 0; i < 4; ++i)
			v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
		pos_ += 4;
		return v;
	}
	std::uint64_t u48()
	{
		need(6, "timestamp");
		std::uint64_t v = 0;
		for (int i = 0; i < 6; ++i)
			v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
		pos_ += 6;
		return v;
	}

private:
	std::span<const std::uint8_t> bytes_;
	std::size_t pos_ = 0;
};

template <class T>
const T& expect(const PointValue& pv, const ObjectSpec& spec)
{
	const auto* v = std::get_if<T>(&pv.data);
	if (v == nullptr)
		throw EncodeError(fmt::format("value type does not match g{}v{}", spec.group, spec.variation));
	return *v;
}

void encode_value(std::vector<std::uint8_t>& out, const ObjectSpec& spec, const PointValue& pv)
{
	if (spec.timed != pv.timestamp.has_value())
		throw EncodeError(fmt::format("g{}v{} {} a timestamp", spec.group, spec.variation,
		                              spec.timed ? "requires" : "must not carry"));
	switch (spec.kind) {
	case ValueKind::Binary: {
		const auto& b = expect<BinaryValue>(pv, spec);
		put8(out, static_cast<std::uint8_t>((b.flags & 0x7F) | (b.value ? flags::kState : 0)));
		break;
	}
	case ValueKind::AnalogFloat: {
		const auto& a = expect<AnalogFloat>(pv, spec);
		put8(out, a.flags);
		put32(out, std::bit_cast<std::uint32_t>(a.value));
		break;
	}
	case ValueKind::AnalogInt: {
		const auto& a = expect<AnalogInt>(pv, spec);
		put8(out, a.flags);
		put32(out, static_cast<std::uint32_t>(a.value));
		break;
	}
	case ValueKind::Counter: {
		const auto& c = expect<CounterValue>(pv, spec);
		put8(out, c.flags);
		put32(out, c.value);
		break;
	}
	case ValueKind::Crob: {
		const auto& c = expect<Crob>(pv, spec);
		put8(out, c.code);
		put8(out, c.count);
		put32(out, c.on_ms);
		put32(out, c.off_ms);
		put8(out, static_cast<std::uint8_t>(c.status) & 0x7F);
		break;
	}
	case ValueKind::AnalogOutputCommand: {
		const auto& a = expect<AnalogOutputCommand>(pv, spec);
		put32(out, std::bit_cast<std::uint32_t>(a.value));
		put8(out, static_cast<std::uint8_t>(a.status) & 0x7F);
		break;
	}
	case ValueKind::Time: {
		const auto& t = expect<AbsoluteTime>(pv, spec);
		put48(out, t.ms);
		break;
	}
	case ValueKind::None: throw EncodeError("object carries no values");
	}
	if (spec.timed)
		put48(out, *pv.timestamp);
}

PointValue decode_value(Reader& r, const ObjectSpec& spec)
{
	r.need(spec.size, spec.name);
	PointValue pv;
	switch (spec.kind) {
	case ValueKind::Binary: {
		const auto f = r.u8();
		pv.data = BinaryValue{(f & flags::kState) != 0, static_cast<std::uint8_t>(f & 0x7F)};
		break;
	}
	case ValueKind::AnalogFloat: {
		const auto f = r.u8();
		pv.data = AnalogFloat{std::bit_cast<float>(r.u32()), f};
		break;
	}
	case ValueKind::AnalogInt: {
		const auto f = r.u8();
		pv.data = AnalogInt{static_cast<std::int32_t>(r.u32()), f};
		break;
	}
	case ValueKind::Counter: {
		const auto f = r.u8();
		pv.data = CounterValue{r.u32(), f};
		break;
	}
	case ValueKind::Crob: {
		Crob c;
		c.code = r.u8();
		c.count = r.u8();
		c.on_ms = r.u32();
		c.off_ms = r.u32();
		c.status = static_cast<CommandStatus>(r.u8() & 0x7F);
		pv.data = c;
		break;
	}
	case ValueKind::AnalogOutputCommand: {
		AnalogOutputCommand a;
		a.value = std::bit_cast<float>(r.u32());
		a.status = static_cast<CommandStatus>(r.u8() & 0x7F);
		pv.data = a;
		break;
	}
	case ValueKind::Time: pv.data = AbsoluteTime{r.u48()}; break;
	case ValueKind::None: throw DecodeError("object carries no values");
	}
	if (spec.timed)
		pv.timestamp = r.u48();
	return pv;
}

void encode_range(std::vector<std::uint8_t>& out, const ObjectHeader& h)
{
	switch (h.qualifier) {
	case Qualifier::StartStop8:
		if (h.start > 0xFF || h.stop > 0xFF)
			throw EncodeError("start-stop range exceeds one octet");
		put8(out, static_cast<std::uint8_t>(h.start));
		put8(out, static_cast<std::uint8_t>(h.stop));
		break;
	case Qualifier::StartStop16:
		put16(out, h.start);
		put16(out, h.stop);
		break;
	case Qualifier::AllObjects: break;
	case Qualifier::Count8:
	case Qualifier::CountIndex8:
		if (h.count > 0xFF)
			throw EncodeError("count exceeds one octet");
		put8(out, static_cast<std::uint8_t>(h.count));
		break;
	case Qualifier::CountIndex16: put16(out, h.count); break;
	}
}

} // namespace

// ---- enums and small types --------------------------------------------------

const char* to_string(FunctionCode fc)
{
	switch (fc) {
	case FunctionCode::Confirm: return "CONFIRM";
	case FunctionCode::Read: return "READ";
	case FunctionCode::Write: return "WRITE";
	case FunctionCode::Select: return "SELECT";
	case FunctionCode::Operate: return "OPERATE";
	case FunctionCode::DirectOperate: return "DIRECT_OPERATE";
	case FunctionCode::Response: return "RESPONSE";
	case FunctionCode::UnsolicitedResponse: return "UNSOLICITED_RESPONSE";
	}
	return "UNKNOWN";
}

bool is_response(FunctionCode fc)
{
	return fc == FunctionCode::Response || fc == FunctionCode::UnsolicitedResponse;
}

std::uint8_t AppControl::to_byte() const
{
	std::uint8_t b = seq & 0x0F;
	if (fir)
		b |= 0x80;
	if (fin)
		b |= 0x40;
	if (con)
		b |= 0x20;
	if (uns)
		b |= 0x10;
	return b;
}

AppControl AppControl::from_byte(std::uint8_t b)
{
	AppControl c;
	c.fir = (b & 0x80) != 0;
	c.fin = (b & 0x40) != 0;
	c.con = (b & 0x20) != 0;
	c.uns = (b & 0x10) != 0;
	c.seq = b & 0x0F;
	return c;
}

std::string iin::describe(std::uint16_t bits)
{
	static constexpr std::array<const char*, 16> kNames = {
		"BROADCAST", "CLASS_1_EVENTS", "CLASS_2_EVENTS", "CLASS_3_EVENTS",
		"NEED_TIME", "LOCAL_CONTROL", "DEVICE_TROUBLE", "DEVICE_RESTART",
		"NO_FUNC_CODE_SUPPORT", "OBJECT_UNKNOWN", "PARAMETER_ERROR", "EVENT_BUFFER_OVERFLOW",
		"ALREADY_EXECUTING", "CONFIG_CORRUPT", "RESERVED_2", "RESERVED_1",
	};
	std::string out;
	for (std::size_t i = 0; i < kNames.size(); ++i) {
		if ((bits & (1U << i)) == 0)
			continue;
		if (!out.empty())
			out += ',';
		out += kNames[i];
	}
	return out;
}

const char* to_string(Qualifier q)
{
	switch (q) {
	case Qualifier::StartStop8: return "q00";
	case Qualifier::StartStop16: return "q01";
	case Qualifier::AllObjects: return "q06";
	case Qualifier::Count8: return "q07";
	case Qualifier::CountIndex8: return "q17";
	case Qualifier::CountIndex16: return "q28";
	}
	return "q??";
}

std::size_t ObjectHeader::declared_count() const
{
	switch (qualifier) {
	case Qualifier::StartStop8:
	case Qualifier::StartStop16: return stop >= start ? static_cast<std::size_t>(stop - start) + 1 : 0;
	case Qualifier::AllObjects: return 0;
	case Qualifier::Count8:
	case Qualifier::CountIndex8:
	case Qualifier::CountIndex16: return count;
	}
	return 0;
}

ObjectHeader ObjectHeader::all(std::uint8_t group, std::uint8_t variation)
{
	return ObjectHeader{group, variation, Qualifier::AllObjects, 0, 0, 0};
}

ObjectHeader ObjectHeader::range(std::uint8_t group, std::uint8_t variation, std::uint16_t start, std::uint16_t stop)
{
	const auto q = stop <= 0xFF ? Qualifier::StartStop8 : Qualifier::StartStop16;
	return ObjectHeader{group, variation, q, start, stop, 0};
}

ObjectHeader ObjectHeader::indexed(std::uint8_t group, std::uint8_t variation, std::uint16_t count)
{
	return ObjectHeader{group, variation, Qualifier::CountIndex16, 0, 0, count};
}

const char* to_string(CommandStatus s)
{
	switch (s) {
	case CommandStatus::Success: return "SUCCESS";
	case CommandStatus::Timeout: return "TIMEOUT";
	case CommandStatus::NoSelect: return "NO_SELECT";
	case CommandStatus::FormatError: return "FORMAT_ERROR";
	case CommandStatus::NotSupported: return "NOT_SUPPORTED";
	case CommandStatus::AlreadyActive: return "ALREADY_ACTIVE";
	case CommandStatus::HardwareError: return "HARDWARE_ERROR";
	case CommandStatus::Local: return "LOCAL";
	case CommandStatus::TooManyObjs: return "TOO_MANY_OBJS";
	case CommandStatus::NotAuthorized: return "NOT_AUTHORIZED";
	}
	return "UNDEFINED";
}

std::optional<CommandStatus> command_status_from_string(std::string_view s)
{
	for (std::uint8_t i = 0; i <= 9; ++i) {
		const auto st = static_cast<CommandStatus>(i);
		if (s == to_string(st))
			return st;
	}
	return std::nullopt;
}

std::string control_code::describe(std::uint8_t code)
{
	std::string op;
	switch (code & 0x0F) {
	case kNul: op = "NUL"; break;
	case kPulseOn: op = "PULSE_ON"; break;
	case kPulseOff: op = "PULSE_OFF"; break;
	case kLatchOn: op = "LATCH_ON"; break;
	case kLatchOff: op = "LATCH_OFF"; break;
	default: op = fmt::format("OP_{}", code & 0x0F); break;
	}
	switch (code & 0xC0) {
	case 0x40: return "CLOSE_" + op;
	case 0x80: return "TRIP_" + op;
	default: return op;
	}
}

std::optional<bool> control_code::target_state(std::uint8_t code)
{
	switch (code & 0xC0) {
	case 0x40: return true;
	case 0x80: return false;
	default: break;
	}
	switch (code & 0x0F) {
	case kPulseOn:
	case kLatchOn: return true;
	case kPulseOff:
	case kLatchOff: return false;
	default: return std::nullopt;
	}
}

bool AnalogFloat::operator==(const AnalogFloat& o) const
{
	return std::bit_cast<std::uint32_t>(value) == std::bit_cast<std::uint32_t>(o.value) && flags == o.flags;
}

bool AnalogOutputCommand::operator==(const AnalogOutputCommand& o) const
{
	return std::bit_cast<std::uint32_t>(value) == std::bit_cast<std::uint32_t>(o.value) && status == o.status;
}

const ObjectSpec* find_object_spec(std::uint8_t group, std::uint8_t variation)
{
	for (const auto& s : kSpecs)
		if (s.group == group && s.variation == variation)
			return &s;
	return nullptr;
}

UnsupportedObject::UnsupportedObject(std::uint8_t group, std::uint8_t variation, std::uint8_t qualifier)
    : DecodeError(fmt::format("unsupported object g{}v{} qualifier 0x{:02X}", group, variation, qualifier))
    , group_(group)
    , variation_(variation)
    , qualifier_(qualifier)
{}

UnsupportedFunction::UnsupportedFunction(std::uint8_t code)
    : DecodeError(fmt::format("unsupported function code 0x{:02X}", code))
    , code_(code)
{}

// ---- fragment codec ---------------------------------------------------------

std::size_t header_size(Qualifier q)
{
	switch (q) {
	case Qualifier::StartStop8: return 5;
	case Qualifier::StartStop16: return 7;
	case Qualifier::AllObjects: return 3;
	case Qualifier::Count8:
	case Qualifier::CountIndex8: return 4;
	case Qualifier::CountIndex16: return 5;
	}
	return 3;
}

std::size_t encoded_block_size(const ObjectBlock& block)
{
	const auto* spec = find_object_spec(block.header.group, block.header.variation);
	std::size_t per = spec != nullptr ? spec->size : 0;
	if (block.header.qualifier == Qualifier::CountIndex8)
		per += 1;
	else if (block.header.qualifier == Qualifier::CountIndex16)
		per += 2;
	return header_size(block.header.qualifier) + per * block.values.size();
}

std::vector<std::uint8_t> encode_app_fragment(const AppFragment& frag)
{
	const auto ctx = context_for(frag.function);
	std::vector<std::uint8_t> out;
	out.reserve(64);
	put8(out, frag.control.to_byte());
	put8(out, static_cast<std::uint8_t>(frag.function));
	if (is_response(frag.function))
		put16(out, frag.iin);

	if (frag.function == FunctionCode::Confirm) {
		if (!frag.objects.empty())
			throw EncodeError("CONFIRM carries no objects");
		return out;
	}

	for (const auto& block : frag.objects) {
		const auto& h = block.header;
		const auto* spec = check_triple(ctx, h.group, h.variation, static_cast<std::uint8_t>(h.qualifier));
		if (is_start_stop(h.qualifier) && h.start > h.stop)
			throw EncodeError("start index exceeds stop index");
		put8(out, h.group);
		put8(out, h.variation);
		put8(out, static_cast<std::uint8_t>(h.qualifier));
		encode_range(out, h);

		if (!carries_values(ctx)) {
			if (!block.values.empty())
				throw EncodeError("read request headers carry no values");
			continue;
		}
		if (block.values.size() != h.declared_count())
			throw EncodeError(fmt::format("g{}v{} declares {} objects but holds {}", h.group, h.variation,
			                              h.declared_count(), block.values.size()));
		for (std::size_t i = 0; i < block.values.size(); ++i) {
			const auto& iv = block.values[i];
			if (is_start_stop(h.qualifier)) {
				if (iv.index != h.start + i)
					throw EncodeError("value index does not follow the start-stop range");
			} else if (h.qualifier == Qualifier::CountIndex8) {
				if (iv.index > 0xFF)
					throw EncodeError("index exceeds one octet");
				put8(out, static_cast<std::uint8_t>(iv.index));
			} else if (h.qualifier == Qualifier::CountIndex16) {
				put16(out, iv.index);
			}
			encode_value(out, *spec, iv.value);
		}
	}
	return out;
}

AppFragment decode_app_fragment(std::span<const std::uint8_t> bytes)
{
	Reader r(bytes);
	if (bytes.size() < 2)
		throw DecodeError("application fragment shorter than 2 octets");
	AppFragment frag;
	frag.control = AppControl::from_byte(r.u8());
	const auto fc = r.u8();
	if (!known_function(fc))
		throw UnsupportedFunction(fc);
	frag.function = static_cast<FunctionCode>(fc);
	if (is_response(frag.function))
		frag.iin = r.u16();
	if (frag.function == FunctionCode::Confirm)
		return frag;

	const auto ctx = context_for(frag.function);
	while (!r.empty()) {
		ObjectBlock block;
		auto& h = block.header;
		r.need(3, "object header");
		h.group = r.u8();
		h.variation = r.u8();
		const auto q = r.u8();
		const auto* spec = check_triple(ctx, h.group, h.variation, q);
		h.qualifier = static_cast<Qualifier>(q);
		switch (h.qualifier) {
		case Qualifier::StartStop8:
			h.start = r.u8();
			h.stop = r.u8();
			break;
		case Qualifier::StartStop16:
			h.start = r.u16();
			h.stop = r.u16();
			break;
		case Qualifier::AllObjects: break;
		case Qualifier::Count8:
		case Qualifier::CountIndex8: h.count = r.u8(); break;
		case Qualifier::CountIndex16: h.count = r.u16(); break;
		}
		if (is_start_stop(h.qualifier) && h.start > h.stop)
			throw DecodeError(fmt::format("g{}v{} start {} exceeds stop {}", h.group, h.variation, h.start, h.stop));

		if (carries_values(ctx)) {
			const auto n = h.declared_count();
			const std::size_t index_size =
			    h.qualifier == Qualifier::CountIndex8 ? 1 : (h.qualifier == Qualifier::CountIndex16 ? 2 : 0);
			// bound the allocation by what the buffer can actually hold
			r.need(n * (spec->size + index_size), "object values");
			block.values.reserve(n);
			for (std::size_t i = 0; i < n; ++i) {
				IndexedValue iv;
				if (index_size == 1)
					iv.index = r.u8();
				else if (index_size == 2)
					iv.index = r.u16();
				else
					iv.index = static_cast<std::uint16_t>(h.start + i);
				iv.value = decode_value(r, *spec);
				block.values.push_back(std::move(iv));
			}
		}
		frag.objects.push_back(std::move(block));
	}
	return frag;
}

namespace {

std::string describe_value(const PointValue& pv)
{
	struct Visitor
	{
		std::string operator()(const BinaryValue& b) const { return b.value ? "true" : "false"; }
		std::string operator()(const AnalogFloat& a) const { return fmt::format("{}", a.value); }
		std::string operator()(const AnalogInt& a) const { return fmt::format("{}", a.value); }
		std::string operator()(const CounterValue& c) const { return fmt::format("{}", c.value); }
		std::string operator()(const Crob& c) const
		{
			return fmt::format("{}/{}", control_code::describe(c.code), to_string(c.status));
		}
		std::string operator()(const AnalogOutputCommand& a) const
		{
			return fmt::format("{}/{}", a.value, to_string(a.status));
		}
		std::string operator()(const AbsoluteTime& t) const { return fmt::format("t={}", t.ms); }
	};
	auto s = std::visit(Visitor{}, pv.data);
	if (pv.timestamp)
		s += fmt::format("@{}", *pv.timestamp);
	return s;
}

} // namespace

std::string describe(const AppFragment& frag)
{
	std::string out = fmt::format("{} seq={}", to_string(frag.function), frag.control.seq);
	if (frag.control.fir)
		out += " FIR";
	if (frag.control.fin)
		out += " FIN";
	if (frag.control.con)
		out += " CON";
	if (frag.control.uns)
		out += " UNS";
	if (is_response(frag.function))
		out += fmt::format(" iin=0x{:04X}", frag.iin);
	for (const auto& b : frag.objects) {
		const auto& h = b.header;
		out += fmt::format(" | g{}v{} {}", h.group, h.variation, to_string(h.qualifier));
		switch (h.qualifier) {
		case Qualifier::StartStop8:
		case Qualifier::StartStop16: out += fmt::format(" [{}..{}]", h.start, h.stop); break;
		case Qualifier::AllObjects: break;
		default: out += fmt::format(" n={}", h.count); break;
		}
		std::size_t shown = 0;
		for (const auto& iv : b.values) {
			if (shown++ == 8) {
				out += " ...";
				break;
			}
			out += fmt::format(" {}={}", iv.index, describe_value(iv.value));
		}
	}
	return out;
}

} // namespace gridtb::dnp3
