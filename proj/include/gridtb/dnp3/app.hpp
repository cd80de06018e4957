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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gridtb::dnp3 {

enum class FunctionCode : std::uint8_t
{
	Confirm = 0x00,
	Read = 0x01,
	Write = 0x02,
	Select = 0x03,
	Operate = 0x04,
	DirectOperate = 0x05,
	Response = 0x81,
	UnsolicitedResponse = 0x82,
};

const char* to_string(FunctionCode fc);
bool is_response(FunctionCode fc);

struct AppControl
{
	bool fir = true;
	bool fin = true;
	bool con = false;
	bool uns = false;
	std::uint8_t seq = 0; // 0..15

	std::uint8_t to_byte() const;
	static AppControl from_byte(std::uint8_t b);
	bool operator==(const AppControl&) const = default;
};

/// Internal indications. IIN1 occupies the low octet, IIN2 the high octet.
namespace iin {
inline constexpr std::uint16_t kBroadcast = 0x0001;
inline constexpr std::uint16_t kClass1Events = 0x0002;
inline constexpr std::uint16_t kClass2Events = 0x0004;
inline constexpr std::uint16_t kClass3Events = 0x0008;
inline constexpr std::uint16_t kNeedTime = 0x0010;
inline constexpr std::uint16_t kLocalControl = 0x0020;
inline constexpr std::uint16_t kDeviceTrouble = 0x0040;
inline constexpr std::uint16_t kDeviceRestart = 0x0080;
inline constexpr std::uint16_t kNoFuncCodeSupport = 0x0100;
inline constexpr std::uint16_t kObjectUnknown = 0x0200;
inline constexpr std::uint16_t kParameterError = 0x0400;
inline constexpr std::uint16_t kEventBufferOverflow = 0x0800;
inline constexpr std::uint16_t kAlreadyExecuting = 0x1000;
inline constexpr std::uint16_t kConfigCorrupt = 0x2000;

std::string describe(std::uint16_t bits);
} // namespace iin

/// Quality flag octet shared by binary, analog and counter objects.
namespace flags {
inline constexpr std::uint8_t kOnline = 0x01;
inline constexpr std::uint8_t kRestart = 0x02;
inline constexpr std::uint8_t kCommLost = 0x04;
inline constexpr std::uint8_t kRemoteForced = 0x08;
inline constexpr std::uint8_t kLocalForced = 0x10;
inline constexpr std::uint8_t kOverRange = 0x20;
inline constexpr std::uint8_t kState = 0x80; // binary objects only
} // namespace flags

enum class Qualifier : std::uint8_t
{
	StartStop8 = 0x00,
	StartStop16 = 0x01,
	AllObjects = 0x06,
	Count8 = 0x07,
	CountIndex8 = 0x17,
	CountIndex16 = 0x28,
};

const char* to_string(Qualifier q);

struct ObjectHeader
{
	std::uint8_t group = 0;
	std::uint8_t variation = 0;
	Qualifier qualifier = Qualifier::AllObjects;
	std::uint16_t start = 0; // start-stop qualifiers
	std::uint16_t stop = 0;
	std::uint16_t count = 0; // count qualifiers

	/// Number of objects the range field declares (0 for all-objects).
	std::size_t declared_count() const;
	bool operator==(const ObjectHeader&) const = default;

	static ObjectHeader all(std::uint8_t group, std::uint8_t variation);
	static ObjectHeader range(std::uint8_t group, std::uint8_t variation, std::uint16_t start, std::uint16_t stop);
	static ObjectHeader indexed(std::uint8_t group, std::uint8_t variation, std::uint16_t count);
};

/// CROB status and analog output status codes.
enum class CommandStatus : std::uint8_t
{
	Success = 0,
	Timeout = 1,
	NoSelect = 2,
	FormatError = 3,
	NotSupported = 4,
	AlreadyActive = 5,
	HardwareError = 6,
	Local = 7,
	TooManyObjs = 8,
	NotAuthorized = 9,
};

const char* to_string(CommandStatus s);
std::optional<CommandStatus> command_status_from_string(std::string_view s);

/// CROB control code octet: op type in the low nibble, trip/close in bits 6-7.
namespace control_code {
inline constexpr std::uint8_t kNul = 0x00;
inline constexpr std::uint8_t kPulseOn = 0x01;
inline constexpr std::uint8_t kPulseOff = 0x02;
inline constexpr std::uint8_t kLatchOn = 0x03;
inline constexpr std::uint8_t kLatchOff = 0x04;
inline constexpr std::uint8_t kClose = 0x41; // PULSE_ON + CLOSE
inline constexpr std::uint8_t kTrip = 0x81;  // PULSE_ON + TRIP

std::string describe(std::uint8_t code);
/// True for codes that mean close/on, false for open/off, nullopt for NUL or unknown.
std::optional<bool> target_state(std::uint8_t code);
} // namespace control_code

struct BinaryValue
{
	bool value = false;
	std::uint8_t flags = flags::kOnline; // state bit is carried in `value`
	bool operator==(const BinaryValue&) const = default;
};

struct AnalogFloat
{
	float value = 0.0F;
	std::uint8_t flags = flags::kOnline;
	bool operator==(const AnalogFloat& o) const;
};

struct AnalogInt
{
	std::int32_t value = 0;
	std::uint8_t flags = flags::kOnline;
	bool operator==(const AnalogInt&) const = default;
};

struct CounterValue
{
	std::uint32_t value = 0;
	std::uint8_t flags = flags::kOnline;
	bool operator==(const CounterValue&) const = default;
};

struct Crob
{
	std::uint8_t code = control_code::kLatchOn;
	std::uint8_t count = 1;
	std::uint32_t on_ms = 0;
	std::uint32_t off_ms = 0;
	CommandStatus status = CommandStatus::Success;
	bool operator==(const Crob&) const = default;
};

struct AnalogOutputCommand
{
	float value = 0.0F;
	CommandStatus status = CommandStatus::Success;
	bool operator==(const AnalogOutputCommand& o) const;
};

/// g50v1 absolute time (ms since the Unix epoch, 48-bit on the wire).
struct AbsoluteTime
{
	std::uint64_t ms = 0;
	bool operator==(const AbsoluteTime&) const = default;
};

struct PointValue
{
	std::variant<BinaryValue, AnalogFloat, AnalogInt, CounterValue, Crob, AnalogOutputCommand, AbsoluteTime> data;
	std::optional<std::uint64_t> timestamp; // event variations only

	bool operator==(const PointValue&) const = default;
};

struct IndexedValue
{
	std::uint16_t index = 0;
	PointValue value;
	bool operator==(const IndexedValue&) const = default;
};

/// One object header and its values. For start-stop qualifiers the indices
/// are implied by the range; for count-with-index they travel with each value.
struct ObjectBlock
{
	ObjectHeader header;
	std::vector<IndexedValue> values;
	bool operator==(const ObjectBlock&) const = default;
};

struct AppFragment
{
	AppControl control;
	FunctionCode function = FunctionCode::Read;
	std::uint16_t iin = 0; // responses only
	std::vector<ObjectBlock> objects;

	bool operator==(const AppFragment&) const = default;
};

/// Wire description of a supported (group, variation).
enum class ValueKind
{
	None, // class data and "any variation" requests
	Binary,
	AnalogFloat,
	AnalogInt,
	Counter,
	Crob,
	AnalogOutputCommand,
	Time,
};

struct ObjectSpec
{
	std::uint8_t group;
	std::uint8_t variation;
	ValueKind kind;
	std::size_t size; // octets per object, excluding any index prefix
	bool timed;
	const char* name;
};

/// nullptr when the pair is not in the supported set.
const ObjectSpec* find_object_spec(std::uint8_t group, std::uint8_t variation);

class DecodeError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

class UnsupportedObject : public DecodeError
{
public:
	UnsupportedObject(std::uint8_t group, std::uint8_t variation, std::uint8_t qualifier);
	std::uint8_t group() const { return group_; }
	std::uint8_t variation() const { return variation_; }
	std::uint8_t qualifier() const { return qualifier_; }

private:
	std::uint8_t group_, variation_, qualifier_;
};

class UnsupportedFunction : public DecodeError
{
public:
	explicit UnsupportedFunction(std::uint8_t code);
	std::uint8_t code() const { return code_; }

private:
	std::uint8_t code_;
};

class EncodeError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_app_fragment(const AppFragment& frag);
AppFragment decode_app_fragment(std::span<const std::uint8_t> bytes);

/// Encoded size of one header plus its values.
std::size_t encoded_block_size(const ObjectBlock& block);
std::size_t header_size(Qualifier q);

std::string describe(const AppFragment& frag);

} // namespace gridtb::dnp3
