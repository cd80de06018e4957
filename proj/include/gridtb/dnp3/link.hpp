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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridtb::dnp3 {

inline constexpr std::size_t kMaxLinkUserData = 250;
inline constexpr std::size_t kLinkHeaderSize = 10; // 8 octets + CRC
inline constexpr std::size_t kMaxLinkFrameSize = 292;

namespace link_func {
// primary (PRM = 1)
inline constexpr std::uint8_t kResetLinkStates = 0x00;
inline constexpr std::uint8_t kTestLinkStates = 0x02;
inline constexpr std::uint8_t kConfirmedUserData = 0x03;
inline constexpr std::uint8_t kUnconfirmedUserData = 0x04;
inline constexpr std::uint8_t kRequestLinkStatus = 0x09;
// secondary (PRM = 0)
inline constexpr std::uint8_t kAck = 0x00;
inline constexpr std::uint8_t kNack = 0x01;
inline constexpr std::uint8_t kLinkStatus = 0x0B;
inline constexpr std::uint8_t kNotSupported = 0x0F;
} // namespace link_func

struct LinkControl
{
	bool dir = false; // set on frames sent by the master
	bool prm = true;
	bool fcb = false;
	bool fcv = false; // doubles as DFC on secondary frames
	std::uint8_t function = link_func::kUnconfirmedUserData;

	std::uint8_t to_byte() const;
	static LinkControl from_byte(std::uint8_t b);
	bool operator==(const LinkControl&) const = default;
};

struct LinkFrame
{
	LinkControl control;
	std::uint16_t destination = 0;
	std::uint16_t source = 0;
	std::vector<std::uint8_t> user_data;

	bool operator==(const LinkFrame&) const = default;
};

class LinkError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_link_frame(const LinkFrame& frame);

enum class LinkDecodeStatus
{
	Ok,
	NeedMore,
	CrcMismatch,
	BadLength,
};

const char* to_string(LinkDecodeStatus s);

struct LinkDecodeResult
{
	LinkDecodeStatus status = LinkDecodeStatus::NeedMore;
	std::optional<LinkFrame> frame;
	// Octets the caller may drop from the front of the buffer: skipped garbage,
	// plus the whole frame on success or the sync pair on an error.
	std::size_t consumed = 0;
	// Octets of garbage skipped before the sync pair.
	std::size_t skipped = 0;
};

/// Decodes at most one frame from the front of `bytes`.
LinkDecodeResult decode_link_frame(std::span<const std::uint8_t> bytes);

/// Stream wrapper around decode_link_frame for a TCP byte stream.
class LinkParser
{
public:
	void feed(std::span<const std::uint8_t> bytes);
	std::optional<LinkFrame> next();

	std::size_t buffered() const { return buffer_.size(); }
	std::uint64_t frames() const { return frames_; }
	std::uint64_t garbage_octets() const { return garbage_; }
	std::uint64_t crc_errors() const { return crc_errors_; }
	std::uint64_t length_errors() const { return length_errors_; }

private:
	std::vector<std::uint8_t> buffer_;
	std::uint64_t frames_ = 0;
	std::uint64_t garbage_ = 0;
	std::uint64_t crc_errors_ = 0;
	std::uint64_t length_errors_ = 0;
};

std::string describe_link_function(const LinkControl& c);

} // namespace gridtb::dnp3
