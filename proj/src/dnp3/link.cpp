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

#include "gridtb/dnp3/link.hpp"

#include "gridtb/dnp3/crc.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace gridtb::dnp3 {

namespace {

constexpr std::uint8_t kSync0 = 0x05;
constexpr std::uint8_t kSync1 = 0x64;
constexpr std::size_t kBlockSize = 16;

std::size_t body_size_on_wire(std::size_t user_len)
{
	const auto blocks = (user_len + kBlockSize - 1) / kBlockSize;
	return user_len + 2 * blocks;
}

} // namespace

std::uint8_t LinkControl::to_byte() const
{
	std::uint8_t b = function & 0x0F;
	if (dir)
		b |= 0x80;
	if (prm)
		b |= 0x40;
	if (fcb)
		b |= 0x20;
	if (fcv)
		b |= 0x10;
	return b;
}

LinkControl LinkControl::from_byte(std::uint8_t b)
{
	LinkControl c;
	c.dir = (b & 0x80) != 0;
	c.prm = (b & 0x40) != 0;
	c.fcb = (b & 0x20) != 0;
	c.fcv = (b & 0x10) != 0;
	c.function = b & 0x0F;
	return c;
}

std::vector<std::uint8_t> encode_link_frame(const LinkFrame& frame)
{
	if (frame.user_data.size() > kMaxLinkUserData)
		throw LinkError(fmt::format("link user data of {} octets exceeds {}", frame.user_data.size(), kMaxLinkUserData));

	std::vector<std::uint8_t> out;
	out.reserve(kLinkHeaderSize + body_size_on_wire(frame.user_data.size()));
	const std::uint8_t header[8] = {
		kSync0,
		kSync1,
		static_cast<std::uint8_t>(5 + frame.user_data.size()),
		frame.control.to_byte(),
		static_cast<std::uint8_t>(frame.destination & 0xFF),
		static_cast<std::uint8_t>(frame.destination >> 8),
		static_cast<std::uint8_t>(frame.source & 0xFF),
		static_cast<std::uint8_t>(frame.source >> 8),
	};
	append_block(out, header);

	std::span<const std::uint8_t> body(frame.user_data);
	while (!body.empty()) {
		const auto n = std::min(body.size(), kBlockSize);
		append_block(out, body.first(n));
		body = body.subspan(n);
	}
	return out;
}

const char* to_string(LinkDecodeStatus s)
{
	switch (s) {
	case LinkDecodeStatus::Ok: return "ok";
	case LinkDecodeStatus::NeedMore: return "need-more";
	case LinkDecodeStatus::CrcMismatch: return "crc-mismatch";
	case LinkDecodeStatus::BadLength: return "bad-length";
	}
	return "?";
}

LinkDecodeResult decode_link_frame(std::span<const std::uint8_t> bytes)
{
	LinkDecodeResult r;

	std::size_t pos = 0;
	while (pos + 1 < bytes.size() && !(bytes[pos] == kSync0 && bytes[pos + 1] == kSync1))
		++pos;
	if (pos + 1 >= bytes.size()) {
		// keep a trailing 0x05, it may be the first half of a sync pair
		const bool keep_last = !bytes.empty() && bytes.back() == kSync0;
		r.skipped = keep_last ? bytes.size() - 1 : bytes.size();
		r.consumed = r.skipped;
		return r;
	}
	r.skipped = pos;
	r.consumed = pos;

	const auto rest = bytes.subspan(pos);
	if (rest.size() < kLinkHeaderSize)
		return r;

	if (!verify_block(rest.first(kLinkHeaderSize))) {
		r.status = LinkDecodeStatus::CrcMismatch;
		r.consumed = pos + 2;
		return r;
	}
	const std::size_t length = rest[2];
	if (length < 5) {
		r.status = LinkDecodeStatus::BadLength;
		r.consumed = pos + 2;
		return r;
	}
	const std::size_t user_len = length - 5;
	const std::size_t total = kLinkHeaderSize + body_size_on_wire(user_len);
	if (rest.size() < total)
		return r;

	LinkFrame frame;
	frame.control = LinkControl::from_byte(rest[3]);
	frame.destination = static_cast<std::uint16_t>(rest[4] | (rest[5] << 8));
	frame.source = static_cast<std::uint16_t>(rest[6] | (rest[7] << 8));
	frame.user_data.reserve(user_len);

	std::size_t offset = kLinkHeaderSize;
	std::size_t remaining = user_len;
	while (remaining > 0) {
		const auto n = std::min(remaining, kBlockSize);
		const auto block = rest.subspan(offset, n + 2);
		if (!verify_block(block)) {
			r.status = LinkDecodeStatus::CrcMismatch;
			r.consumed = pos + 2;
			return r;
		}
		frame.user_data.insert(frame.user_data.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(n));
		offset += n + 2;
		remaining -= n;
	}

	r.status = LinkDecodeStatus::Ok;
	r.frame = std::move(frame);
	r.consumed = pos + total;
	return r;
}

void LinkParser::feed(std::span<const std::uint8_t> bytes)
{
	buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<LinkFrame> LinkParser::next()
{
	while (!buffer_.empty()) {
		auto r = decode_link_frame(buffer_);
		garbage_ += r.skipped;
		buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
		switch (r.status) {
		case LinkDecodeStatus::Ok:
			++frames_;
			return std::move(r.frame);
		case LinkDecodeStatus::NeedMore:
			return std::nullopt;
		case LinkDecodeStatus::CrcMismatch:
			++crc_errors_;
			break;
		case LinkDecodeStatus::BadLength:
			++length_errors_;
			break;
		}
	}
	return std::nullopt;
}

std::string describe_link_function(const LinkControl& c)
{
	if (c.prm) {
		switch (c.function) {
		case link_func::kResetLinkStates: return "RESET_LINK_STATES";
		case link_func::kTestLinkStates: return "TEST_LINK_STATES";
		case link_func::kConfirmedUserData: return "CONFIRMED_USER_DATA";
		case link_func::kUnconfirmedUserData: return "UNCONFIRMED_USER_DATA";
		case link_func::kRequestLinkStatus: return "REQUEST_LINK_STATUS";
		default: break;
		}
	} else {
		switch (c.function) {
		case link_func::kAck: return "ACK";
		case link_func::kNack: return "NACK";
		case link_func::kLinkStatus: return "LINK_STATUS";
		case link_func::kNotSupported: return "NOT_SUPPORTED";
		default: break;
		}
	}
	return fmt::format("LINK_FUNC_{}", c.function);
}

} // namespace gridtb::dnp3
