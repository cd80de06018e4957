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

#include "gridtb/dnp3/transport.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace gridtb::dnp3 {

std::vector<std::uint8_t> TransportSegment::to_bytes() const
{
	std::vector<std::uint8_t> out;
	out.reserve(payload.size() + 1);
	std::uint8_t header = sequence & 0x3F;
	if (fin)
		header |= 0x80;
	if (fir)
		header |= 0x40;
	out.push_back(header);
	out.insert(out.end(), payload.begin(), payload.end());
	return out;
}

TransportSegment TransportSegment::from_bytes(std::span<const std::uint8_t> bytes)
{
	if (bytes.empty())
		throw std::invalid_argument("empty transport segment");
	TransportSegment seg;
	seg.fin = (bytes[0] & 0x80) != 0;
	seg.fir = (bytes[0] & 0x40) != 0;
	seg.sequence = bytes[0] & 0x3F;
	seg.payload.assign(bytes.begin() + 1, bytes.end());
	return seg;
}

std::vector<TransportSegment> transport_segment(std::span<const std::uint8_t> app_bytes, std::uint8_t seq0)
{
	std::vector<TransportSegment> out;
	std::uint8_t seq = seq0 & 0x3F;
	std::size_t offset = 0;
	do {
		const auto n = std::min(kMaxTransportPayload, app_bytes.size() - offset);
		TransportSegment seg;
		seg.fir = offset == 0;
		seg.fin = offset + n == app_bytes.size();
		seg.sequence = seq;
		seg.payload.assign(app_bytes.begin() + static_cast<std::ptrdiff_t>(offset),
		                   app_bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
		out.push_back(std::move(seg));
		offset += n;
		seq = (seq + 1) & 0x3F;
	} while (offset < app_bytes.size());
	return out;
}

std::optional<std::vector<std::uint8_t>> TransportReassembler::push(const TransportSegment& seg)
{
	if (seg.fir) {
		if (active_)
			++discarded_;
		buffer_.clear();
		active_ = true;
	} else if (!active_) {
		++discarded_;
		return std::nullopt;
	} else if (seg.sequence != expected_seq_) {
		++discarded_;
		reset();
		return std::nullopt;
	}

	if (buffer_.size() + seg.payload.size() > max_fragment_) {
		const auto size = buffer_.size() + seg.payload.size();
		reset();
		throw TransportOverflow(fmt::format("reassembled fragment of {} octets exceeds {}", size, max_fragment_));
	}
	buffer_.insert(buffer_.end(), seg.payload.begin(), seg.payload.end());
	expected_seq_ = (seg.sequence + 1) & 0x3F;

	if (!seg.fin)
		return std::nullopt;
	auto done = std::move(buffer_);
	reset();
	return done;
}

void TransportReassembler::reset()
{
	buffer_.clear();
	active_ = false;
}

} // namespace gridtb::dnp3
