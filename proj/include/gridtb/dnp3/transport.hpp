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
#include <vector>

namespace gridtb::dnp3 {

inline constexpr std::size_t kMaxTransportPayload = 249;
inline constexpr std::size_t kDefaultMaxFragment = 2048;

struct TransportSegment
{
	bool fin = true;
	bool fir = true;
	std::uint8_t sequence = 0; // 0..63
	std::vector<std::uint8_t> payload;

	std::vector<std::uint8_t> to_bytes() const;
	/// Throws std::invalid_argument on an empty span.
	static TransportSegment from_bytes(std::span<const std::uint8_t> bytes);

	bool operator==(const TransportSegment&) const = default;
};

std::vector<TransportSegment> transport_segment(std::span<const std::uint8_t> app_bytes, std::uint8_t seq0);

class TransportOverflow : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Per-session reassembly state. Segments must be pushed in link order.
class TransportReassembler
{
public:
	explicit TransportReassembler(std::size_t max_fragment = kDefaultMaxFragment)
	    : max_fragment_(max_fragment)
	{}

	/// Returns the completed fragment on FIN. A FIR segment always restarts the
	/// buffer; a non-FIR segment that is out of sequence (or arrives with no
	/// buffer in progress) drops whatever was buffered.
	std::optional<std::vector<std::uint8_t>> push(const TransportSegment& seg);

	void reset();
	bool in_progress() const { return active_; }
	std::uint64_t discarded() const { return discarded_; }

private:
	std::size_t max_fragment_;
	std::vector<std::uint8_t> buffer_;
	bool active_ = false;
	std::uint8_t expected_seq_ = 0;
	std::uint64_t discarded_ = 0;
};

} // namespace gridtb::dnp3
