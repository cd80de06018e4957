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

#include "gridtb/dnp3/app.hpp"
#include "gridtb/dnp3/link.hpp"
#include "gridtb/dnp3/transport.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace gridtb::dnp3 {

/// Segments an application fragment and wraps each segment in an unconfirmed
/// user-data link frame. `transport_seq` is advanced past the segments used.
std::vector<std::uint8_t> wrap_fragment(const AppFragment& frag, std::uint16_t source, std::uint16_t destination,
                                        bool from_master, std::uint8_t& transport_seq);

/// Link frame with its reassembled application fragment, if it completed one.
struct StackItem
{
	LinkFrame frame;
	std::optional<std::vector<std::uint8_t>> fragment;
};

/// Receive side of a TCP byte stream: link parsing plus transport
/// reassembly keyed by (source, destination).
class StackReader
{
public:
	explicit StackReader(std::size_t max_fragment = kDefaultMaxFragment) : max_fragment_(max_fragment) {}

	void feed(std::span<const std::uint8_t> bytes) { parser_.feed(bytes); }
	/// Next link frame. User-data frames carry a fragment once their FIN
	/// segment arrives. Overflowing fragments are dropped and counted.
	std::optional<StackItem> next();

	const LinkParser& parser() const { return parser_; }
	std::uint64_t overflows() const { return overflows_; }

private:
	std::size_t max_fragment_;
	LinkParser parser_;
	std::map<std::pair<std::uint16_t, std::uint16_t>, TransportReassembler> reassembly_;
	std::uint64_t overflows_ = 0;
};

} // namespace gridtb::dnp3
