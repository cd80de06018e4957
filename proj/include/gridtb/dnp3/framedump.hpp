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

#include "gridtb/dnp3/link.hpp"
#include "gridtb/dnp3/transport.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridtb::dnp3 {

enum class Direction
{
	MasterToOutstation,
	OutstationToMaster,
};

/// Renders a byte stream as one text line per link frame.
///
/// Each direction keeps its own link parser and per-address transport
/// reassembly, so a capture with interleaved directions renders correctly.
class FrameDumper
{
public:
	std::vector<std::string> feed(Direction dir, std::span<const std::uint8_t> bytes);

private:
	struct Stream
	{
		LinkParser parser;
		std::map<std::pair<std::uint16_t, std::uint16_t>, TransportReassembler> reassembly;
	};
	std::string render(Direction dir, Stream& stream, const LinkFrame& frame);

	Stream streams_[2];
};

/// One recorded chunk of a capture file.
struct CaptureRecord
{
	Direction direction;
	std::vector<std::uint8_t> bytes;
};

/// Capture text format: one chunk per line, `>` (master to outstation) or `<`
/// (outstation to master) followed by hex octets; blank lines and `#` comments
/// are ignored. Throws std::invalid_argument naming the bad line.
std::vector<CaptureRecord> parse_capture(std::string_view text);
std::string format_capture_line(Direction dir, std::span<const std::uint8_t> bytes);

/// Renders a whole capture; empty capture gives no lines.
std::vector<std::string> dump_capture(std::string_view text);

} // namespace gridtb::dnp3
