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

#include "gridtb/dnp3/framedump.hpp"

#include "gridtb/dnp3/app.hpp"

#include <cctype>
#include <fmt/format.h>
#include <stdexcept>

namespace gridtb::dnp3 {

std::vector<std::string> FrameDumper::feed(Direction dir, std::span<const std::uint8_t> bytes)
{
	auto& stream = streams_[dir == Direction::MasterToOutstation ? 0 : 1];
	stream.parser.feed(bytes);
	std::vector<std::string> lines;
	const auto crc_before = stream.parser.crc_errors() + stream.parser.length_errors();
	while (auto frame = stream.parser.next())
		lines.push_back(render(dir, stream, *frame));
	const auto bad = stream.parser.crc_errors() + stream.parser.length_errors() - crc_before;
	if (bad > 0)
		lines.push_back(fmt::format("{} !! {} corrupt frame(s) skipped", dir == Direction::MasterToOutstation ? '>' : '<', bad));
	return lines;
}

std::string FrameDumper::render(Direction dir, Stream& stream, const LinkFrame& frame)
{
	std::string line = fmt::format("{} {}->{} {}", dir == Direction::MasterToOutstation ? '>' : '<', frame.source,
	                               frame.destination, describe_link_function(frame.control));
	const bool user_data = frame.control.prm && (frame.control.function == link_func::kUnconfirmedUserData ||
	                                             frame.control.function == link_func::kConfirmedUserData);
	if (!user_data || frame.user_data.empty())
		return line;

	const auto seg = TransportSegment::from_bytes(frame.user_data);
	line += fmt::format(" | T{}{} seq={}", seg.fir ? " FIR" : "", seg.fin ? " FIN" : "", seg.sequence);
	auto& reassembler = stream.reassembly[{frame.source, frame.destination}];
	try {
		auto app = reassembler.push(seg);
		if (!app)
			return line + " (partial)";
		line += " | " + describe(decode_app_fragment(*app));
	} catch (const std::exception& e) {
		line += fmt::format(" | error: {}", e.what());
	}
	return line;
}

std::vector<CaptureRecord> parse_capture(std::string_view text)
{
	std::vector<CaptureRecord> records;
	std::size_t line_no = 0;
	while (!text.empty()) {
		const auto nl = text.find('\n');
		auto line = text.substr(0, nl);
		text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
		++line_no;

		while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front())))
			line.remove_prefix(1);
		if (line.empty() || line.front() == '#')
			continue;

		CaptureRecord rec;
		if (line.front() == '>')
			rec.direction = Direction::MasterToOutstation;
		else if (line.front() == '<')
			rec.direction = Direction::OutstationToMaster;
		else
			throw std::invalid_argument(fmt::format("capture line {}: expected '>' or '<'", line_no));
		line.remove_prefix(1);

		int high = -1;
		for (char c : line) {
			if (std::isspace(static_cast<unsigned char>(c)))
				continue;
			if (!std::isxdigit(static_cast<unsigned char>(c)))
				throw std::invalid_argument(fmt::format("capture line {}: bad hex digit '{}'", line_no, c));
			const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
			if (high < 0) {
				high = v;
			} else {
				rec.bytes.push_back(static_cast<std::uint8_t>((high << 4) | v));
				high = -1;
			}
		}
		if (high >= 0)
			throw std::invalid_argument(fmt::format("capture line {}: odd number of hex digits", line_no));
		records.push_back(std::move(rec));
	}
	return records;
}

std::string format_capture_line(Direction dir, std::span<const std::uint8_t> bytes)
{
	std::string out(1, dir == Direction::MasterToOutstation ? '>' : '<');
	for (auto b : bytes)
		out += fmt::format(" {:02X}", b);
	return out;
}

std::vector<std::string> dump_capture(std::string_view text)
{
	FrameDumper dumper;
	std::vector<std::string> lines;
	for (const auto& rec : parse_capture(text)) {
		auto more = dumper.feed(rec.direction, rec.bytes);
		lines.insert(lines.end(), more.begin(), more.end());
	}
	return lines;
}

} // namespace gridtb::dnp3
