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

#include "gridtb/dnp3/crc.hpp"

#include <array>

namespace gridtb::dnp3 {

namespace {

// 0xA6BC is 0x3D65 bit-reversed.
constexpr std::uint16_t kReflectedPoly = 0xA6BC;

constexpr std::array<std::uint16_t, 256> make_table()
{
	std::array<std::uint16_t, 256> table{};
	for (unsigned i = 0; i < 256; ++i) {
		std::uint16_t crc = static_cast<std::uint16_t>(i);
		for (int bit = 0; bit < 8; ++bit)
			crc = (crc & 1U) ? static_cast<std::uint16_t>((crc >> 1) ^ kReflectedPoly)
			                 : static_cast<std::uint16_t>(crc >> 1);
		table[i] = crc;
	}
	return table;
}

constexpr auto kTable = make_table();

} // namespace

std::uint16_t crc_dnp(std::span<const std::uint8_t> block)
{
	std::uint16_t crc = 0;
	for (auto b : block)
		crc = static_cast<std::uint16_t>((crc >> 8) ^ kTable[(crc ^ b) & 0xFF]);
	return static_cast<std::uint16_t>(~crc);
}

bool verify_block(std::span<const std::uint8_t> block_with_crc)
{
	if (block_with_crc.size() < 3)
		return false;
	const auto data = block_with_crc.first(block_with_crc.size() - 2);
	const auto crc = crc_dnp(data);
	const auto lo = block_with_crc[block_with_crc.size() - 2];
	const auto hi = block_with_crc[block_with_crc.size() - 1];
	return lo == (crc & 0xFF) && hi == (crc >> 8);
}

void append_block(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> block)
{
	out.insert(out.end(), block.begin(), block.end());
	const auto crc = crc_dnp(block);
	out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
	out.push_back(static_cast<std::uint8_t>(crc >> 8));
}

} // namespace gridtb::dnp3
