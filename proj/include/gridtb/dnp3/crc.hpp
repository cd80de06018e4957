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
#include <span>
#include <vector>

namespace gridtb::dnp3 {

/// DNP3 link-layer CRC (reflected 0x3D65, inverted result).
/// The returned value is transmitted low octet first.
std::uint16_t crc_dnp(std::span<const std::uint8_t> block);

/// True when the last two octets of `block_with_crc` are the CRC of the rest.
bool verify_block(std::span<const std::uint8_t> block_with_crc);

/// Appends `block` followed by its CRC.
void append_block(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> block);

} // namespace gridtb::dnp3
