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

// Reference implementations used only by tests. Each one takes a different
// route from the production code it checks.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gridtb::oracle {

/// Bit-serial DNP3 CRC: MSB-first shift register over the unreflected
/// polynomial 0x3D65, input bits fed LSB-first, register reflected and
/// inverted at the end.
inline std::uint16_t crc_bitserial(std::span<const std::uint8_t> data)
{
	constexpr std::uint16_t kPoly = 0x3D65; // x^13+x^12+x^11+x^10+x^8+x^6+x^5+x^2+1 (x^16 implied)
	std::uint16_t reg = 0;
	for (auto byte : data) {
		for (int i = 0; i < 8; ++i) {
			const bool in = ((byte >> i) & 1U) != 0;
			const bool top = (reg & 0x8000U) != 0;
			reg = static_cast<std::uint16_t>(reg << 1);
			if (in != top)
				reg ^= kPoly;
		}
	}
	std::uint16_t reflected = 0;
	for (int i = 0; i < 16; ++i)
		if ((reg >> i) & 1U)
			reflected |= static_cast<std::uint16_t>(1U << (15 - i));
	return static_cast<std::uint16_t>(~reflected);
}

/// Dense Gaussian elimination with partial pivoting. Throws on singular input.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
	const std::size_t n = b.size();
	for (std::size_t col = 0; col < n; ++col) {
		std::size_t piv = col;
		for (std::size_t r = col + 1; r < n; ++r)
			if (std::abs(a[r][col]) > std::abs(a[piv][col]))
				piv = r;
		if (std::abs(a[piv][col]) < 1e-14)
			throw std::runtime_error("singular");
		std::swap(a[piv], a[col]);
		std::swap(b[piv], b[col]);
		for (std::size_t r = col + 1; r < n; ++r) {
			const double f = a[r][col] / a[col][col];
			if (f == 0.0)
				continue;
			for (std::size_t c = col; c < n; ++c)
				a[r][c] -= f * a[col][c];
			b[r] -= f * b[col];
		}
	}
	std::vector<double> x(n);
	for (std::size_t i = n; i-- > 0;) {
		double s = b[i];
		for (std::size_t c = i + 1; c < n; ++c)
			s -= a[i][c] * x[c];
		x[i] = s / a[i][i];
	}
	return x;
}

/// Connected components by repeated relaxation over an edge list.
inline std::vector<int> components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
{
	std::vector<int> label(n);
	for (std::size_t i = 0; i < n; ++i)
		label[i] = static_cast<int>(i);
	bool changed = true;
	while (changed) {
		changed = false;
		for (const auto& [u, v] : edges) {
			const int m = std::min(label[u], label[v]);
			if (label[u] != m || label[v] != m) {
				label[u] = label[v] = m;
				changed = true;
			}
		}
	}
	return label;
}

} // namespace gridtb::oracle
