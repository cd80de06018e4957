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

#include "gridtb/dnp3/stack.hpp"

namespace gridtb::dnp3 {

std::vector<std::uint8_t> wrap_fragment(const AppFragment& frag, std::uint16_t source, std::uint16_t destination,
                                        bool from_master, std::uint8_t& transport_seq)
{
	const auto app = encode_app_fragment(frag);
	const auto segments = transport_segment(app, transport_seq);
	std::vector<std::uint8_t> out;
	for (const auto& seg : segments) {
		LinkFrame lf;
		lf.control.dir = from_master;
		lf.control.prm = true;
		lf.control.function = link_func::kUnconfirmedUserData;
		lf.destination = destination;
		lf.source = source;
		lf.user_data = seg.to_bytes();
		const auto bytes = encode_link_frame(lf);
		out.insert(out.end(), bytes.begin(), bytes.end());
	}
	transport_seq = static_cast<std::uint8_t>((transport_seq + segments.size()) & 0x3F);
	return out;
}

std::optional<StackItem> StackReader::next()
{
	auto frame = parser_.next();
	if (!frame)
		return std::nullopt;
	StackItem item{std::move(*frame), std::nullopt};
	const auto fn = item.frame.control.function;
	const bool user_data = item.frame.control.prm &&
	                       (fn == link_func::kUnconfirmedUserData || fn == link_func::kConfirmedUserData);
	if (!user_data || item.frame.user_data.empty())
		return item;
	const auto key = std::make_pair(item.frame.source, item.frame.destination);
	auto it = reassembly_.try_emplace(key, max_fragment_).first;
	try {
		item.fragment = it->second.push(TransportSegment::from_bytes(item.frame.user_data));
	} catch (const TransportOverflow&) {
		++overflows_;
		it->second.reset();
	}
	return item;
}

} // namespace gridtb::dnp3
