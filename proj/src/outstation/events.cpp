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

#include "gridtb/outstation/events.hpp"

#include <algorithm>

namespace gridtb::outstation {

void ClassBuffer::push(EventRecord ev)
{
	if (records_.size() >= capacity_) {
		records_.pop_front();
		++discarded_;
		overflow_ = true;
	}
	records_.push_back(std::move(ev));
}

std::size_t ClassBuffer::remove(const std::vector<std::uint64_t>& ids)
{
	const auto before = records_.size();
	std::erase_if(records_, [&](const EventRecord& ev) { return std::find(ids.begin(), ids.end(), ev.id) != ids.end(); });
	if (records_.empty())
		overflow_ = false;
	return before - records_.size();
}

} // namespace gridtb::outstation
