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
#include "gridtb/pointmap/pointmap.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

namespace gridtb::outstation {

struct EventRecord
{
	std::uint64_t id = 0; // unique per outstation, increasing
	pointmap::PointType type = pointmap::PointType::BinaryInput;
	std::uint16_t index = 0;
	dnp3::PointValue value; // carries the timestamp
	int event_class = 1;
};

/// Bounded FIFO for one event class. Overflow discards the oldest record
/// and latches the overflow flag until the buffer is drained empty.
class ClassBuffer
{
public:
	explicit ClassBuffer(std::size_t capacity = 1024) : capacity_(capacity == 0 ? 1 : capacity) {}

	void push(EventRecord ev);
	/// Removes records by id. Clears the overflow flag if the buffer empties.
	std::size_t remove(const std::vector<std::uint64_t>& ids);

	const std::deque<EventRecord>& records() const { return records_; }
	std::size_t size() const { return records_.size(); }
	bool empty() const { return records_.empty(); }
	std::size_t capacity() const { return capacity_; }
	bool overflow() const { return overflow_; }
	std::uint64_t discarded() const { return discarded_; }

private:
	std::size_t capacity_;
	std::deque<EventRecord> records_;
	bool overflow_ = false;
	std::uint64_t discarded_ = 0;
};

/// instMag / mag pair of one analog point.
struct AnalogReportState
{
	double inst_mag = 0.0;
	double mag = 0.0;
	double deadband = 0.0;

	/// Records a new instantaneous value. Returns true, and moves mag to it,
	/// exactly when |instMag - mag| > deadband.
	bool scan(double value)
	{
		inst_mag = value;
		if (std::abs(inst_mag - mag) > deadband) {
			mag = inst_mag;
			return true;
		}
		return false;
	}
};

} // namespace gridtb::outstation
