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

#include "doctest.h"

#include "gridtb/dnp3/app.hpp"
#include "gridtb/dnp3/crc.hpp"
#include "gridtb/dnp3/framedump.hpp"
#include "gridtb/dnp3/link.hpp"
#include "gridtb/dnp3/stack.hpp"
#include "gridtb/dnp3/transport.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <array>

using namespace gridtb;
using namespace gridtb::dnp3;

TEST_CASE("crc: table-driven matches the bit-serial oracle")
{
	const std::array<std::uint8_t, 8> header = {0x05, 0x64, 0x05, 0xC0, 0x01, 0x00, 0x00, 0x04};
	const auto expected = oracle::crc_bitserial(header);
	CHECK(crc_dnp(header) == expected);
	// frozen from the oracle; transmitted as E9 21
	CHECK(expected == 0x21E9);

	gen::Rng rng(1);
	for (int i = 0; i < 10000; ++i) {
		const auto block = gen::bytes(rng, 1 + rng() % 18);
		REQUIRE(crc_dnp(block) == oracle::crc_bitserial(block));
	}
}

TEST_CASE("crc: appended checksum verifies")
{
	gen::Rng rng(2);
	for (int i = 0; i < 200; ++i) {
		const auto block = gen::bytes(rng, 1 + rng() % 16);
		std::vector<std::uint8_t> out;
		append_block(out, block);
		CHECK(verify_block(out));
		out[rng() % out.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
		CHECK_FALSE(verify_block(out));
	}
}

TEST_CASE("link: header-only frame is 10 octets and addresses are little-endian")
{
	LinkFrame f;
	f.control.dir = true;
	f.destination = 560;
	f.source = 1;
	const auto bytes = encode_link_frame(f);
	REQUIRE(bytes.size() == 10);
	CHECK(bytes[0] == 0x05);
	CHECK(bytes[1] == 0x64);
	CHECK(bytes[2] == 5);
	CHECK(bytes[4] == 0x30);
	CHECK(bytes[5] == 0x02);
	const std::uint16_t crc = crc_dnp(std::span(bytes).first(8));
	CHECK(bytes[8] == (crc & 0xFF));
	CHECK(bytes[9] == (crc >> 8));
}

TEST_CASE("link: oversize payload is rejected")
{
	LinkFrame f;
	f.user_data.resize(251);
	CHECK_THROWS_AS(encode_link_frame(f), LinkError);
}

TEST_CASE("link: round trip and size bound")
{
	gen::Rng rng(3);
	for (int i = 0; i < 2000; ++i) {
		const auto f = gen::link_frame(rng);
		const auto bytes = encode_link_frame(f);
		REQUIRE(bytes.size() <= kMaxLinkFrameSize);
		const auto r = decode_link_frame(bytes);
		REQUIRE(r.status == LinkDecodeStatus::Ok);
		CHECK(r.consumed == bytes.size());
		CHECK(*r.frame == f);
	}
	LinkFrame full;
	full.user_data.resize(250);
	CHECK(encode_link_frame(full).size() == kMaxLinkFrameSize);
}

TEST_CASE("link: partial input needs more bytes without consuming")
{
	LinkFrame f;
	f.user_data = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17};
	const auto bytes = encode_link_frame(f);
	for (std::size_t n = 0; n < bytes.size(); ++n) {
		const auto r = decode_link_frame(std::span(bytes).first(n));
		CHECK(r.status == LinkDecodeStatus::NeedMore);
		CHECK(r.consumed == 0);
	}
}

TEST_CASE("link: corrupted body CRC is reported and the stream resynchronizes")
{
	LinkFrame a;
	a.destination = 560;
	a.user_data = {0xC0, 0xC1, 0x01, 0x3C, 0x02, 0x06};
	LinkFrame b = a;
	b.destination = 561;

	auto first = encode_link_frame(a);
	first[first.size() - 1] ^= 0xFF; // body CRC octet
	auto stream = first;
	const auto second = encode_link_frame(b);
	stream.insert(stream.end(), second.begin(), second.end());

	const auto r = decode_link_frame(stream);
	CHECK(r.status == LinkDecodeStatus::CrcMismatch);
	CHECK(r.consumed == 2);

	LinkParser parser;
	parser.feed(stream);
	auto got = parser.next();
	REQUIRE(got);
	CHECK(got->destination == 561);
	CHECK(parser.crc_errors() == 1);
	CHECK_FALSE(parser.next());
}

TEST_CASE("link: back-to-back frames and leading garbage")
{
	LinkFrame a;
	a.destination = 1;
	LinkFrame b;
	b.destination = 2;
	b.user_data = {9, 9, 9};
	std::vector<std::uint8_t> stream = {0xAA, 0x05, 0x00, 0x64};
	const auto ea = encode_link_frame(a);
	const auto eb = encode_link_frame(b);
	stream.insert(stream.end(), ea.begin(), ea.end());
	stream.insert(stream.end(), eb.begin(), eb.end());

	LinkParser parser;
	parser.feed(stream);
	auto x = parser.next();
	auto y = parser.next();
	REQUIRE(x);
	REQUIRE(y);
	CHECK(*x == a);
	CHECK(*y == b);
	CHECK(parser.garbage_octets() == 4);
	CHECK(parser.buffered() == 0);
}

TEST_CASE("link: random byte fuzz terminates with bounded buffering")
{
	gen::Rng rng(4);
	LinkParser parser;
	std::size_t frames = 0;
	for (int i = 0; i < 20000; ++i) {
		auto chunk = gen::bytes(rng, 1 + rng() % 64);
		if (rng() % 8 == 0 && chunk.size() > 2) {
			chunk[0] = 0x05;
			chunk[1] = 0x64;
		}
		parser.feed(chunk);
		while (parser.next())
			++frames;
		REQUIRE(parser.buffered() <= kMaxLinkFrameSize + 64);
	}
	CHECK(parser.garbage_octets() > 0);
}

TEST_CASE("transport: segmentation sizes")
{
	std::vector<std::uint8_t> small(100, 0xAB);
	auto segs = transport_segment(small, 5);
	REQUIRE(segs.size() == 1);
	CHECK(segs[0].fir);
	CHECK(segs[0].fin);
	CHECK(segs[0].sequence == 5);

	std::vector<std::uint8_t> big(300, 0xCD);
	segs = transport_segment(big, 63);
	REQUIRE(segs.size() == 2);
	CHECK(segs[0].payload.size() == 249);
	CHECK(segs[1].payload.size() == 51);
	CHECK(segs[0].fir);
	CHECK_FALSE(segs[0].fin);
	CHECK_FALSE(segs[1].fir);
	CHECK(segs[1].fin);
	CHECK(segs[0].sequence == 63);
	CHECK(segs[1].sequence == 0);
}

TEST_CASE("transport: reassemble(segment(x)) == x")
{
	gen::Rng rng(5);
	TransportReassembler r(4096);
	for (int i = 0; i < 300; ++i) {
		const auto x = gen::bytes(rng, 1 + rng() % 4096);
		std::optional<std::vector<std::uint8_t>> done;
		for (const auto& s : transport_segment(x, static_cast<std::uint8_t>(rng() % 64))) {
			REQUIRE_FALSE(done);
			done = r.push(TransportSegment::from_bytes(s.to_bytes()));
		}
		REQUIRE(done);
		CHECK(*done == x);
	}
}

TEST_CASE("transport: reassembly state machine")
{
	auto seg = [](bool fir, bool fin, std::uint8_t seq, std::uint8_t fill) {
		return TransportSegment{fin, fir, seq, std::vector<std::uint8_t>(10, fill)};
	};

	SUBCASE("single segment completes immediately")
	{
		TransportReassembler r;
		auto out = r.push(seg(true, true, 7, 1));
		REQUIRE(out);
		CHECK(out->size() == 10);
	}
	SUBCASE("sequence gap discards the partial buffer")
	{
		TransportReassembler r;
		CHECK_FALSE(r.push(seg(true, false, 0, 1)));
		CHECK_FALSE(r.push(seg(false, true, 2, 2)));
		CHECK_FALSE(r.in_progress());
		CHECK(r.discarded() == 1);
	}
	SUBCASE("non-fir with nothing buffered is dropped")
	{
		TransportReassembler r;
		CHECK_FALSE(r.push(seg(false, true, 0, 1)));
		CHECK(r.discarded() == 1);
	}
	SUBCASE("fir mid-stream replaces the old buffer")
	{
		TransportReassembler r;
		CHECK_FALSE(r.push(seg(true, false, 0, 1)));
		CHECK_FALSE(r.push(seg(false, false, 1, 1)));
		CHECK_FALSE(r.push(seg(true, false, 9, 2)));
		auto out = r.push(seg(false, true, 10, 3));
		REQUIRE(out);
		CHECK(out->size() == 20);
		CHECK((*out)[0] == 2);
		CHECK((*out)[19] == 3);
	}
	SUBCASE("oversize fragment raises overflow")
	{
		TransportReassembler r(15);
		CHECK_FALSE(r.push(seg(true, false, 0, 1)));
		CHECK_THROWS_AS(r.push(seg(false, true, 1, 1)), TransportOverflow);
		CHECK_FALSE(r.in_progress());
	}
}

TEST_CASE("app: class 0 read is five octets")
{
	AppFragment f;
	f.function = FunctionCode::Read;
	f.control.seq = 3;
	f.objects.push_back({ObjectHeader::all(60, 1), {}});
	const auto bytes = encode_app_fragment(f);
	const std::vector<std::uint8_t> expected = {0xC3, 0x01, 60, 1, 0x06};
	CHECK(bytes == expected);
	CHECK(decode_app_fragment(bytes) == f);
}

TEST_CASE("app: float analog response preserves the value bit-exactly")
{
	AppFragment f;
	f.function = FunctionCode::Response;
	f.iin = iin::kClass1Events;
	ObjectBlock b{ObjectHeader::range(30, 5, 2, 2), {}};
	b.values.push_back({2, PointValue{AnalogFloat{-123.456F, flags::kOnline}, std::nullopt}});
	f.objects.push_back(b);
	const auto back = decode_app_fragment(encode_app_fragment(f));
	REQUIRE(back.objects.size() == 1);
	CHECK(back.objects[0].values[0].index == 2);
	CHECK(std::get<AnalogFloat>(back.objects[0].values[0].value.data).value == -123.456F);
	CHECK(back == f);
}

TEST_CASE("app: CROB latch off with count-and-index")
{
	AppFragment f;
	f.function = FunctionCode::DirectOperate;
	Crob c;
	c.code = control_code::kLatchOff;
	f.objects.push_back({ObjectHeader{12, 1, Qualifier::CountIndex8, 0, 0, 1}, {{3, PointValue{c, std::nullopt}}}});
	const auto back = decode_app_fragment(encode_app_fragment(f));
	const auto& v = back.objects.at(0).values.at(0);
	CHECK(v.index == 3);
	CHECK(std::get<Crob>(v.value.data).code == control_code::kLatchOff);
	CHECK(control_code::target_state(control_code::kLatchOff) == false);
	CHECK(control_code::target_state(control_code::kClose) == true);
	CHECK(control_code::target_state(control_code::kTrip) == false);
}

TEST_CASE("app: unsupported triples are typed errors")
{
	const std::vector<std::uint8_t> read_g70 = {0xC0, 0x01, 70, 1, 0x06};
	try {
		decode_app_fragment(read_g70);
		FAIL("expected UnsupportedObject");
	} catch (const UnsupportedObject& e) {
		CHECK(e.group() == 70);
		CHECK(e.variation() == 1);
		CHECK(e.qualifier() == 0x06);
	}
	// g30v5 with an all-objects qualifier inside a response
	const std::vector<std::uint8_t> bad_q = {0xC0, 0x81, 0, 0, 30, 5, 0x06};
	CHECK_THROWS_AS(decode_app_fragment(bad_q), UnsupportedObject);
	// unknown function code
	CHECK_THROWS_AS(decode_app_fragment(std::vector<std::uint8_t>{0xC0, 0x20}), UnsupportedFunction);
	// truncated value payload
	const std::vector<std::uint8_t> truncated = {0xC0, 0x81, 0, 0, 30, 5, 0x00, 0, 3, 1, 0, 0};
	CHECK_THROWS_AS(decode_app_fragment(truncated), DecodeError);
}

TEST_CASE("app: encode rejects count mismatch")
{
	AppFragment f;
	f.function = FunctionCode::Response;
	f.objects.push_back({ObjectHeader::range(1, 2, 0, 3), {}});
	CHECK_THROWS_AS(encode_app_fragment(f), EncodeError);
}

TEST_CASE("app: round trip property over generated fragments")
{
	gen::Rng rng(6);
	for (int i = 0; i < 5000; ++i) {
		const auto f = gen::app_fragment(rng);
		const auto bytes = encode_app_fragment(f);
		const auto back = decode_app_fragment(bytes);
		REQUIRE(back == f);
	}
}

TEST_CASE("app: decoder is total over random input")
{
	gen::Rng rng(7);
	for (int i = 0; i < 20000; ++i) {
		auto b = gen::bytes(rng, rng() % 64);
		if (b.size() > 1 && rng() % 2)
			b[1] = static_cast<std::uint8_t>(std::array{0x01, 0x05, 0x81, 0x02}[rng() % 4]);
		try {
			(void)decode_app_fragment(b);
		} catch (const DecodeError&) {
		}
	}
}

TEST_CASE("stack: wrapped fragment decodes back through link and transport")
{
	AppFragment f;
	f.function = FunctionCode::Response;
	ObjectBlock b{ObjectHeader::range(30, 5, 0, 99), {}};
	for (std::uint16_t i = 0; i < 100; ++i)
		b.values.push_back({i, PointValue{AnalogFloat{static_cast<float>(i) * 1.5F, flags::kOnline}, std::nullopt}});
	f.objects.push_back(b);
	std::uint8_t tseq = 62;
	const auto wire = wrap_fragment(f, 560, 1, false, tseq);
	CHECK(tseq == 1); // 509 octets -> 3 segments

	LinkParser parser;
	parser.feed(wire);
	TransportReassembler r;
	std::optional<std::vector<std::uint8_t>> app;
	while (auto lf = parser.next()) {
		CHECK(lf->source == 560);
		CHECK(lf->destination == 1);
		CHECK_FALSE(lf->control.dir);
		app = r.push(TransportSegment::from_bytes(lf->user_data));
	}
	REQUIRE(app);
	CHECK(decode_app_fragment(*app) == f);
}

TEST_CASE("framedump: renders a class poll exchange")
{
	AppFragment req;
	req.function = FunctionCode::Read;
	req.objects.push_back({ObjectHeader::all(60, 2), {}});
	req.objects.push_back({ObjectHeader::all(60, 1), {}});
	std::uint8_t ts = 0;
	const auto wire = wrap_fragment(req, 1, 560, true, ts);
	const auto text = format_capture_line(Direction::MasterToOutstation, wire);
	const auto lines = dump_capture("# poll\n" + text + "\n");
	REQUIRE(lines.size() == 1);
	CHECK(lines[0] == "> 1->560 UNCONFIRMED_USER_DATA | T FIR FIN seq=0 | READ seq=0 FIR FIN | g60v2 q06 | g60v1 q06");
	CHECK(dump_capture("").empty());
	CHECK_THROWS_AS(parse_capture("? 00"), std::invalid_argument);
}
