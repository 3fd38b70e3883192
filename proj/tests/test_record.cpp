// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <string>

#include "carpet/record.hpp"

using namespace carpet;

namespace {

std::string parse_error(const std::string& text) {
    try {
        parse_carpet(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        return e.what();
    }
    ADD_FAILURE() << "parsed: " << text;
    return {};
}

ErrorKind record_error(const std::string& text) {
    try {
        parse_record(text);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "parsed record";
    return ErrorKind::EmptyInput;
}

const SliceConstruction& sample() {
    static const SliceConstruction sc =
        build_sharp_slice(validate_carpet({3, 2, {{0, 0}, {0, 1}, {2, 0}}}), make_q(1, 100), 2);
    return sc;
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    if (pos != std::string::npos) s.replace(pos, from.size(), to);
    return s;
}

} // namespace

TEST(CarpetFile, CommentsAndOrder) {
    const Carpet a = parse_carpet("# E1\nm 3\nn 2\ndigit 0 0\ndigit 0 1   # left column\n\ndigit 2 0\n");
    const Carpet b = parse_carpet("digit 2 0\ndigit 0 1\nn 2\ndigit 0 0\nm 3\n");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.m(), 3);
    EXPECT_EQ(a.digits().size(), 3u);
    EXPECT_EQ(parse_carpet(emit_carpet(a)), a);
}

TEST(CarpetFile, LineNumberedErrors) {
    EXPECT_NE(parse_error("m 3\nn 2\ndigit 0\n").find("line 3"), std::string::npos);
    EXPECT_NE(parse_error("m 3\nn two\n").find("line 2"), std::string::npos);
    EXPECT_NE(parse_error("m 3\nm 4\nn 2\ndigit 0 0\ndigit 0 1\n").find("duplicate"), std::string::npos);
    EXPECT_NE(parse_error("n 2\ndigit 0 0\n").find("missing 'm'"), std::string::npos);
    EXPECT_NE(parse_error("m 3\nn 2\nsize 4\n").find("unknown key"), std::string::npos);
}

TEST(CarpetFile, ValidationStillApplies) {
    try {
        parse_carpet("m 3\nn 2\ndigit 0 0\ndigit 2 0\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoFullColumn);
    }
}

TEST(CarpetHash, StableAndOrderFree) {
    const Carpet a = validate_carpet({3, 2, {{0, 0}, {0, 1}, {2, 0}}});
    const Carpet b = validate_carpet({3, 2, {{2, 0}, {0, 1}, {0, 0}}});
    EXPECT_EQ(carpet_hash(a), carpet_hash(b));
    EXPECT_EQ(carpet_hash(a).size(), 16u);
    EXPECT_NE(carpet_hash(a), carpet_hash(validate_carpet({3, 2, {{0, 0}, {0, 1}, {1, 0}}})));
}

TEST(Record, RoundTrip) {
    const std::string text = emit_record(sample());
    EXPECT_EQ(text.rfind(kRecordHeader, 0), 0u);
    const auto back = parse_record(text);
    EXPECT_EQ(back, sample());
    EXPECT_EQ(emit_record(back), text);
}

TEST(Record, RejectsNonCanonicalRationals) {
    const std::string text = emit_record(sample());
    EXPECT_EQ(record_error(replace_once(text, "slope 1/100", "slope 2/200")), ErrorKind::Parse);
    EXPECT_EQ(record_error(replace_once(text, "slope 1/100", "slope 0.01")), ErrorKind::Parse);
}

TEST(Record, RejectsHashMismatch) {
    const std::string text = emit_record(sample());
    const std::string h = carpet_hash(sample().carpet);
    std::string bad = h;
    bad[0] = bad[0] == '0' ? '1' : '0';
    EXPECT_EQ(record_error(replace_once(text, h, bad)), ErrorKind::Parse);
}

TEST(Record, RejectsTruncation) {
    const std::string text = emit_record(sample());
    EXPECT_EQ(record_error(text.substr(0, text.find("limit"))), ErrorKind::Parse);
    EXPECT_EQ(record_error("carpet-slicer-record v2\n"), ErrorKind::Parse);
}

TEST(Record, ParseCell) {
    const Cell c = detail::parse_cell("3:17:4");
    EXPECT_EQ(c.level, 3u);
    EXPECT_EQ(c.col, 17);
    EXPECT_EQ(*c.row, 4);
    EXPECT_EQ(c.str(), "3:17:4");
    EXPECT_THROW(detail::parse_cell("3:17"), Error);
    EXPECT_THROW(detail::parse_cell("a:b:c"), Error);
}
