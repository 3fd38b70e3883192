// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carpet/carpet.hpp"
#include "carpet/slice_builder.hpp"

namespace carpet {

// ---------------------------------------------------------------------------
// Carpet files: `m <int>`, `n <int>`, `digit <i> <j>`, `#` comments.

namespace detail {

inline std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

inline std::int64_t parse_int(const std::string& tok, std::size_t line_no) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected integer, got '" + tok + "'");
    }
}

} // namespace detail

inline CarpetSpec parse_carpet_spec(std::istream& in) {
    CarpetSpec spec;
    std::optional<std::size_t> m_line, n_line;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::istringstream ls(detail::strip_comment(raw));
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        auto arity = [&](std::size_t want) {
            if (toks.size() != want + 1) {
                throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": '" + key + "' takes " +
                                                  std::to_string(want) + " value(s)");
            }
        };
        if (key == "m" || key == "n") {
            arity(1);
            auto& seen = key == "m" ? m_line : n_line;
            if (seen) {
                throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": duplicate '" + key +
                                                  "' (first on line " + std::to_string(*seen) + ")");
            }
            seen = line_no;
            (key == "m" ? spec.m : spec.n) = static_cast<int>(detail::parse_int(toks[1], line_no));
        } else if (key == "digit") {
            arity(2);
            spec.digits.push_back({static_cast<int>(detail::parse_int(toks[1], line_no)),
                                   static_cast<int>(detail::parse_int(toks[2], line_no))});
        } else {
            throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!m_line) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": missing 'm'");
    if (!n_line) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": missing 'n'");
    return spec;
}

inline Carpet parse_carpet(std::istream& in) { return validate_carpet(parse_carpet_spec(in)); }

inline Carpet parse_carpet(const std::string& text) {
    std::istringstream in(text);
    return parse_carpet(in);
}

inline Carpet load_carpet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    return parse_carpet(in);
}

inline std::string emit_carpet(const Carpet& c) {
    std::ostringstream os;
    os << "m " << c.m() << "\nn " << c.n() << "\n";
    for (const auto& d : c.digits()) os << "digit " << d.i << " " << d.j << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Construction records.

/// FNV-1a 64 over `m,n,i:j,...`, as 16 hex digits.
inline std::string carpet_hash(const Carpet& c) {
    const std::string canon = std::to_string(c.m()) + "," + std::to_string(c.n()) + "," + c.canonical_digits();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline constexpr const char* kRecordHeader = "carpet-slicer-record v1";

inline std::string emit_record(const SliceConstruction& sc) {
    std::ostringstream os;
    os << kRecordHeader << "\n";
    os << "carpet " << sc.carpet.m() << " " << sc.carpet.n() << " " << sc.carpet.canonical_digits() << " "
       << carpet_hash(sc.carpet) << "\n";
    os << "slope " << to_pq(sc.slope) << "\n";
    os << "stages " << sc.stages.size() << "\n";
    for (const auto& st : sc.stages) {
        os << "stage " << st.stage << " t=" << to_pq(st.intercept) << " k=" << st.base_level
           << " cell=" << st.cell.str() << " lower=" << st.cert_lower << " upper=" << st.cert_upper
           << " side=" << side_char(st.neighborhood.side) << " delta=" << to_pq(st.neighborhood.delta)
           << " retained=" << st.neighborhood.retained << "\n";
    }
    os << "limit " << to_pq(sc.limit_lo) << " " << to_pq(sc.limit_hi) << "\n";
    os << "cprime " << to_pq(sc.cprime) << "\n";
    os << "end\n";
    return os.str();
}

namespace detail {

struct RecordReader {
    std::istream& in;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Parse, "record line " + std::to_string(line_no) + ": " + what);
    }

    std::vector<std::string> next(const std::string& key) {
        std::string raw;
        if (!std::getline(in, raw)) fail("unexpected end of record, wanted '" + key + "'");
        ++line_no;
        std::istringstream ls(raw);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty() || toks[0] != key) fail("expected '" + key + "'");
        return toks;
    }

    Rational rational(const std::string& s) {
        if (s.find('/') == std::string::npos) fail("rational must be written p/q: '" + s + "'");
        try {
            Rational r = parse_rational(s);
            if (to_pq(r) != s) fail("rational not in lowest terms: '" + s + "'");
            return r;
        } catch (const Error&) {
            fail("bad rational '" + s + "'");
        }
    }

    std::int64_t integer(const std::string& s) {
        try {
            return parse_int(s, line_no);
        } catch (const Error&) {
            fail("bad integer '" + s + "'");
        }
    }

    std::map<std::string, std::string> fields(const std::vector<std::string>& toks, std::size_t from) {
        std::map<std::string, std::string> out;
        for (std::size_t i = from; i < toks.size(); ++i) {
            auto eq = toks[i].find('=');
            if (eq == std::string::npos) fail("expected key=value, got '" + toks[i] + "'");
            out[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
        }
        return out;
    }
};

inline Cell parse_cell(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3) throw Error(ErrorKind::Parse, "cell must be level:col:row, got '" + s + "'");
    try {
        Cell c;
        c.level = static_cast<unsigned>(std::stoul(parts[0]));
        c.col = Integer(parts[1], 10);
        c.row = Integer(parts[2], 10);
        return c;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "bad cell '" + s + "'");
    }
}

} // namespace detail

inline SliceConstruction parse_record(std::istream& in) {
    detail::RecordReader rd{in};
    std::string header;
    if (!std::getline(in, header)) rd.fail("empty record");
    ++rd.line_no;
    if (header != kRecordHeader) rd.fail("unknown header '" + header + "'");

    auto ct = rd.next("carpet");
    if (ct.size() != 5) rd.fail("carpet line needs m n digits hash");
    CarpetSpec spec;
    spec.m = static_cast<int>(rd.integer(ct[1]));
    spec.n = static_cast<int>(rd.integer(ct[2]));
    {
        std::istringstream ds(ct[3]);
        for (std::string item; std::getline(ds, item, ',');) {
            auto colon = item.find(':');
            if (colon == std::string::npos) rd.fail("bad digit '" + item + "'");
            spec.digits.push_back({static_cast<int>(rd.integer(item.substr(0, colon))),
                                   static_cast<int>(rd.integer(item.substr(colon + 1)))});
        }
    }
    Carpet carpet = validate_carpet(spec);
    if (carpet_hash(carpet) != ct[4]) rd.fail("carpet hash mismatch");

    auto sl = rd.next("slope");
    if (sl.size() != 2) rd.fail("slope line needs one value");
    SliceConstruction sc{carpet, rd.rational(sl[1]), {}, 0, 0, 0};

    auto sg = rd.next("stages");
    if (sg.size() != 2) rd.fail("stages line needs one value");
    const auto count = rd.integer(sg[1]);
    if (count < 1) rd.fail("stage count must be positive");
    for (std::int64_t i = 0; i < count; ++i) {
        auto toks = rd.next("stage");
        if (toks.size() < 2) rd.fail("stage index missing");
        auto f = rd.fields(toks, 2);
        for (const char* key : {"t", "k", "cell", "lower", "upper", "side", "delta", "retained"}) {
            if (!f.count(key)) rd.fail(std::string("stage field '") + key + "' missing");
        }
        StageCertificate st;
        st.stage = static_cast<unsigned>(rd.integer(toks[1]));
        st.intercept = rd.rational(f["t"]);
        st.base_level = static_cast<unsigned>(rd.integer(f["k"]));
        try {
            st.cell = detail::parse_cell(f["cell"]);
        } catch (const Error& e) {
            rd.fail(e.what());
        }
        st.cert_lower = rd.integer(f["lower"]);
        st.cert_upper = rd.integer(f["upper"]);
        if (f["side"] != "L" && f["side"] != "R") rd.fail("side must be L or R");
        st.neighborhood.base = st.intercept;
        st.neighborhood.side = f["side"] == "R" ? Side::Right : Side::Left;
        st.neighborhood.delta = rd.rational(f["delta"]);
        st.neighborhood.retained = rd.integer(f["retained"]);
        sc.stages.push_back(std::move(st));
    }
    auto lim = rd.next("limit");
    if (lim.size() != 3) rd.fail("limit line needs lo hi");
    sc.limit_lo = rd.rational(lim[1]);
    sc.limit_hi = rd.rational(lim[2]);
    auto cp = rd.next("cprime");
    if (cp.size() != 2) rd.fail("cprime line needs one value");
    sc.cprime = rd.rational(cp[1]);
    rd.next("end");
    return sc;
}

inline SliceConstruction parse_record(const std::string& text) {
    std::istringstream in(text);
    return parse_record(in);
}

inline SliceConstruction load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    return parse_record(in);
}

} // namespace carpet
