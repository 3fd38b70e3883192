// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "carpet/error.hpp"
#include "carpet/rational.hpp"

namespace carpet {

/// One allowed digit pair (i, j): column digit in base m, row digit in base n.
struct Digit {
    int i = 0;
    int j = 0;

    friend auto operator<=>(const Digit&, const Digit&) = default;
};

/// A word is stored most-significant digit first.
using Word = std::vector<Digit>;

/// Raw, unvalidated description as read from a carpet file or built in code.
struct CarpetSpec {
    int m = 0;
    int n = 0;
    std::vector<Digit> digits;
};

/// A validated Bedford-McMullen carpet with a full column.
///
/// Instances are only produced by validate_carpet(), so every Carpet satisfies
/// m > n >= 2, a nonempty in-range digit set and the existence of a column i0
/// containing every row digit.
class Carpet {
public:
    int m() const { return m_; }
    int n() const { return n_; }
    const std::vector<Digit>& digits() const { return digits_; }
    /// Row digit sets D_j, indexed by j, each sorted ascending.
    const std::vector<std::vector<int>>& rows() const { return rows_; }
    int full_column() const { return i0_; }
    /// x0 = i0 / (m - 1); the segment {x0} x [0,1] lies in the carpet.
    const Rational& full_column_x() const { return x0_; }

    bool contains(const Digit& d) const { return std::binary_search(digits_.begin(), digits_.end(), d); }

    /// a = max_j |D_j|
    int max_row_size() const {
        std::size_t a = 0;
        for (const auto& r : rows_) a = std::max(a, r.size());
        return static_cast<int>(a);
    }

    /// Canonical textual form used for hashing and record headers: `i:j,i:j,...`.
    std::string canonical_digits() const {
        std::ostringstream os;
        for (std::size_t k = 0; k < digits_.size(); ++k) {
            if (k) os << ',';
            os << digits_[k].i << ':' << digits_[k].j;
        }
        return os.str();
    }

    friend bool operator==(const Carpet& a, const Carpet& b) {
        return a.m_ == b.m_ && a.n_ == b.n_ && a.digits_ == b.digits_;
    }

private:
    friend Carpet validate_carpet(const CarpetSpec& spec);

    int m_ = 0;
    int n_ = 0;
    std::vector<Digit> digits_;
    std::vector<std::vector<int>> rows_;
    int i0_ = 0;
    Rational x0_;
};

inline Carpet validate_carpet(const CarpetSpec& spec) {
    if (spec.m <= spec.n) {
        throw Error(ErrorKind::BaseOrder, "need m > n, got m=" + std::to_string(spec.m) +
                                              " n=" + std::to_string(spec.n));
    }
    if (spec.n < 2) throw Error(ErrorKind::BaseOrder, "need n >= 2");
    if (spec.digits.empty()) throw Error(ErrorKind::EmptyDigits, "digit set is empty");
    for (const auto& d : spec.digits) {
        if (d.i < 0 || d.i >= spec.m || d.j < 0 || d.j >= spec.n) {
            throw Error(ErrorKind::DigitRange, "digit (" + std::to_string(d.i) + "," +
                                                   std::to_string(d.j) + ") out of range");
        }
    }
    Carpet c;
    c.m_ = spec.m;
    c.n_ = spec.n;
    std::set<Digit> uniq(spec.digits.begin(), spec.digits.end());
    c.digits_.assign(uniq.begin(), uniq.end());
    c.rows_.assign(static_cast<std::size_t>(spec.n), {});
    std::vector<int> column_rows(static_cast<std::size_t>(spec.m), 0);
    for (const auto& d : c.digits_) {
        c.rows_[static_cast<std::size_t>(d.j)].push_back(d.i);
        ++column_rows[static_cast<std::size_t>(d.i)];
    }
    for (auto& r : c.rows_) std::sort(r.begin(), r.end());
    // smallest full column wins
    c.i0_ = -1;
    for (int i = 0; i < spec.m; ++i) {
        if (column_rows[static_cast<std::size_t>(i)] == spec.n) {
            c.i0_ = i;
            break;
        }
    }
    if (c.i0_ < 0) throw Error(ErrorKind::NoFullColumn, "no column contains every row digit");
    c.x0_ = make_q(c.i0_, c.m_ - 1);
    return c;
}

/// The affine map f_I(x, y) = (scale_x x + translate_x, scale_y y + translate_y).
struct AffineCylinder {
    Rational scale_x{1};
    Rational scale_y{1};
    Rational translate_x{0};
    Rational translate_y{0};
    std::size_t generation = 0;

    std::pair<Rational, Rational> apply(const Rational& x, const Rational& y) const {
        return {scale_x * x + translate_x, scale_y * y + translate_y};
    }

    friend bool operator==(const AffineCylinder&, const AffineCylinder&) = default;
};

/// Line y = slope * x + intercept. Vertical lines are not representable.
struct Line {
    Rational slope{0};
    Rational intercept{0};

    friend bool operator==(const Line&, const Line&) = default;
};

/// Horizontal slice through the carpet along an optimal row.
struct Fiber {
    int row = 0;
    Rational intercept;
    std::vector<int> digits;
};

struct Point {
    Rational x;
    Rational y;

    friend bool operator==(const Point&, const Point&) = default;
};

inline void check_word(const Carpet& c, const Word& w) {
    for (const auto& d : w) {
        if (!c.contains(d)) {
            throw Error(ErrorKind::InvalidDigit, "digit (" + std::to_string(d.i) + "," +
                                                     std::to_string(d.j) + ") not in carpet");
        }
    }
}

/// Integer numerators of the word's translation: a_I = A / m^k, b_I = B / n^k.
inline std::pair<Integer, Integer> word_numerators(const Carpet& c, const Word& w) {
    Integer a = 0;
    Integer b = 0;
    for (const auto& d : w) {
        a = a * c.m() + d.i;
        b = b * c.n() + d.j;
    }
    return {a, b};
}

inline AffineCylinder cylinder_map(const Carpet& c, const Word& w) {
    check_word(c, w);
    const auto k = w.size();
    auto [a, b] = word_numerators(c, w);
    AffineCylinder f;
    f.generation = k;
    f.scale_x = qinvpow(c.m(), k);
    f.scale_y = qinvpow(c.n(), k);
    f.translate_x = Rational(a) * f.scale_x;
    f.translate_y = Rational(b) * f.scale_y;
    f.translate_x.canonicalize();
    f.translate_y.canonicalize();
    return f;
}

inline Point fixed_point(const Carpet& c, const Digit& d) {
    if (!c.contains(d)) throw Error(ErrorKind::InvalidDigit, "digit not in carpet");
    return {make_q(d.i, c.m() - 1), make_q(d.j, c.n() - 1)};
}

/// Closed form of the star dimension: 1 + log a / log m with a = max_j |D_j|.
struct StarDimension {
    int a = 0;
    int m = 0;
    long double value = 0;

    std::string exact() const { return "1+log(" + std::to_string(a) + ")/log(" + std::to_string(m) + ")"; }
    /// dim* - 1 = log a / log m
    long double excess() const { return value - 1.0L; }
};

inline StarDimension star_dimension(const Carpet& c) {
    StarDimension s;
    s.a = c.max_row_size();
    s.m = c.m();
    s.value = 1.0L + std::log(static_cast<long double>(s.a)) / std::log(static_cast<long double>(s.m));
    return s;
}

inline Fiber optimal_fiber(const Carpet& c) {
    int best = 0;
    for (int j = 1; j < c.n(); ++j) {
        if (c.rows()[static_cast<std::size_t>(j)].size() > c.rows()[static_cast<std::size_t>(best)].size()) best = j;
    }
    return {best, make_q(best, c.n() - 1), c.rows()[static_cast<std::size_t>(best)]};
}

/// Image of a line under f_I. The slope scales by (m/n)^k.
inline Line push_line(const Carpet& c, const Word& w, const Line& ln) {
    const auto f = cylinder_map(c, w);
    Line out;
    out.slope = ln.slope * f.scale_y / f.scale_x;
    out.intercept = ln.intercept * f.scale_y + f.translate_y - out.slope * f.translate_x;
    return out;
}

} // namespace carpet
