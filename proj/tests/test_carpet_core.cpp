// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "carpet/carpet.hpp"
#include "oracles.hpp"

using namespace carpet;

namespace {

Carpet e1() { return validate_carpet({3, 2, {{0, 0}, {0, 1}, {2, 0}}}); }
Carpet e3() { return validate_carpet({5, 2, {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {4, 0}}}); }

ErrorKind kind_of(const CarpetSpec& s) {
    try {
        validate_carpet(s);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error";
    return ErrorKind::Parse;
}

} // namespace

TEST(ValidateCarpet, DerivesRowsAndFullColumn) {
    const Carpet c = e1();
    EXPECT_EQ(c.full_column(), 0);
    EXPECT_EQ(c.full_column_x(), Rational(0));
    ASSERT_EQ(c.rows().size(), 2u);
    EXPECT_EQ(c.rows()[0], (std::vector<int>{0, 2}));
    EXPECT_EQ(c.rows()[1], (std::vector<int>{0}));
}

TEST(ValidateCarpet, FullColumnScanMatchesDefinition) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        int found = -1;
        for (int i = 0; i < c.m() && found < 0; ++i) {
            bool full = true;
            for (int j = 0; j < c.n(); ++j) full = full && c.contains({i, j});
            if (full) found = i;
        }
        EXPECT_EQ(c.full_column(), found);
        EXPECT_EQ(c.full_column_x(), make_q(found, c.m() - 1));
        for (const auto& r : c.rows()) EXPECT_FALSE(r.empty());
    }
}

TEST(ValidateCarpet, Errors) {
    EXPECT_EQ(kind_of({2, 3, {{0, 0}, {0, 1}, {0, 2}}}), ErrorKind::BaseOrder);
    EXPECT_EQ(kind_of({3, 3, {{0, 0}, {0, 1}, {0, 2}}}), ErrorKind::BaseOrder);
    EXPECT_EQ(kind_of({3, 2, {{0, 0}, {2, 0}}}), ErrorKind::NoFullColumn);
    EXPECT_EQ(kind_of({3, 2, {}}), ErrorKind::EmptyDigits);
    EXPECT_EQ(kind_of({3, 2, {{0, 0}, {0, 1}, {3, 0}}}), ErrorKind::DigitRange);
    EXPECT_EQ(kind_of({3, 2, {{0, 0}, {0, 1}, {1, -1}}}), ErrorKind::DigitRange);
}

TEST(ValidateCarpet, DuplicateDigitsCollapse) {
    const Carpet c = validate_carpet({3, 2, {{2, 0}, {0, 0}, {0, 1}, {2, 0}}});
    EXPECT_EQ(c, e1());
    EXPECT_EQ(c.canonical_digits(), "0:0,0:1,2:0");
}

TEST(CylinderMap, Examples) {
    const Carpet c = e1();
    const auto id = cylinder_map(c, {});
    EXPECT_EQ(id.scale_x, Rational(1));
    EXPECT_EQ(id.scale_y, Rational(1));
    EXPECT_EQ(id.translate_x, Rational(0));
    EXPECT_EQ(id.translate_y, Rational(0));

    const auto one = cylinder_map(c, {{2, 0}});
    EXPECT_EQ(one.scale_x, Rational(1, 3));
    EXPECT_EQ(one.scale_y, Rational(1, 2));
    EXPECT_EQ(one.translate_x, Rational(2, 3));
    EXPECT_EQ(one.translate_y, Rational(0));

    const auto two = cylinder_map(c, {{2, 0}, {0, 1}});
    EXPECT_EQ(two.scale_x, Rational(1, 9));
    EXPECT_EQ(two.scale_y, Rational(1, 4));
    EXPECT_EQ(two.translate_x, Rational(2, 3));
    EXPECT_EQ(two.translate_y, Rational(1, 4));
    EXPECT_EQ(two.generation, 2u);
}

TEST(CylinderMap, InvalidDigit) {
    try {
        cylinder_map(e1(), {{1, 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidDigit);
    }
}

TEST(CylinderMap, BoxSizeAndContainment) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        const Word w = oracle::random_word(rng, c, 10);
        const auto f = cylinder_map(c, w);
        EXPECT_EQ(f.scale_x, qinvpow(c.m(), w.size()));
        EXPECT_EQ(f.scale_y, qinvpow(c.n(), w.size()));
        EXPECT_GE(f.translate_x, 0);
        EXPECT_GE(f.translate_y, 0);
        EXPECT_LE(f.translate_x + f.scale_x, 1);
        EXPECT_LE(f.translate_y + f.scale_y, 1);
        const auto b = oracle::word_box(c, w);
        EXPECT_EQ(b.xa, f.translate_x);
        EXPECT_EQ(b.ya, f.translate_y);
    }
}

TEST(CylinderMap, CompositionMultipliesScales) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        const Word a = oracle::random_word(rng, c, 5), b = oracle::random_word(rng, c, 5);
        Word ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto fa = cylinder_map(c, a), fb = cylinder_map(c, b), fab = cylinder_map(c, ab);
        EXPECT_EQ(fab.scale_x, fa.scale_x * fb.scale_x);
        EXPECT_EQ(fab.scale_y, fa.scale_y * fb.scale_y);
        auto [x, y] = fa.apply(fb.translate_x, fb.translate_y);
        EXPECT_EQ(fab.translate_x, x);
        EXPECT_EQ(fab.translate_y, y);
    }
}

TEST(FixedPoint, Examples) {
    const Carpet c = e1();
    EXPECT_EQ(fixed_point(c, {0, 0}), (Point{0, 0}));
    EXPECT_EQ(fixed_point(c, {2, 0}), (Point{1, 0}));
    EXPECT_EQ(fixed_point(c, {0, 1}), (Point{0, 1}));
    EXPECT_THROW(fixed_point(c, {1, 0}), Error);
}

TEST(FixedPoint, InvariantUnderOwnMap) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        for (const auto& d : c.digits()) {
            const Point p = fixed_point(c, d);
            auto [x, y] = cylinder_map(c, {d}).apply(p.x, p.y);
            EXPECT_EQ(x, p.x);
            EXPECT_EQ(y, p.y);
        }
    }
}

TEST(StarDimension, Examples) {
    const auto s1 = star_dimension(e1());
    EXPECT_EQ(s1.a, 2);
    EXPECT_EQ(s1.exact(), "1+log(2)/log(3)");
    EXPECT_NEAR(static_cast<double>(s1.value), 1.630930, 1e-6);

    const auto s3 = star_dimension(e3());
    EXPECT_EQ(s3.a, 4);
    EXPECT_NEAR(static_cast<double>(s3.value), 1.861353, 1e-6);

    CarpetSpec full{4, 3, {}};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) full.digits.push_back({i, j});
    }
    EXPECT_EQ(static_cast<double>(star_dimension(validate_carpet(full)).value), 2.0);
}

TEST(StarDimension, RelabelInvariance) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        std::vector<int> cols(static_cast<std::size_t>(c.m())), rows(static_cast<std::size_t>(c.n()));
        std::iota(cols.begin(), cols.end(), 0);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(cols.begin(), cols.end(), rng);
        std::shuffle(rows.begin(), rows.end(), rng);
        CarpetSpec spec{c.m(), c.n(), {}};
        for (const auto& d : c.digits()) {
            spec.digits.push_back({cols[static_cast<std::size_t>(d.i)], rows[static_cast<std::size_t>(d.j)]});
        }
        const Carpet r = validate_carpet(spec);
        EXPECT_EQ(star_dimension(r).a, star_dimension(c).a);
        EXPECT_EQ(star_dimension(r).value, star_dimension(c).value);
    }
}

TEST(OptimalFiber, Examples) {
    const Fiber f1 = optimal_fiber(e1());
    EXPECT_EQ(f1.row, 0);
    EXPECT_EQ(f1.intercept, Rational(0));
    EXPECT_EQ(f1.digits, (std::vector<int>{0, 2}));

    const Fiber f3 = optimal_fiber(e3());
    EXPECT_EQ(f3.row, 0);
    EXPECT_EQ(f3.digits, (std::vector<int>{0, 1, 2, 4}));

    const Fiber eq = optimal_fiber(validate_carpet({3, 2, {{0, 0}, {0, 1}, {1, 0}, {2, 1}}}));
    EXPECT_EQ(eq.row, 0);

    const Fiber top = optimal_fiber(validate_carpet({3, 2, {{0, 0}, {0, 1}, {1, 1}}}));
    EXPECT_EQ(top.row, 1);
    EXPECT_EQ(top.intercept, Rational(1));
}

TEST(PushLine, Examples) {
    const Carpet c = e1();
    const Line l{Rational(1, 3), Rational(2, 7)};
    EXPECT_EQ(push_line(c, {}, l), l);
    EXPECT_EQ(push_line(c, {{0, 0}}, Line{1, 0}), (Line{Rational(3, 2), 0}));
    EXPECT_EQ(push_line(c, {{2, 0}}, Line{Rational(2, 3), 0}), (Line{1, Rational(-2, 3)}));
}

TEST(PushLine, ImageOfPointsLiesOnImageLine) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        const Word w = oracle::random_word(rng, c, 6);
        const Line l{oracle::random_rational(rng, -2, 2), oracle::random_rational(rng, -1, 1)};
        const Line img = push_line(c, w, l);
        const Rational x = oracle::random_rational(rng, 0, 1);
        auto [px, py] = cylinder_map(c, w).apply(x, l.slope * x + l.intercept);
        EXPECT_EQ(py, img.slope * px + img.intercept);
    }
}

TEST(PushLine, Functoriality) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 200; ++trial) {
        const Carpet c = oracle::random_carpet(rng);
        const Word a = oracle::random_word(rng, c, 5), b = oracle::random_word(rng, c, 5);
        Word ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const Line l{oracle::random_rational(rng, -3, 3), oracle::random_rational(rng, -1, 2)};
        EXPECT_EQ(push_line(c, ab, l), push_line(c, a, push_line(c, b, l)));
    }
}
