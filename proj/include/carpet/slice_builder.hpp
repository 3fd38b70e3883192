// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carpet/carpet.hpp"
#include "carpet/grid.hpp"
#include "carpet/projection.hpp"

namespace carpet {

/// Upper bound on how many cells of one grid column a line of slope u meets.
inline std::int64_t s_of_u(const Rational& u) { return floor_q(abs_q(u)).get_si() + 2; }

/// s(u)^-2 / 18
inline Rational cell_selection_constant(const Rational& u) {
    const std::int64_t s = s_of_u(u);
    return make_q(1, 18 * s * s);
}

// ---------------------------------------------------------------------------
// Slope perturbation of the optimal fiber.

struct PerturbResult {
    Rational t;      // midpoint of the common intercept interval
    Rational radius; // half its width
    Rational lo;
    Rational hi;
    unsigned generation = 0;   // k with n^-k < m^-p
    std::int64_t fiber_cells = 0;
    std::int64_t retained = 0; // certified level-p cells met for every t' in [lo, hi]
    std::int64_t certified_distinct = 0;
};

/// For every level-p cell D on the optimal fiber, takes the cylinder of
/// generation k whose x-digits follow a fiber point in D and whose row digits
/// are all j*. Lines l_{u,t'} with t' in the intersection of their intercept
/// intervals meet each of those cylinders, hence a cell adjacent to each D.
inline PerturbResult perturb_slope(const Carpet& c, unsigned p, const Rational& u) {
    if (p == 0) throw Error(ErrorKind::DepthZero, "level must be >= 1");
    SlopeContext ctx(c, u);
    const Fiber f = optimal_fiber(c);

    unsigned k = 0;
    while (ipow(c.n(), k) <= ipow(c.m(), p)) ++k;

    // cell index -> x-digit word of length k
    std::map<std::uint64_t, std::vector<int>> words;
    std::vector<std::vector<int>> prefixes{{}};
    for (unsigned l = 0; l < p; ++l) {
        std::vector<std::vector<int>> next;
        for (const auto& w : prefixes) {
            for (int d : f.digits) {
                auto x = w;
                x.push_back(d);
                next.push_back(std::move(x));
            }
        }
        prefixes = std::move(next);
    }
    const bool tails = std::find(f.digits.begin(), f.digits.end(), c.m() - 1) != f.digits.end();
    for (const auto& w : prefixes) {
        std::uint64_t v = 0;
        for (int d : w) v = v * static_cast<std::uint64_t>(c.m()) + static_cast<std::uint64_t>(d);
        auto low = w;
        low.resize(k, f.digits.front());
        words.emplace(v, std::move(low));
    }
    if (tails) {
        for (const auto& w : prefixes) {
            std::uint64_t v = 0;
            for (int d : w) v = v * static_cast<std::uint64_t>(c.m()) + static_cast<std::uint64_t>(d);
            auto high = w;
            high.resize(k, c.m() - 1);
            words.emplace(v + 1, std::move(high)); // keeps the prefix word when both exist
        }
    }

    struct Cyl {
        Integer a, b;
    };
    std::vector<Cyl> cyls;
    std::optional<Rational> lo, hi;
    for (const auto& [cell, xs] : words) {
        Cyl cy{0, 0};
        for (int d : xs) {
            cy.a = cy.a * c.m() + d;
            cy.b = cy.b * c.n() + f.row;
        }
        auto e = ctx.intercepts(cy.a, cy.b, k);
        if (!e.valid) throw Error(ErrorKind::SlopeTooLarge, "projection not certified as an interval");
        if (!lo || e.inner_lo > *lo) lo = e.inner_lo;
        if (!hi || e.inner_hi < *hi) hi = e.inner_hi;
        cyls.push_back(std::move(cy));
    }
    if (!(*lo < *hi)) {
        throw Error(ErrorKind::SlopeTooLarge, "slope " + to_pq(u) + " leaves no common intercept at level " +
                                                  std::to_string(p));
    }

    PerturbResult r;
    r.lo = *lo;
    r.hi = *hi;
    r.t = (r.lo + r.hi) / 2;
    r.radius = (r.hi - r.lo) / 2;
    r.generation = k;
    r.fiber_cells = static_cast<std::int64_t>(words.size());

    const Rational scale = qpow(c.m(), p);
    const Rational sx = qinvpow(c.m(), k);
    const Rational sy = qinvpow(c.n(), k);
    std::set<std::pair<Integer, Integer>> distinct;
    for (const auto& cy : cyls) {
        const Rational xa = Rational(cy.a) * sx, xb = xa + sx;
        const Rational ya = Rational(cy.b) * sy, yb = ya + sy;
        const Rational ua = u * xa, ub = u * xb;
        const Rational y1 = max_q(r.lo + min_q(ua, ub), ya);
        const Rational y2 = min_q(r.hi + max_q(ua, ub), yb);
        if (y1 > y2) continue;
        Integer c1 = floor_q(xa * scale), c2 = floor_q(xb * scale);
        Integer r1 = floor_q(y1 * scale), r2 = floor_q(y2 * scale);
        if (c1 == c2 && r1 == r2) distinct.insert({c1, r1});
    }
    r.certified_distinct = static_cast<std::int64_t>(distinct.size());
    r.retained = std::max<std::int64_t>(r.certified_distinct, (r.fiber_cells + 8) / 9);
    return r;
}

// ---------------------------------------------------------------------------
// One-sided intercept neighborhoods.

enum class Side { Left, Right };

inline char side_char(Side s) { return s == Side::Right ? 'R' : 'L'; }

struct GoodNeighborhood {
    Rational base;
    Side side = Side::Right;
    Rational delta;
    std::int64_t retained = 0;

    /// Closed interval on which `retained` is certified.
    Rational lo() const { return side == Side::Right ? base : base - delta; }
    Rational hi() const { return side == Side::Right ? base + delta : base; }

    friend bool operator==(const GoodNeighborhood&, const GoodNeighborhood&) = default;
};

/// Each witness keeps its target cell while t moves inside its inner
/// intercept interval and the line piece over its box stays inside the
/// cell's row. The side favoured by more cells wins (ties go right); delta is
/// the smallest positive slack on that side.
inline GoodNeighborhood good_one_sided_neighborhood(const SlopeContext& ctx, const Rational& t, const Cell& q_cell,
                                                    unsigned sublevel, std::optional<unsigned> depth = std::nullopt) {
    const Carpet& c = ctx.carpet();
    const auto res = covering_number_details(ctx, t, q_cell, sublevel, depth);
    if (res.witnesses.empty()) throw Error(ErrorKind::EmptyIntersection, "no certified hit inside the cell");

    const unsigned level = q_cell.level + sublevel;
    const Rational scale = qpow(c.m(), level);
    const Integer span = ipow(c.m(), sublevel);
    const Integer col0 = q_cell.col * span;
    const Integer row0 = *q_cell.row * span;
    const Rational& u = ctx.slope();

    struct Slack {
        std::optional<Rational> right, left;
    };
    std::map<std::pair<std::int64_t, std::int64_t>, Slack> per_cell;
    for (const auto& w : res.witnesses) {
        auto& best = per_cell[{w.col, w.row}];
        const auto e = ctx.intercepts(w.word);
        auto [a, b] = word_numerators(c, w.word);
        const std::size_t g = w.word.size();
        const Rational xa = Rational(a) / qpow(c.m(), g), xb = xa + qinvpow(c.m(), g);
        const Rational ya = Rational(b) / qpow(c.n(), g), yb = ya + qinvpow(c.n(), g);
        if (floor_q(xa * scale) != floor_q(xb * scale)) continue;
        const Rational row_bot = Rational(row0 + w.row) / scale;
        const Rational row_top = Rational(row0 + w.row + 1) / scale;
        const Rational sb = t + min_q(u * xa, u * xb);
        const Rational st = t + max_q(u * xa, u * xb);
        Rational right = e.inner_hi - t;
        if (yb >= row_top) right = min_q(right, (row_top - st) / 2);
        Rational left = t - e.inner_lo;
        if (ya < row_bot) left = min_q(left, (sb - row_bot) / 2);
        if (!best.right || right > *best.right) best.right = right;
        if (!best.left || left > *best.left) best.left = left;
    }

    std::int64_t votes_right = 0, votes_left = 0;
    for (const auto& [cell, s] : per_cell) {
        if (!s.right) continue;
        if (*s.right >= *s.left && *s.right > 0) ++votes_right;
        else if (*s.left > 0) ++votes_left;
    }
    if (votes_right + votes_left == 0) throw Error(ErrorKind::EmptyIntersection, "no witness has room on either side");
    const Side side = votes_right >= votes_left ? Side::Right : Side::Left;

    std::optional<Rational> delta;
    for (const auto& [cell, s] : per_cell) {
        if (!s.right) continue;
        const bool favours = side == Side::Right ? (*s.right >= *s.left && *s.right > 0)
                                                 : !(*s.right >= *s.left && *s.right > 0) && *s.left > 0;
        if (!favours) continue;
        const Rational& v = side == Side::Right ? *s.right : *s.left;
        if (!delta || v < *delta) delta = v;
    }
    GoodNeighborhood nb;
    nb.base = t;
    nb.side = side;
    nb.delta = *delta;
    for (const auto& [cell, s] : per_cell) {
        if (!s.right) continue;
        const Rational& v = side == Side::Right ? *s.right : *s.left;
        if (v >= nb.delta) ++nb.retained;
    }
    return nb;
}

// ---------------------------------------------------------------------------
// Cell selection inside a cylinder column.

struct CellChoice {
    Cell cell;
    CoverBounds bounds;
    std::int64_t stack_lower_total = 0;
    std::size_t stack_size = 0;
};

/// Splits the cylinder box of I into level-|I| squares, keeps those the line
/// passes through and returns the one with the largest certified count at
/// sublevel p.
inline CellChoice select_cell(const SlopeContext& ctx, const Rational& t, const Word& word, unsigned p,
                              std::optional<unsigned> depth = std::nullopt) {
    const Carpet& c = ctx.carpet();
    const auto k = static_cast<unsigned>(word.size());
    auto [a, b] = word_numerators(c, word);
    const Rational xa = Rational(a) / qpow(c.m(), k), xb = xa + qinvpow(c.m(), k);
    const Rational ya = Rational(b) / qpow(c.n(), k), yb = ya + qinvpow(c.n(), k);
    auto reg = detail::clip_line(ctx.slope(), t, xa, xb, ya, yb);
    if (!reg) throw Error(ErrorKind::EmptyIntersection, "line misses the cylinder box");
    const Rational scale = qpow(c.m(), k);
    const Integer r1 = floor_q(reg->y1 * scale), r2 = floor_q(reg->y2 * scale);

    std::optional<CellChoice> best;
    std::int64_t total = 0;
    std::size_t count = 0;
    for (Integer r = r1; r <= r2; ++r) {
        Cell q{k, a, r};
        auto bounds = covering_number_details(ctx, t, q, p, depth).bounds;
        total += bounds.lower;
        ++count;
        if (!best || bounds.lower > best->bounds.lower) best = CellChoice{q, bounds, 0, 0};
    }
    best->stack_lower_total = total;
    best->stack_size = count;
    return *best;
}

// ---------------------------------------------------------------------------
// The inductive construction.

struct StageCertificate {
    unsigned stage = 0;
    Rational intercept;
    unsigned base_level = 0;
    Cell cell;
    std::int64_t cert_lower = 0;
    std::int64_t cert_upper = 0;
    GoodNeighborhood neighborhood;

    friend bool operator==(const StageCertificate&, const StageCertificate&) = default;
};

struct SliceConstruction {
    Carpet carpet;
    Rational slope;
    std::vector<StageCertificate> stages;
    Rational limit_lo;
    Rational limit_hi;
    Rational cprime;

    friend bool operator==(const SliceConstruction&, const SliceConstruction&) = default;
};

struct BuildOptions {
    unsigned max_generation = 512;
    std::optional<unsigned> depth; // enumeration depth override
};

/// Intersection of the closed neighborhoods of all stages.
inline std::pair<Rational, Rational> limit_intercept(const std::vector<StageCertificate>& stages) {
    if (stages.empty()) throw Error(ErrorKind::EmptyInput, "no stages");
    Rational lo = stages.front().neighborhood.lo();
    Rational hi = stages.front().neighborhood.hi();
    for (const auto& s : stages) {
        lo = max_q(lo, s.neighborhood.lo());
        hi = min_q(hi, s.neighborhood.hi());
    }
    return {lo, hi};
}

inline std::pair<Rational, Rational> limit_intercept(const SliceConstruction& sc) { return limit_intercept(sc.stages); }

/// Target lower count at stage i: ceil(C' a^i) - 1, a^i = m^{(dim* - 1) i}.
inline std::int64_t stage_target(const Rational& cprime, int a, unsigned i) {
    return ceil_q(cprime * Rational(ipow(a, i))).get_si() - 1;
}

namespace detail {

inline StageCertificate certify_stage(const SlopeContext& ctx, unsigned stage, const Rational& t, const Cell& cell,
                                      const CoverBounds& bounds, const BuildOptions& opt) {
    StageCertificate sc;
    sc.stage = stage;
    sc.intercept = t;
    sc.base_level = cell.level;
    sc.cell = cell;
    sc.cert_lower = bounds.lower;
    sc.cert_upper = bounds.upper;
    sc.neighborhood = good_one_sided_neighborhood(ctx, t, cell, stage, opt.depth);
    return sc;
}

inline Word child_meeting(const SlopeContext& ctx, const Word& w, const Rational& s) {
    for (const auto& d : ctx.carpet().digits()) {
        Word k = w;
        k.push_back(d);
        if (SlopeContext::classify(ctx.intercepts(k), s) == Tri::Yes) return k;
    }
    return {};
}

} // namespace detail

inline SliceConstruction build_sharp_slice(const Carpet& c, const Rational& u, unsigned stages,
                                           const BuildOptions& opt = {}) {
    if (stages == 0) throw Error(ErrorKind::EmptyInput, "need at least one stage");
    if (u == 0) throw Error(ErrorKind::SlopeTooLarge, "slope must be nonzero");
    SlopeContext ctx(c, u);

    SliceConstruction out{c, u, {}, 0, 0, cell_selection_constant(u)};

    const auto first = perturb_slope(c, 1, u);
    const Cell root{0, 0, Integer(0)};
    const auto root_bounds = covering_number_details(ctx, first.t, root, 1, opt.depth).bounds;
    out.stages.push_back(detail::certify_stage(ctx, 1, first.t, root, root_bounds, opt));

    for (unsigned p = 2; p <= stages; ++p) {
        auto [lo, hi] = limit_intercept(out.stages);
        if (!(lo < hi)) throw Error(ErrorKind::StageStuck, "neighborhoods have empty interior at stage " + std::to_string(p));
        const Rational s = (lo + hi) / 2;
        const auto& prev = out.stages.back();

        auto located = covering_number_details(ctx, s, prev.cell, p - 1, opt.depth);
        if (located.witnesses.empty()) {
            throw Error(ErrorKind::StageStuck, "no certified hit of the shifted line in the previous cell at stage " +
                                                   std::to_string(p));
        }
        Word word = located.witnesses.front().word;

        std::optional<Rational> chosen;
        while (word.size() <= opt.max_generation) {
            const auto k = word.size();
            // the pushed intercept sits within about n^-k of s
            if (qinvpow(c.n(), k) <= 4 * (hi - lo)) {
                const Rational uk = u * qpow(c.n(), k) / qpow(c.m(), k);
                try {
                    const auto pr = perturb_slope(c, p, uk);
                    const Rational tp = push_line(c, word, Line{uk, pr.t}).intercept;
                    if (lo < tp && tp < hi) {
                        chosen = tp;
                        break;
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::SlopeTooLarge) throw;
                }
            }
            Word next = detail::child_meeting(ctx, word, s);
            if (next.empty()) {
                throw Error(ErrorKind::StageStuck, "descent lost the shifted line at generation " + std::to_string(k));
            }
            word = std::move(next);
        }
        if (!chosen) {
            throw Error(ErrorKind::StageStuck, "no admissible cylinder within generation " +
                                                   std::to_string(opt.max_generation) + " at stage " + std::to_string(p));
        }
        const auto choice = select_cell(ctx, *chosen, word, p, opt.depth);
        out.stages.push_back(detail::certify_stage(ctx, p, *chosen, choice.cell, choice.bounds, opt));
    }
    std::tie(out.limit_lo, out.limit_hi) = limit_intercept(out.stages);
    return out;
}

// ---------------------------------------------------------------------------
// Independent re-verification.

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct StageRecount {
    unsigned stage = 0;
    CoverBounds at_intercept;
    CoverBounds at_limit_lo;
    CoverBounds at_limit_hi;
    std::int64_t target = 0;
    double furstenberg = 0;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<StageRecount> stages;
    double empirical_c1 = 0;
    std::optional<unsigned> first_failing_stage;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

/// Recomputes every stage's counts with `extra_depth` more enumeration levels
/// than the build default and re-checks targets, nesting and the retained
/// counts at both ends of the limit interval.
inline VerificationReport verify_certificates(const SliceConstruction& sc, unsigned extra_depth = 0) {
    const Carpet& c = sc.carpet;
    SlopeContext ctx(c, sc.slope);
    VerificationReport rep;
    const int a = c.max_row_size();
    const double excess = std::log(static_cast<double>(a)) / std::log(static_cast<double>(c.m()));
    auto fail_stage = [&](unsigned i) {
        if (!rep.first_failing_stage || i < *rep.first_failing_stage) rep.first_failing_stage = i;
    };

    CheckResult slope{"slope", true, "all stages share u = " + to_pq(sc.slope)};
    CheckResult target{"targets", true, ""};
    CheckResult nesting{"nesting", true, ""};
    CheckResult recount{"recount", true, ""};
    CheckResult limit{"limit", true, ""};

    if (sc.cprime != cell_selection_constant(sc.slope)) {
        target.passed = false;
        target.detail = "C' does not match s(u)^-2/18";
    }
    auto [lo, hi] = limit_intercept(sc.stages);
    if (lo != sc.limit_lo || hi != sc.limit_hi || lo > hi) {
        limit.passed = false;
        limit.detail = "limit interval mismatch or empty";
    }

    double c1 = 0;
    for (std::size_t idx = 0; idx < sc.stages.size(); ++idx) {
        const auto& st = sc.stages[idx];
        const unsigned i = st.stage;
        if (i != idx + 1 || st.cell.level != st.base_level) {
            target.passed = false;
            fail_stage(i);
        }
        const unsigned level = st.base_level + i;
        const unsigned depth = default_cover_depth(c, level) + extra_depth;
        StageRecount rc;
        rc.stage = i;
        rc.at_intercept = covering_number_details(ctx, st.intercept, st.cell, i, depth).bounds;
        rc.target = stage_target(sc.cprime, a, i);
        rc.furstenberg = st.cert_lower > 0 ? std::log(static_cast<double>(st.cert_lower)) / (i * std::log(static_cast<double>(c.m()))) : 0.0;

        // (a) counts against the constant chain, recorded vs recomputed
        const auto& now = rc.at_intercept;
        if (st.cert_lower > st.cert_upper || st.cert_lower < rc.target || now.lower < rc.target ||
            st.cert_lower > now.upper || now.lower > st.cert_upper) {
            target.passed = false;
            target.detail += "stage " + std::to_string(i) + " ";
            fail_stage(i);
        }
        // (b) strict interiority in every earlier neighborhood
        for (std::size_t j = 0; j < idx; ++j) {
            const auto& nb = sc.stages[j].neighborhood;
            if (!(nb.lo() < st.intercept && st.intercept < nb.hi())) {
                nesting.passed = false;
                nesting.detail += "t_" + std::to_string(i) + " outside N_" + std::to_string(j + 1) + " ";
                fail_stage(i);
            }
        }
        if (st.neighborhood.base != st.intercept || st.neighborhood.delta <= 0) {
            nesting.passed = false;
            fail_stage(i);
        }
        // (c) retained counts at the ends of the limit interval
        if (lo <= hi) {
            rc.at_limit_lo = covering_number_details(ctx, lo, st.cell, i, depth).bounds;
            rc.at_limit_hi = covering_number_details(ctx, hi, st.cell, i, depth).bounds;
            const auto worst = std::min(rc.at_limit_lo.lower, rc.at_limit_hi.lower);
            if (worst < st.neighborhood.retained) {
                recount.passed = false;
                recount.detail += "stage " + std::to_string(i) + " ";
                fail_stage(i);
            }
            if (worst > 0) c1 = std::max(c1, static_cast<double>(st.cert_lower - 1) / static_cast<double>(worst));
        }
        rep.stages.push_back(rc);
    }
    rep.empirical_c1 = c1;
    if (target.detail.empty()) target.detail = "certLower >= ceil(C' a^i) - 1 at every stage";
    if (nesting.detail.empty()) nesting.detail = "every t_p strictly inside all earlier neighborhoods";
    if (recount.detail.empty()) recount.detail = "retained counts hold at both limit endpoints";
    if (limit.detail.empty()) limit.detail = "[" + to_pq(lo) + ", " + to_pq(hi) + "]";
    CheckResult furst{"furstenberg", true, ""};
    for (const auto& rc : rep.stages) {
        furst.detail += "i=" + std::to_string(rc.stage) + ":" + std::to_string(rc.furstenberg) + " ";
    }
    furst.detail += "target " + std::to_string(excess);
    rep.checks = {slope, target, nesting, recount, limit, furst};
    return rep;
}

} // namespace carpet
