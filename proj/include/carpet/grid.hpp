// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "carpet/carpet.hpp"
#include "carpet/parallel.hpp"
#include "carpet/projection.hpp"

namespace carpet {

/// Half-open cell [col/m^p, (col+1)/m^p) x [row/m^p, (row+1)/m^p) of the
/// m-adic grid; `row` is empty for 1-D cells.
struct Cell {
    unsigned level = 0;
    Integer col = 0;
    std::optional<Integer> row;

    friend bool operator==(const Cell& a, const Cell& b) {
        return a.level == b.level && a.col == b.col && a.row == b.row;
    }
    friend bool operator<(const Cell& a, const Cell& b) {
        if (a.level != b.level) return a.level < b.level;
        if (a.col != b.col) return a.col < b.col;
        return a.row < b.row;
    }

    /// `level:col:row`
    std::string str() const {
        return std::to_string(level) + ":" + col.get_str() + (row ? ":" + row->get_str() : std::string());
    }
};

inline Cell cell_of(const Point& pt, unsigned p, int m) {
    const Rational scale = qpow(m, p);
    return {p, floor_q(pt.x * scale), floor_q(pt.y * scale)};
}

inline Cell cell_of(const Rational& x, unsigned p, int m) {
    return {p, floor_q(x * qpow(m, p)), std::nullopt};
}

/// Cells whose closures meet the closure of c, c included.
inline std::vector<Cell> adjacent_cells(const Cell& c) {
    std::vector<Cell> out;
    for (int dx = -1; dx <= 1; ++dx) {
        if (!c.row) {
            out.push_back({c.level, c.col + dx, std::nullopt});
            continue;
        }
        for (int dy = -1; dy <= 1; ++dy) out.push_back({c.level, c.col + dx, *c.row + dy});
    }
    return out;
}

inline bool is_adjacent(const Cell& a, const Cell& b) {
    if (a.level != b.level || a.row.has_value() != b.row.has_value()) return false;
    Integer dc = a.col - b.col;
    if (abs(dc) > 1) return false;
    if (!a.row) return true;
    Integer dr = *a.row - *b.row;
    return abs(dr) <= 1;
}

/// Smallest r with n^r >= m, i.e. ceil(log m / log n) for m > n.
inline unsigned log_ratio_ceil(int m, int n) {
    unsigned r = 0;
    Integer p = 1;
    while (p < m) {
        p *= n;
        ++r;
    }
    return r;
}

inline unsigned min_cover_depth(const Carpet& c, unsigned level) {
    return level * log_ratio_ceil(c.m(), c.n()) + 1;
}

inline unsigned default_cover_depth(const Carpet& c, unsigned level) {
    return std::max(2 * level * log_ratio_ceil(c.m(), c.n()), min_cover_depth(c, level));
}

struct CoverBounds {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    unsigned depth = 0;
};

/// A word certified to meet the line, together with the target cell (relative
/// to the enclosing cell Q) that contains every point of line and cylinder.
struct Witness {
    Word word;
    std::int64_t col = 0;
    std::int64_t row = 0;
};

struct CoverResult {
    CoverBounds bounds;
    std::vector<Witness> witnesses;
    /// Target cells (relative to Q) with a witness, sorted.
    std::vector<std::pair<std::int64_t, std::int64_t>> certified_cells;
};

namespace detail {

using RelCell = std::pair<std::int64_t, std::int64_t>;

struct PowerTable {
    std::vector<Rational> inv_m;
    std::vector<Rational> inv_n;

    PowerTable(int m, int n, std::size_t depth) {
        inv_m.reserve(depth + 1);
        inv_n.reserve(depth + 1);
        for (std::size_t g = 0; g <= depth; ++g) {
            inv_m.push_back(qinvpow(m, g));
            inv_n.push_back(qinvpow(n, g));
        }
    }
};

/// The closed part of a cylinder box where line points can live.
struct Region {
    Rational x1, x2, y1, y2;
};

/// Clips the line y = u x + t to the closed box; nullopt when they miss.
inline std::optional<Region> clip_line(const Rational& u, const Rational& t, const Rational& xa,
                                       const Rational& xb, const Rational& ya, const Rational& yb) {
    if (u == 0) {
        if (t < ya || t > yb) return std::nullopt;
        return Region{xa, xb, t, t};
    }
    Rational xl = (ya - t) / u;
    Rational xh = (yb - t) / u;
    if (u < 0) std::swap(xl, xh);
    Rational x1 = max_q(xa, xl);
    Rational x2 = min_q(xb, xh);
    if (x1 > x2) return std::nullopt;
    Rational y1 = u * x1 + t;
    Rational y2 = u * x2 + t;
    if (y1 > y2) std::swap(y1, y2);
    return Region{std::move(x1), std::move(x2), std::move(y1), std::move(y2)};
}

/// Branch-and-prune over cylinder words, restricted to the target cell Q.
///
/// A node stops as soon as everything it can contribute lies in one target
/// cell: with a certified hit it feeds both bounds, otherwise it keeps
/// splitting until `depth`, where its region feeds only the upper bound.
class CoverEngine {
public:
    struct Node {
        Word word;
        Integer a = 0;
        Integer b = 0;
    };

    struct Partial {
        std::set<RelCell> lower;
        std::set<RelCell> upper;
        std::vector<Witness> witnesses;

        void merge(Partial&& o) {
            lower.insert(o.lower.begin(), o.lower.end());
            upper.insert(o.upper.begin(), o.upper.end());
            for (auto& w : o.witnesses) witnesses.push_back(std::move(w));
        }
    };

    CoverEngine(const Carpet& c, const SlopeContext* line_ctx, std::optional<Rational> intercept,
                const Cell& q_cell, unsigned sublevel, unsigned depth, bool keep_witnesses = true)
        : c_(c), ctx_(line_ctx), t_(std::move(intercept)), q_(q_cell), b_(sublevel), depth_(depth),
          keep_witnesses_(keep_witnesses),
          level_(q_cell.level + sublevel), powers_(c.m(), c.n(), depth) {
        if (!q_cell.row) throw Error(ErrorKind::DigitRange, "covering needs a 2-D cell");
        Integer span = ipow(c.m(), sublevel);
        if (span > Integer(1) << 40) throw Error(ErrorKind::DepthTooShallow, "sublevel too fine for relative indexing");
        span_ = span.get_si();
        scale_ = qpow(c.m(), level_);
        col0_ = q_cell.col * span;
        row0_ = *q_cell.row * span;
    }

    Partial run() const {
        // Breadth-first expansion to a fixed frontier size keeps the split, and
        // hence the witness order, independent of the worker count.
        constexpr std::size_t kFrontier = 64;
        Partial head;
        std::vector<Node> frontier{Node{}};
        std::size_t g = 0;
        while (!frontier.empty() && frontier.size() < kFrontier && g < depth_) {
            std::vector<Node> next;
            for (const auto& nd : frontier) {
                if (auto kids = step(nd, head)) {
                    for (auto& k : *kids) next.push_back(std::move(k));
                }
            }
            frontier = std::move(next);
            ++g;
        }
        std::vector<Partial> parts(frontier.size());
        parallel_for(frontier.size(), [&](std::size_t i) { explore(frontier[i], parts[i]); });
        for (auto& p : parts) head.merge(std::move(p));
        return head;
    }

private:
    std::optional<std::vector<Node>> step(const Node& nd, Partial& out) const {
        const std::size_t g = nd.word.size();
        const Rational& sx = powers_.inv_m[g];
        const Rational& sy = powers_.inv_n[g];
        Rational xa = Rational(nd.a) * sx;
        Rational ya = Rational(nd.b) * sy;
        Rational xb = xa + sx;
        Rational yb = ya + sy;

        Tri tri = Tri::Yes;
        Region reg{xa, xb, ya, yb};
        if (ctx_) {
            tri = SlopeContext::classify(ctx_->base(g).scaled(sy, ya - ctx_->slope() * xa), *t_);
            if (tri == Tri::No) return std::nullopt;
            auto clipped = clip_line(ctx_->slope(), *t_, xa, xb, ya, yb);
            if (!clipped) return std::nullopt;
            reg = std::move(*clipped);
        }
        Integer c1 = floor_q(reg.x1 * scale_) - col0_;
        Integer c2 = floor_q(reg.x2 * scale_) - col0_;
        Integer r1 = floor_q(reg.y1 * scale_) - row0_;
        Integer r2 = floor_q(reg.y2 * scale_) - row0_;
        if (c2 < 0 || r2 < 0 || c1 >= span_ || r1 >= span_) return std::nullopt;
        // A region sticking out of Q may hold its only hit outside Q.
        const bool inside = c1 >= 0 && r1 >= 0 && c2 < span_ && r2 < span_;
        const bool single = c1 == c2 && r1 == r2;
        if (c1 < 0) c1 = 0;
        if (r1 < 0) r1 = 0;
        if (c2 >= span_) c2 = span_ - 1;
        if (r2 >= span_) r2 = span_ - 1;

        if (single && inside && tri == Tri::Yes) {
            RelCell cell{c1.get_si(), r1.get_si()};
            out.lower.insert(cell);
            out.upper.insert(cell);
            if (keep_witnesses_) out.witnesses.push_back({nd.word, cell.first, cell.second});
            return std::nullopt;
        }
        if (g >= depth_) {
            certify_points(xa, ya, sx, sy, out);
            for (std::int64_t cc = c1.get_si(); cc <= c2.get_si(); ++cc) {
                for (std::int64_t rr = r1.get_si(); rr <= r2.get_si(); ++rr) out.upper.insert({cc, rr});
            }
            return std::nullopt;
        }
        std::vector<Node> kids;
        kids.reserve(c_.digits().size());
        for (const auto& d : c_.digits()) {
            Node k;
            k.word = nd.word;
            k.word.push_back(d);
            k.a = nd.a * c_.m() + d.i;
            k.b = nd.b * c_.n() + d.j;
            kids.push_back(std::move(k));
        }
        return kids;
    }

    /// Images of digit fixed points are points of F; one lying exactly on the
    /// line certifies its cell even when no box fits inside it.
    void certify_points(const Rational& xa, const Rational& ya, const Rational& sx,
                        const Rational& sy, Partial& out) const {
        for (const auto& d : c_.digits()) {
            const Rational px = xa + sx * make_q(d.i, c_.m() - 1);
            const Rational py = ya + sy * make_q(d.j, c_.n() - 1);
            if (ctx_ && py != ctx_->slope() * px + *t_) continue;
            const Integer cc = floor_q(px * scale_) - col0_;
            const Integer rr = floor_q(py * scale_) - row0_;
            if (cc < 0 || rr < 0 || cc >= span_ || rr >= span_) continue;
            out.lower.insert({cc.get_si(), rr.get_si()});
            out.upper.insert({cc.get_si(), rr.get_si()});
        }
    }

    void explore(const Node& nd, Partial& out) const {
        auto kids = step(nd, out);
        if (!kids) return;
        for (const auto& k : *kids) explore(k, out);
    }

    const Carpet& c_;
    const SlopeContext* ctx_;
    std::optional<Rational> t_;
    Cell q_;
    unsigned b_;
    unsigned depth_;
    bool keep_witnesses_;
    unsigned level_;
    PowerTable powers_;
    std::int64_t span_ = 1;
    Rational scale_;
    Integer col0_;
    Integer row0_;
};

inline CoverResult finish(CoverEngine::Partial&& p, unsigned depth) {
    CoverResult r;
    std::set<RelCell> all = std::move(p.upper);
    all.insert(p.lower.begin(), p.lower.end());
    r.bounds = {static_cast<std::int64_t>(p.lower.size()), static_cast<std::int64_t>(all.size()), depth};
    r.witnesses = std::move(p.witnesses);
    r.certified_cells.assign(p.lower.begin(), p.lower.end());
    return r;
}

inline void check_depth(const Carpet& c, unsigned level, unsigned depth) {
    if (depth < min_cover_depth(c, level)) {
        throw Error(ErrorKind::DepthTooShallow, "depth " + std::to_string(depth) + " < required " +
                                                    std::to_string(min_cover_depth(c, level)));
    }
}

} // namespace detail

/// Certified two-sided count of the cells of level k+b inside Q met by the
/// slice l_{u,t} ∩ F ∩ Q, with the witnesses behind the lower bound.
inline CoverResult covering_number_details(const SlopeContext& ctx, const Rational& t, const Cell& q_cell,
                                           unsigned sublevel, std::optional<unsigned> depth = std::nullopt) {
    const unsigned level = q_cell.level + sublevel;
    const unsigned d = depth.value_or(default_cover_depth(ctx.carpet(), level));
    detail::check_depth(ctx.carpet(), level, d);
    detail::CoverEngine engine(ctx.carpet(), &ctx, t, q_cell, sublevel, d);
    return detail::finish(engine.run(), d);
}

inline CoverBounds covering_number_bounds(const Carpet& c, const Line& ln, const Cell& q_cell, unsigned sublevel,
                                          std::optional<unsigned> depth = std::nullopt) {
    SlopeContext ctx(c, ln.slope);
    return covering_number_details(ctx, ln.intercept, q_cell, sublevel, depth).bounds;
}

/// Smallest g with n^g >= m^level: generation-g boxes are no taller than a
/// level cell.
inline unsigned set_cover_generation(const Carpet& c, unsigned level) {
    const Integer target = ipow(c.m(), level);
    unsigned g = 0;
    for (Integer p = 1; p < target; p *= c.n()) ++g;
    return std::max(g, level);
}

namespace detail {

using i128 = __int128;

/// Word enumeration for F itself in 128-bit integers. A cell counts towards
/// the lower bound once it holds the image of a digit fixed point, which is
/// a point of F; the upper bound takes every cell a closed box meets.
class SetCounter {
public:
    SetCounter(const Carpet& c, const Cell& q, unsigned sublevel, unsigned g)
        : c_(c), g_(g), level_(q.level + sublevel) {
        span_ = ipow(c.m(), sublevel).get_si();
        col0_ = static_cast<i128>(q.col.get_si());
        row0_ = static_cast<i128>(q.row->get_si());
        for (unsigned h = 0; h <= g; ++h) {
            pm_.push_back(pow128(c.m(), h));
            pn_.push_back(pow128(c.n(), h));
        }
        ml_ = pow128(c.m(), level_);
        lower_.assign(static_cast<std::size_t>(span_ * span_), false);
        upper_.assign(static_cast<std::size_t>(span_ * span_), false);
    }

    /// True when every intermediate product fits comfortably in 127 bits.
    static bool fits(const Carpet& c, const Cell& q, unsigned sublevel, unsigned g) {
        if (!q.row || q.col < 0 || *q.row < 0) return false;
        const unsigned level = q.level + sublevel;
        const Integer bound = Integer(1) << 120;
        if (ipow(c.m(), g + level + 1) >= bound) return false;
        if (ipow(c.n(), g + 1) * ipow(c.m(), level + 1) >= bound) return false;
        return ipow(c.m(), sublevel) <= Integer(1) << 13;
    }

    CoverBounds run() {
        walk(0, 0, 0);
        CoverBounds b;
        b.lower = std::count(lower_.begin(), lower_.end(), true);
        b.upper = std::count(upper_.begin(), upper_.end(), true);
        b.depth = g_;
        return b;
    }

private:
    static i128 pow128(int base, unsigned e) {
        i128 r = 1;
        for (unsigned k = 0; k < e; ++k) r *= base;
        return r;
    }

    static i128 floor_div(i128 a, i128 b) { return a / b; } // operands are non-negative

    void walk(i128 a, i128 b, unsigned h) {
        const i128 qa = col0_ * pm_[h], qb = (col0_ + span_) * pm_[h];
        if ((a + 1) * ml_ < qa || a * ml_ > qb) return;
        const i128 ra = row0_ * pn_[h], rb = (row0_ + span_) * pn_[h];
        if ((b + 1) * ml_ < ra || b * ml_ > rb) return;
        if (h < g_) {
            for (const auto& d : c_.digits()) walk(a * c_.m() + d.i, b * c_.n() + d.j, h + 1);
            return;
        }
        i128 c1 = floor_div(a * ml_, pm_[h]) - col0_, c2 = floor_div((a + 1) * ml_, pm_[h]) - col0_;
        i128 r1 = floor_div(b * ml_, pn_[h]) - row0_, r2 = floor_div((b + 1) * ml_, pn_[h]) - row0_;
        c1 = std::max<i128>(c1, 0);
        r1 = std::max<i128>(r1, 0);
        c2 = std::min<i128>(c2, span_ - 1);
        r2 = std::min<i128>(r2, span_ - 1);
        for (i128 cc = c1; cc <= c2; ++cc) {
            for (i128 rr = r1; rr <= r2; ++rr) upper_[static_cast<std::size_t>(cc * span_ + rr)] = true;
        }
        const int m1 = c_.m() - 1, n1 = c_.n() - 1;
        for (const auto& d : c_.digits()) {
            i128 cc = floor_div((a * m1 + d.i) * ml_, pm_[h] * m1) - col0_;
            i128 rr = floor_div((b * n1 + d.j) * ml_, pn_[h] * n1) - row0_;
            if (cc < 0 || rr < 0 || cc >= span_ || rr >= span_) continue;
            lower_[static_cast<std::size_t>(cc * span_ + rr)] = true;
        }
    }

    const Carpet& c_;
    unsigned g_;
    unsigned level_;
    std::int64_t span_ = 1;
    i128 col0_ = 0, row0_ = 0, ml_ = 1;
    std::vector<i128> pm_, pn_;
    std::vector<bool> lower_, upper_;
};

} // namespace detail

/// Two-sided N(F ∩ Q, level k+b). `depth` is the word generation; it must be
/// at least the target level.
inline CoverBounds set_covering_bounds(const Carpet& c, const Cell& q_cell, unsigned sublevel,
                                       std::optional<unsigned> depth = std::nullopt) {
    const unsigned level = q_cell.level + sublevel;
    const unsigned g = depth.value_or(set_cover_generation(c, level));
    if (g < level) {
        throw Error(ErrorKind::DepthTooShallow, "depth " + std::to_string(g) + " < level " + std::to_string(level));
    }
    if (detail::SetCounter::fits(c, q_cell, sublevel, g)) return detail::SetCounter(c, q_cell, sublevel, g).run();
    const unsigned d = std::max(g, min_cover_depth(c, level));
    detail::CoverEngine engine(c, nullptr, std::nullopt, q_cell, sublevel, d, false);
    return detail::finish(engine.run(), d).bounds;
}

/// Exact number of half-open level-p cells met by the horizontal fiber
/// {sum x_k m^-k : x_k in D_j}.
///
/// Prefix cells are val(w) for w in D_j^p; when m-1 is an allowed digit the
/// points with an all-(m-1) tail land in val(w)+1 as well.
inline std::int64_t fiber_covering_number(const Carpet& c, const Fiber& f, unsigned p) {
    if (Integer(ipow(c.m(), p)) > Integer(1) << 62) throw Error(ErrorKind::DepthTooShallow, "level too fine");
    std::vector<std::uint64_t> vals{0};
    for (unsigned l = 0; l < p; ++l) {
        std::vector<std::uint64_t> next;
        next.reserve(vals.size() * f.digits.size());
        for (auto v : vals) {
            for (int d : f.digits) next.push_back(v * static_cast<std::uint64_t>(c.m()) + static_cast<std::uint64_t>(d));
        }
        vals = std::move(next);
    }
    const bool tails = std::find(f.digits.begin(), f.digits.end(), c.m() - 1) != f.digits.end();
    std::vector<std::uint64_t> cells = vals;
    if (tails) {
        for (auto v : vals) cells.push_back(v + 1);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return static_cast<std::int64_t>(cells.size());
}

/// Sorted level-p cell indices met by the fiber (same rule as above).
inline std::vector<std::uint64_t> fiber_cells(const Carpet& c, const Fiber& f, unsigned p) {
    std::vector<std::uint64_t> vals{0};
    for (unsigned l = 0; l < p; ++l) {
        std::vector<std::uint64_t> next;
        for (auto v : vals) {
            for (int d : f.digits) next.push_back(v * static_cast<std::uint64_t>(c.m()) + static_cast<std::uint64_t>(d));
        }
        vals = std::move(next);
    }
    std::vector<std::uint64_t> cells = vals;
    if (std::find(f.digits.begin(), f.digits.end(), c.m() - 1) != f.digits.end()) {
        for (auto v : vals) cells.push_back(v + 1);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

struct FurstenbergEntry {
    unsigned base_level = 0;
    Cell cell;
    unsigned window = 0;
    std::int64_t lower = 0;
};

struct FurstenbergEstimate {
    unsigned window = 0;
    unsigned base_level = 0;
    Cell cell;
    double value = 0;
};

/// max over entries of log N / (i log m)
inline FurstenbergEstimate furstenberg_estimate(const std::vector<FurstenbergEntry>& counts, int m) {
    if (counts.empty()) throw Error(ErrorKind::EmptyInput, "no counts");
    const unsigned i = counts.front().window;
    if (i == 0) throw Error(ErrorKind::EmptyInput, "window must be >= 1");
    std::optional<FurstenbergEstimate> best;
    for (const auto& e : counts) {
        if (e.window != i) throw Error(ErrorKind::EmptyInput, "mixed windows");
        if (e.lower <= 0) continue;
        double v = std::log(static_cast<double>(e.lower)) / (i * std::log(static_cast<double>(m)));
        if (!best || v > best->value) best = FurstenbergEstimate{i, e.base_level, e.cell, v};
    }
    if (!best) return {i, counts.front().base_level, counts.front().cell, 0.0};
    return *best;
}

// ---------------------------------------------------------------------------
// Box unions and the Hausdorff continuity of covering numbers.

struct Box {
    Rational x_lo, x_hi, y_lo, y_hi;
};

using BoxUnion = std::vector<Box>;

/// Number of half-open level-p cells meeting a union of closed boxes.
inline std::int64_t box_union_cover(const BoxUnion& u, int m, unsigned p) {
    const Rational scale = qpow(m, p);
    std::set<std::pair<Integer, Integer>> cells;
    for (const auto& b : u) {
        Integer c1 = floor_q(b.x_lo * scale), c2 = floor_q(b.x_hi * scale);
        Integer r1 = floor_q(b.y_lo * scale), r2 = floor_q(b.y_hi * scale);
        for (Integer c = c1; c <= c2; ++c) {
            for (Integer r = r1; r <= r2; ++r) cells.insert({c, r});
        }
    }
    return static_cast<std::int64_t>(cells.size());
}

namespace detail {

/// sup over points of a of the sup-norm distance to b
inline Rational directed_sup_dist(const Box& a, const Box& b) {
    Rational dx = max_q(max_q(b.x_lo - a.x_lo, a.x_hi - b.x_hi), Rational(0));
    Rational dy = max_q(max_q(b.y_lo - a.y_lo, a.y_hi - b.y_hi), Rational(0));
    return max_q(dx, dy);
}

/// Every point of A lies within Euclidean distance r of B. Uses the bound
/// |v|_2 <= sqrt(2) |v|_inf, so the test is 2 d^2 <= r^2.
inline bool directed_within(const BoxUnion& a, const BoxUnion& b, const Rational& r) {
    if (b.empty()) return a.empty();
    std::vector<const Box*> sorted;
    sorted.reserve(b.size());
    Rational max_w(0);
    for (const auto& bx : b) {
        sorted.push_back(&bx);
        max_w = max_q(max_w, bx.x_hi - bx.x_lo);
    }
    std::sort(sorted.begin(), sorted.end(), [](const Box* p, const Box* q) { return p->x_lo < q->x_lo; });
    const Rational r2 = r * r;
    for (const auto& ax : a) {
        const Rational from = ax.x_hi - r - max_w;
        const Rational to = ax.x_lo + r;
        auto it = std::lower_bound(sorted.begin(), sorted.end(), from,
                                   [](const Box* p, const Rational& v) { return p->x_lo < v; });
        bool ok = false;
        for (; it != sorted.end() && (*it)->x_lo <= to; ++it) {
            Rational d = directed_sup_dist(ax, **it);
            if (2 * d * d <= r2) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

} // namespace detail

inline bool hausdorff_within(const BoxUnion& a, const BoxUnion& b, const Rational& r) {
    return detail::directed_within(a, b, r) && detail::directed_within(b, a, r);
}

struct Lemma0Row {
    std::size_t index = 0; // 1-based position in the sequence
    bool close = false;    // d_H(X_k, X) <= m^{-2p} certified
    std::int64_t count_k = 0;
    std::int64_t count_limit = 0;
    bool holds = false; // 9 N(X) >= N(X_k)
};

struct Lemma0Report {
    unsigned level = 0;
    std::size_t threshold = 0;
    std::vector<Lemma0Row> rows;
    bool passed = false;
};

/// Finds the first index past which every X_k is within m^{-2p} of X and
/// checks N(X, D_{m^p}) >= N(X_k, D_{m^p}) / 9 for all of them.
inline Lemma0Report lemma0_check(const std::vector<BoxUnion>& xs, const BoxUnion& limit, int m, unsigned p) {
    if (p < 3) throw Error(ErrorKind::DepthTooShallow, "level must be >= 3");
    if (xs.empty()) throw Error(ErrorKind::EmptyInput, "empty sequence");
    Lemma0Report rep;
    rep.level = p;
    const Rational r = qinvpow(m, 2 * p);
    const std::int64_t nx = box_union_cover(limit, m, p);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        Lemma0Row row;
        row.index = k + 1;
        row.close = hausdorff_within(xs[k], limit, r);
        row.count_k = box_union_cover(xs[k], m, p);
        row.count_limit = nx;
        row.holds = 9 * nx >= row.count_k;
        rep.rows.push_back(row);
    }
    std::size_t threshold = xs.size();
    while (threshold > 0 && rep.rows[threshold - 1].close) --threshold;
    if (threshold == xs.size()) throw Error(ErrorKind::NotConverged, "last element not within m^-2p of the limit");
    rep.threshold = threshold;
    rep.passed = true;
    for (std::size_t k = threshold; k < xs.size(); ++k) rep.passed = rep.passed && rep.rows[k].holds;
    return rep;
}

/// Outer box-union picture of l_{u,t} ∩ F at generation g: the line segment
/// inside every cylinder box that is not certified to miss the line.
inline BoxUnion slice_pieces(const SlopeContext& ctx, const Rational& t, std::size_t g) {
    const Carpet& c = ctx.carpet();
    detail::PowerTable powers(c.m(), c.n(), g);
    BoxUnion out;
    struct Frame {
        Integer a, b;
        std::size_t gen;
    };
    std::vector<Frame> stack{{0, 0, 0}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const Rational xa = Rational(f.a) * powers.inv_m[f.gen];
        const Rational ya = Rational(f.b) * powers.inv_n[f.gen];
        if (SlopeContext::classify(ctx.base(f.gen).scaled(powers.inv_n[f.gen], ya - ctx.slope() * xa), t) == Tri::No) continue;
        auto reg = detail::clip_line(ctx.slope(), t, xa, xa + powers.inv_m[f.gen], ya, ya + powers.inv_n[f.gen]);
        if (!reg) continue;
        if (f.gen == g) {
            out.push_back({reg->x1, reg->x2, reg->y1, reg->y2});
            continue;
        }
        for (auto it = c.digits().rbegin(); it != c.digits().rend(); ++it) {
            stack.push_back({f.a * c.m() + it->i, f.b * c.n() + it->j, f.gen + 1});
        }
    }
    return out;
}

} // namespace carpet
