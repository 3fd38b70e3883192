// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <limits>
#include <mutex>
#include <optional>

#include "carpet/carpet.hpp"

namespace carpet {

inline constexpr unsigned kDefaultProjectionDepth = 24;

/// Outer interval always brackets the target set; the inner one is contained
/// in it when `valid` is set.
struct IntervalEnclosure {
    Rational outer_lo;
    Rational outer_hi;
    Rational inner_lo;
    Rational inner_hi;
    bool valid = false;

    Rational outer_width() const { return outer_hi - outer_lo; }
    bool outer_contains(const Rational& t) const { return outer_lo <= t && t <= outer_hi; }
    bool inner_contains(const Rational& t) const { return valid && inner_lo <= t && t <= inner_hi; }

    /// Affine image s * X + shift for s > 0.
    IntervalEnclosure scaled(const Rational& s, const Rational& shift) const {
        return {s * outer_lo + shift, s * outer_hi + shift, s * inner_lo + shift, s * inner_hi + shift, valid};
    }
};

enum class Tri { No, Unknown, Yes };

inline const char* to_string(Tri t) {
    switch (t) {
    case Tri::No: return "No";
    case Tri::Unknown: return "Unknown";
    case Tri::Yes: return "Yes";
    }
    return "?";
}

/// pi_kappa(x, y) = y + kappa * x
inline Rational project_point(const Rational& kappa, const Point& p) { return p.y + kappa * p.x; }

/// Largest c >= 0 such that pi_kappa(f_d(L)) meets pi_kappa(L) for every digit d
/// and every |kappa| <= c, where L = {x0} x [0,1].
///
/// With d = (x0 + i)/m - x0 the two closed segments overlap iff
/// -(j+1)/n <= kappa * d <= (n-j)/n, so each digit contributes the threshold
/// min((j+1)/n, (n-j)/n) / |d|.
inline Rational compute_c0(const Carpet& c) {
    std::optional<Rational> best;
    const Rational& x0 = c.full_column_x();
    for (const auto& dg : c.digits()) {
        Rational d = (x0 + dg.i) / c.m() - x0;
        if (d == 0) continue;
        Rational room = min_q(make_q(dg.j + 1, c.n()), make_q(c.n() - dg.j, c.n()));
        Rational thr = room / abs_q(d);
        if (!best || thr < *best) best = thr;
    }
    // Every digit on the full column: the carpet is L itself and no kappa is
    // excluded. Report 1 rather than infinity.
    return best.value_or(Rational(1));
}

/// Encloses pi_kappa(F) by unrolling
///   min pi_kappa(F) = min_d (j/n + kappa i/m) + (1/n) min pi_{kappa n/m}(F)
/// q times (and the same for max), then closing with pi over the unit square.
inline IntervalEnclosure projection_extent(const Carpet& c, const Rational& kappa, unsigned q,
                                           const std::optional<Rational>& c0 = std::nullopt) {
    if (q == 0) throw Error(ErrorKind::DepthZero, "projection depth must be >= 1");
    const Rational ratio = make_q(c.n(), c.m());
    Rational k = kappa;
    Rational weight(1);
    Rational lo_sum(0), hi_sum(0);
    for (unsigned l = 0; l < q; ++l) {
        std::optional<Rational> lo, hi;
        for (const auto& d : c.digits()) {
            Rational v = make_q(d.j, c.n()) + k * d.i / c.m();
            if (!lo || v < *lo) lo = v;
            if (!hi || v > *hi) hi = v;
        }
        lo_sum += weight * *lo;
        hi_sum += weight * *hi;
        weight /= c.n();
        k *= ratio;
    }
    const Rational base_lo = min_q(Rational(0), k);
    const Rational base_hi = Rational(1) + max_q(Rational(0), k);
    // Inner ends are values of pi at actual points of F: the greedy prefix
    // followed by a digit's fixed point.
    std::optional<Rational> fix_lo, fix_hi;
    for (const auto& d : c.digits()) {
        Rational v = make_q(d.j, c.n() - 1) + k * make_q(d.i, c.m() - 1);
        if (!fix_lo || v < *fix_lo) fix_lo = v;
        if (!fix_hi || v > *fix_hi) fix_hi = v;
    }
    IntervalEnclosure e;
    e.outer_lo = lo_sum + weight * base_lo;
    e.inner_lo = lo_sum + weight * *fix_lo;
    e.outer_hi = hi_sum + weight * base_hi;
    e.inner_hi = hi_sum + weight * *fix_hi;
    const Rational bound = c0 ? *c0 : compute_c0(c);
    e.valid = abs_q(kappa) <= bound && e.inner_lo <= e.inner_hi;
    return e;
}

/// Intercept enclosures for one fixed slope, cached per word generation.
///
/// For a word with numerators (A, B) at generation g the set of intercepts t
/// with l_{u,t} meeting f_I(F) is n^-g pi_{-u (n/m)^g}(F) + B/n^g - u A/m^g.
class SlopeContext {
public:
    SlopeContext(const Carpet& c, Rational slope, unsigned depth = kDefaultProjectionDepth)
        : carpet_(&c), slope_(std::move(slope)), depth_(depth), c0_(compute_c0(c)) {
        if (abs_q(slope_) > c0_) {
            throw Error(ErrorKind::SlopeTooLarge, "|u| = " + to_pq(abs_q(slope_)) + " exceeds c0 = " + to_pq(c0_));
        }
    }

    const Carpet& carpet() const { return *carpet_; }
    const Rational& slope() const { return slope_; }
    const Rational& c0() const { return c0_; }
    unsigned depth() const { return depth_; }

    /// Enclosure of pi_{-u (n/m)^g}(F), unscaled.
    const IntervalEnclosure& base(std::size_t g) const {
        std::lock_guard<std::mutex> lock(mutex_);
        while (cache_.size() <= g) {
            const std::size_t h = cache_.size();
            Rational kappa = -slope_ * qpow(carpet_->n(), h) / qpow(carpet_->m(), h);
            cache_.push_back(projection_extent(*carpet_, kappa, depth_, c0_));
        }
        return cache_[g];
    }

    IntervalEnclosure intercepts(const Integer& a_num, const Integer& b_num, std::size_t g) const {
        const Rational sy = qinvpow(carpet_->n(), g);
        const Rational shift = Rational(b_num) * sy - slope_ * Rational(a_num) / qpow(carpet_->m(), g);
        return base(g).scaled(sy, shift);
    }

    IntervalEnclosure intercepts(const Word& w) const {
        auto [a, b] = word_numerators(*carpet_, w);
        return intercepts(a, b, w.size());
    }

    Tri meets(const Integer& a_num, const Integer& b_num, std::size_t g, const Rational& t) const {
        return classify(intercepts(a_num, b_num, g), t);
    }

    static Tri classify(const IntervalEnclosure& e, const Rational& t) {
        if (!e.outer_contains(t)) return Tri::No;
        if (e.inner_contains(t)) return Tri::Yes;
        return Tri::Unknown;
    }

private:
    const Carpet* carpet_;
    Rational slope_;
    unsigned depth_;
    Rational c0_;
    mutable std::mutex mutex_;
    mutable std::deque<IntervalEnclosure> cache_;
};

inline IntervalEnclosure intercept_interval(const Carpet& c, const Rational& u, const Word& w,
                                            unsigned q = kDefaultProjectionDepth) {
    check_word(c, w);
    SlopeContext ctx(c, u, q);
    return ctx.intercepts(w);
}

inline Tri line_meets_cylinder(const Carpet& c, const Line& ln, const Word& w,
                               unsigned q = kDefaultProjectionDepth) {
    return SlopeContext::classify(intercept_interval(c, ln.slope, w, q), ln.intercept);
}

} // namespace carpet
