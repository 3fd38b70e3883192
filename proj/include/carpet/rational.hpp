// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "carpet/error.hpp"

namespace carpet {

using Rational = mpq_class;
using Integer = mpz_class;

inline Integer ipow(std::int64_t base, unsigned long exp) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), exp);
    return r;
}

inline Rational qpow(std::int64_t base, unsigned long exp) { return Rational(ipow(base, exp)); }

/// base^-exp
inline Rational qinvpow(std::int64_t base, unsigned long exp) {
    Rational r(Integer(1), ipow(base, exp));
    r.canonicalize();
    return r;
}

inline Rational make_q(std::int64_t num, std::int64_t den) {
    Rational r(Integer(static_cast<long>(num)), Integer(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

inline Integer floor_q(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_q(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline const Rational& min_q(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max_q(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Always `p/q` in lowest terms, including integers (`3/1`).
inline std::string to_pq(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Accepts `p/q`, `p` or a plain decimal like `0.01`.
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw Error(ErrorKind::Parse, "empty rational");
    try {
        auto dot = s.find('.');
        if (dot != std::string::npos && s.find('/') == std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument(s);
            Integer num(digits, 10);
            Rational r(num, ipow(10, s.size() - dot - 1));
            r.canonicalize();
            return r;
        }
        Rational r(s, 10);
        if (r.get_den() == 0) throw std::invalid_argument(s);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw Error(ErrorKind::Parse, "not a rational: '" + s + "'");
    }
}

inline double to_double(const Rational& q) { return q.get_d(); }

} // namespace carpet
