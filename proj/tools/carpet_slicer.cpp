// SPDX-License-Identifier: Apache-2.0
// carpet_slicer: command-line driver for the carpet library.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "carpet/grid.hpp"
#include "carpet/projection.hpp"
#include "carpet/record.hpp"
#include "carpet/slice_builder.hpp"

namespace {

using namespace carpet;

enum Exit { kOk = 0, kInput = 1, kViolation = 2, kStuck = 3 };

std::string fixed12(long double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12Lf", v);
    return buf;
}

int cmd_info(const std::string& path) {
    const Carpet c = load_carpet(path);
    const auto dim = star_dimension(c);
    std::cout << "m " << c.m() << "\n";
    std::cout << "n " << c.n() << "\n";
    std::cout << "digits " << c.digits().size() << "\n";
    std::cout << "i0 " << c.full_column() << "\n";
    std::cout << "x0 " << to_pq(c.full_column_x()) << "\n";
    std::cout << "dim* " << dim.exact() << " " << fixed12(dim.value) << "\n";
    std::cout << "c0 " << to_pq(compute_c0(c)) << "\n";
    return kOk;
}

int cmd_fiber(const std::string& path, unsigned max_level) {
    const Carpet c = load_carpet(path);
    const Fiber f = optimal_fiber(c);
    std::cout << "level,count,exponent\n";
    for (unsigned p = 1; p <= max_level; ++p) {
        const auto n = fiber_covering_number(c, f, p);
        const long double e = std::log(static_cast<long double>(n)) / (p * std::log(static_cast<long double>(c.m())));
        std::cout << p << "," << n << "," << fixed12(e) << "\n";
    }
    return kOk;
}

int cmd_cover(const std::string& path, const std::string& slope, const std::string& intercept,
              const std::string& cell, unsigned sublevel, std::optional<unsigned> depth) {
    const Carpet c = load_carpet(path);
    const Line ln{parse_rational(slope), parse_rational(intercept)};
    const auto b = covering_number_bounds(c, ln, detail::parse_cell(cell), sublevel, depth);
    std::cout << "lower,upper,depth\n" << b.lower << "," << b.upper << "," << b.depth << "\n";
    return kOk;
}

int cmd_build(const std::string& path, const std::string& slope, unsigned stages, const std::string& out) {
    const Carpet c = load_carpet(path);
    const auto sc = build_sharp_slice(c, parse_rational(slope), stages);
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error(ErrorKind::Parse, "cannot write '" + out + "'");
    os << emit_record(sc);
    std::cout << "stage,k,cell,certLower,certUpper,target\n";
    const int a = c.max_row_size();
    for (const auto& st : sc.stages) {
        std::cout << st.stage << "," << st.base_level << "," << st.cell.str() << "," << st.cert_lower << ","
                  << st.cert_upper << "," << stage_target(sc.cprime, a, st.stage) + 1 << "\n";
    }
    return kOk;
}

int cmd_verify(const std::string& path, unsigned extra) {
    const auto sc = load_record(path);
    const auto rep = verify_certificates(sc, extra);
    for (const auto& ch : rep.checks) {
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    }
    std::cout << "C1 " << fixed12(rep.empirical_c1) << "\n";
    if (!rep.passed()) {
        std::cerr << "CertificateViolation: first failing stage " << rep.first_failing_stage.value_or(0) << "\n";
        return kViolation;
    }
    return kOk;
}

int cmd_estimate(const std::string& path) {
    const auto sc = load_record(path);
    const long double target = star_dimension(sc.carpet).excess();
    std::cout << "i,k,cell,value,target\n";
    for (const auto& st : sc.stages) {
        const auto est = furstenberg_estimate({{st.base_level, st.cell, st.stage, st.cert_lower}}, sc.carpet.m());
        std::cout << est.window << "," << est.base_level << "," << est.cell.str() << "," << fixed12(est.value) << ","
                  << fixed12(target) << "\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified slices of Bedford-McMullen carpets"};
    app.require_subcommand(1);

    std::string carpet_path, record_path, slope, intercept, cell = "0:0:0", out;
    unsigned max_level = 10, sublevel = 1, stages = 1, extra = 0;
    std::optional<unsigned> depth;

    auto* info = app.add_subcommand("info", "carpet constants");
    info->add_option("carpet", carpet_path)->required();

    auto* fiber = app.add_subcommand("fiber", "optimal fiber covering numbers");
    fiber->add_option("carpet", carpet_path)->required();
    fiber->add_option("--max-level", max_level)->check(CLI::PositiveNumber);

    auto* cover = app.add_subcommand("cover", "certified covering bounds of a slice");
    cover->add_option("carpet", carpet_path)->required();
    cover->add_option("--slope", slope)->required();
    cover->add_option("--intercept", intercept)->required();
    cover->add_option("--cell", cell, "level:col:row");
    cover->add_option("--sublevel", sublevel);
    cover->add_option("--depth", depth);

    auto* build = app.add_subcommand("build", "construct a sharp slice");
    build->add_option("carpet", carpet_path)->required();
    build->add_option("--slope", slope)->required();
    build->add_option("--stages", stages)->check(CLI::PositiveNumber);
    build->add_option("--out", out)->required();

    auto* verify = app.add_subcommand("verify", "re-check a construction record");
    verify->add_option("record", record_path)->required();
    verify->add_option("--depth", extra, "extra enumeration levels beyond the build default");

    auto* estimate = app.add_subcommand("estimate", "Furstenberg estimates from a record");
    estimate->add_option("record", record_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }

    try {
        if (*info) return cmd_info(carpet_path);
        if (*fiber) return cmd_fiber(carpet_path, max_level);
        if (*cover) return cmd_cover(carpet_path, slope, intercept, cell, sublevel, depth);
        if (*build) return cmd_build(carpet_path, slope, stages, out);
        if (*verify) return cmd_verify(record_path, extra);
        if (*estimate) return cmd_estimate(record_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        if (e.kind() == ErrorKind::CertificateViolation) return kViolation;
        if (e.kind() == ErrorKind::StageStuck) return kStuck;
        return kInput;
    }
    return kInput;
}
