#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fermat22n/stats.hpp"

using namespace fermat22n;

TEST_CASE("local sweep matches the exhaustive lifting recount") {
    SweepOptions opts;
    opts.mode = SweepMode::Local;
    Int T = 100;
    auto res = sweep(3, T, opts);
    CHECK(res.total_pairs == 4 * (T - 1) * (T - 1));

    Int recount = 0;
    for (Int B = -(T - 1); B <= T - 1; ++B) {
        if (B == 0) continue;
        for (Int C = -(T - 1); C <= T - 1; ++C) {
            if (C == 0) continue;
            Instance inst(B, C, 3);
            bool ok = true;
            auto fac = factorize64(2 * std::abs(B) * std::abs(C));
            for (const auto& [p, e] : fac.factors) {
                (void)e;
                if (local_solvable_exhaustive(inst, p,
                                              default_lift_depth(inst, p)) !=
                    LiftResult::Certified) {
                    ok = false;
                    break;
                }
            }
            if (ok) ++recount;
        }
    }
    CHECK(res.locally_soluble == recount);
}

TEST_CASE("local sweep is thread count invariant and C-sign symmetric") {
    SweepOptions one, four;
    one.mode = four.mode = SweepMode::Local;
    one.threads = 1;
    four.threads = 4;
    auto a = sweep(3, 120, one);
    auto b = sweep(3, 120, four);
    CHECK(a.locally_soluble == b.locally_soluble);

    // sign symmetry in C, asserted by recount
    Int pos = 0, neg = 0;
    SweepOptions with_rows;
    with_rows.mode = SweepMode::Local;
    with_rows.row_sink = [&](const SweepRow& r) {
        if (!r.local) return;
        (r.C > 0 ? pos : neg)++;
    };
    sweep(3, 60, with_rows);
    CHECK(pos == neg);
}

TEST_CASE("global sweep partition identity") {
    SweepOptions opts;
    opts.mode = SweepMode::Global;
    opts.solve.attach_witness = false;
    opts.solve.oracle_bound.z_max = 30;
    opts.solve.oracle_bound.y_max = 4000;
    auto res = sweep(3, 20, opts);
    CHECK(res.decided_solvable + res.decided_unsolvable + res.undecided ==
          res.locally_soluble);
    CHECK(res.locally_soluble > 0);
    CHECK(res.decided_solvable > 0);
}

TEST_CASE("sweep caps raise resource errors") {
    SweepOptions opts;
    opts.mode = SweepMode::Global;
    CHECK_THROWS_AS(sweep(3, 20000, opts), resource_error);
}

TEST_CASE("kappa2 Euler factor at 2 and the simplified form") {
    CHECK(kappa2_euler_factor(2) == mpq_class(7, 10));
    for (Int p : {2, 3, 5, 7, 11, 97}) {
        mpz_class pz = to_mpz(p);
        mpq_class simplified = 1 - mpq_class(3, mpz_class(2 * pz * pz + pz));
        simplified.canonicalize();
        CHECK(kappa2_euler_factor(p) == simplified);
    }
}

TEST_CASE("zeta comparison threshold is valid") {
    // 3 p^1.95 <= 2p^2 + p for every prime p >= 4000, checked exactly as
    // 3^20 p^39 <= (2p^2 + p)^20 at the first primes past the threshold
    // (the ratio (2p^2+p) / p^1.95 is increasing).
    for (Int p : {4001, 4003, 4007, 5003, 50021}) {
        mpz_class pz = to_mpz(p), lhs, rhs;
        mpz_pow_ui(lhs.get_mpz_t(), pz.get_mpz_t(), 39);
        mpz_class three20;
        mpz_ui_pow_ui(three20.get_mpz_t(), 3, 20);
        lhs *= three20;
        mpz_class base = 2 * pz * pz + pz;
        mpz_pow_ui(rhs.get_mpz_t(), base.get_mpz_t(), 20);
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("kappa enclosures: crude width, nesting, fixed digits") {
    auto k1_100 = kappa1(100);
    CHECK(k1_100.upper - k1_100.lower < mpq_class(1, 1000));
    auto k1_1000 = kappa1(1000);
    auto k1_5000 = kappa1(5000);
    CHECK(k1_1000.lower >= k1_100.lower);
    CHECK(k1_1000.upper <= k1_100.upper);
    CHECK(k1_5000.lower >= k1_1000.lower);
    CHECK(k1_5000.upper <= k1_1000.upper);
    // rough location sanity at modest truncation
    CHECK(k1_5000.lower > mpq_class(45, 100));
    CHECK(k1_5000.upper < mpq_class(46, 100));

    auto k2_500 = kappa2(500);
    auto k2_5000 = kappa2(5000);
    CHECK(k2_5000.lower >= k2_500.lower);
    CHECK(k2_5000.upper <= k2_500.upper);
    CHECK(k2_5000.lower > mpq_class(52, 100));
    CHECK(k2_5000.upper < mpq_class(53, 100));
}

TEST_CASE("density product composition and decrease") {
    mpq_class p3 = density_product(3, 3);
    CHECK(p3 == density_factor_2(3) * local_density_factor(3, 3));
    mpq_class p10 = density_product(3, 10);
    mpq_class p100 = density_product(3, 100);
    CHECK(p10 < p3);
    CHECK(p100 < p10);
    mpq_class p1000 = density_product(3, 1000);
    CHECK(p1000 < mpq_class(1, 2));
}
