#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fermat22n/local.hpp"
#include "fermat22n/oracle.hpp"

using namespace fermat22n;

namespace {
bool contains(const std::vector<Solution>& v, Int x, Int y, Int z) {
    return std::find(v.begin(), v.end(), Solution{x, y, z}) != v.end();
}
} // namespace

TEST_CASE("search finds the known witnesses") {
    Instance inst(29, 19, 3);
    SearchBound b;
    b.z_max = 20;
    auto hits = search_primitive(inst, b);
    CHECK(contains(hits, 7, 4, 3));
    CHECK(contains(hits, 22, 1, 3));
    CHECK(contains(hits, 8, 47, 15));
    for (const auto& h : hits) CHECK(verify_solution(inst, h.x, h.y, h.z));
}

TEST_CASE("search respects coprimality filters") {
    Instance inst(6723, 23, 3);
    SearchBound b;
    b.z_max = 20;
    b.y_coprime = {3};
    auto hits = search_primitive(inst, b);
    CHECK(contains(hits, 61, 2, 11));
    for (const auto& h : hits) {
        CHECK(mod_floor(h.y, 3) != 0);
        CHECK(verify_solution(inst, h.x, h.y, h.z));
    }
}

TEST_CASE("search returns nothing for the Hasse counterexample") {
    Instance inst(29, 3, 3);
    SearchBound b;
    b.z_max = 50;
    CHECK(search_primitive(inst, b).empty());
}

TEST_CASE("every primitive solution of (3,31) has 3 | y") {
    Instance inst(3, 31, 3);
    SearchBound b;
    b.z_max = 50;
    auto hits = search_primitive(inst, b);
    CHECK(!hits.empty());
    for (const auto& h : hits) CHECK(mod_floor(h.y, 3) == 0);
}

TEST_CASE("scaling transports witnesses") {
    std::mt19937_64 rng(8);
    const Int primes[] = {2, 3, 5};
    int found = 0;
    while (found < 25) {
        Int B = (Int)(rng() % 40) + 1;
        Int C = (Int)(rng() % 40) + 1;
        Int p = primes[rng() % 3];
        Instance a(B, C, 3), b(B * p * p, C * p * p, 3);
        SearchBound sb;
        sb.z_max = 12;
        auto ha = search_primitive(a, sb);
        if (ha.empty()) continue;
        ++found;
        auto hb = search_primitive(b, sb);
        for (const auto& h : ha)
            CHECK(contains(hb, p * h.x, h.y, h.z));
    }
}

TEST_CASE("star levels on explicit witnesses") {
    // u = 17 + 2 sqrt(-83): unit at 3, so star level 0
    CHECK(u_level(17, 2, 1, 83, 3) == 0);
    // u = 9 x + ... with 3 | x and 3 | y: level >= 1
    CHECK(u_level(9, 3, 1, 83, 3) == 1);
    // dyadic level with the half-integral maximal order: 11 + sqrt(-3)
    CHECK(u_level(11, 1, 1, 3, 2) == 1);
    StarCondition tilde{2, StarCondition::TildeStar, 0};
    CHECK(satisfies_star(11, 1, 1, 3, tilde));
    CHECK(satisfies_star(3, 1, 1, 7, tilde));
    StarCondition star0{3, StarCondition::Star, 0};
    CHECK(satisfies_star(17, 2, 1, 83, star0));
    CHECK(!satisfies_star(9, 3, 1, 83, star0));
}

TEST_CASE("lifting oracle on fixed instances") {
    CHECK(local_solvable_exhaustive(Instance(7, 2, 3), 2,
                                    default_lift_depth(Instance(7, 2, 3), 2)) ==
          LiftResult::Certified);
    CHECK(local_solvable_exhaustive(Instance(1, 3, 3), 3,
                                    default_lift_depth(Instance(1, 3, 3), 3)) ==
          LiftResult::Empty);
    CHECK(local_solvable_exhaustive(Instance(29, 3, 3), 29, 22) ==
          LiftResult::Certified);
}

TEST_CASE("criterion agrees with exhaustive lifting on a small sweep") {
    for (Int B = -30; B <= 30; ++B) {
        if (B == 0) continue;
        for (Int C = -30; C <= 30; ++C) {
            if (C == 0) continue;
            for (int n : {3, 5}) {
                Instance inst(B, C, n);
                for (Int p : {2, 3, 5, 7}) {
                    bool want = local_solvable_at(inst, p).solvable;
                    LiftResult got = local_solvable_exhaustive(
                        inst, p, default_lift_depth(inst, p));
                    CAPTURE(B);
                    CAPTURE(C);
                    CAPTURE(n);
                    CAPTURE(p);
                    REQUIRE(got != LiftResult::Inconclusive);
                    CHECK(want == (got == LiftResult::Certified));
                }
            }
        }
    }
}
