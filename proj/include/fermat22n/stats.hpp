#pragma once

#include <functional>
#include <optional>
#include <string>

#include "fermat22n/cascade.hpp"

namespace fermat22n {

enum class SweepMode { Local, Global };

struct SweepRow {
    Int B = 0, C = 0;
    bool local = false;
    Status verdict = Status::Undecided;
    std::optional<Solution> witness;
};

struct SweepResult {
    int n = 3;
    Int T = 0;
    SweepMode mode = SweepMode::Local;
    Int total_pairs = 0;
    Int locally_soluble = 0;
    Int decided_solvable = 0;    // global mode only
    Int decided_unsolvable = 0;  // global mode only
    Int undecided = 0;           // global mode only
    double elapsed_seconds = 0;
};

struct SweepOptions {
    SweepMode mode = SweepMode::Local;
    int threads = 1;
    SolveOptions solve;  // global mode
    std::function<void(const SweepRow&)> row_sink;  // forces a single thread
    Int cap_local = 100'000;
    Int cap_global = 10'000;
};

// Counts over all pairs 0 < |B|, |C| < T.
SweepResult sweep(int n, Int T, const SweepOptions& opts);

// Certified enclosure of an Euler-product constant; bounds are exact
// (dyadic) rationals obtained by directed rounding.
struct ConstantEnclosure {
    std::string name;
    mpq_class lower, upper;
    Int X = 0;
};

// kappa1 = pi^{-1/2} prod_p (1 + 1/2p)(1 - 1/p)^{1/2}, truncated at X with
// a zeta(2) tail comparison for the lower bound.
ConstantEnclosure kappa1(Int X);

// kappa2 = prod_p (1 - p^{-2} - (1/2) p^{-3} (1 - 1/p)^{-1} ...) evaluated
// at s = 1 with the inner geometric sum in closed form; tail comparison
// against zeta(1.95) for large X and a crude 1 - 3/(2X) bound below that.
ConstantEnclosure kappa2(Int X);

// The single Euler factor of kappa2's product, exact.
mpq_class kappa2_euler_factor(Int p);

// prod_{odd p <= P} local density factor times the dyadic factor.
mpq_class density_product(int n, Int P);

} // namespace fermat22n
