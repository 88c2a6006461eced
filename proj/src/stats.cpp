#include "fermat22n/stats.hpp"

#include <chrono>
#include <thread>

#include <mpfr.h>

namespace fermat22n {

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace {

// Smallest-prime-factor table for fast factoring of |C| < T.
std::vector<int> spf_table(int bound) {
    std::vector<int> spf(bound + 1, 0);
    for (int i = 2; i <= bound; ++i) {
        if (spf[i]) continue;
        for (long long j = i; j <= bound; j += i)
            if (!spf[j]) spf[j] = i;
    }
    return spf;
}

bool locally_soluble_fast(Int B, Int C, int n, const std::vector<int>& spf) {
    // only primes with odd v_p(C) can obstruct
    Int c = std::abs(C);
    while (c > 1) {
        Int p = spf[c];
        int ell = 0;
        while (c % p == 0) { c /= p; ++ell; }
        if (ell % 2 == 0) continue;
        int k = 0;
        Int Bp = B;
        while (Bp % p == 0) { Bp /= p; ++k; }
        int bp8 = (int)mod_floor(Bp, 8);
        int kron = (p != 2) ? kronecker64(mod_floor(-Bp, p), p) : 0;
        if (!local_case_eval(p, k, ell, n, bp8, kron).solvable) return false;
    }
    return true;
}

} // namespace

SweepResult sweep(int n, Int T, const SweepOptions& opts) {
    if (n < 3 || n % 2 == 0)
        throw precondition_error("sweep: n must be odd >= 3");
    if (T < 2) throw precondition_error("sweep: T must be at least 2");
    Int cap = (opts.mode == SweepMode::Local) ? opts.cap_local : opts.cap_global;
    if (T > cap) throw resource_error("sweep: T exceeds the configured cap");

    auto t0 = std::chrono::steady_clock::now();
    SweepResult res;
    res.n = n;
    res.T = T;
    res.mode = opts.mode;
    res.total_pairs = 4 * (T - 1) * (T - 1);

    auto spf = spf_table((int)T);
    int threads = opts.row_sink ? 1 : std::max(1, opts.threads);

    struct Tally {
        Int local = 0, solvable = 0, unsolvable = 0, undecided = 0;
    };

    auto run_range = [&](Int b_lo, Int b_hi, Tally& tally) {
        for (Int B = b_lo; B < b_hi; ++B) {
            if (B == 0) continue;
            for (Int C = -(T - 1); C <= T - 1; ++C) {
                if (C == 0) continue;
                bool loc = locally_soluble_fast(B, C, n, spf);
                SweepRow row;
                row.B = B;
                row.C = C;
                row.local = loc;
                if (loc) {
                    ++tally.local;
                    if (opts.mode == SweepMode::Global) {
                        Verdict v = decide(B, C, n, opts.solve);
                        row.verdict = v.status;
                        row.witness = v.witness;
                        switch (v.status) {
                            case Status::Solvable: ++tally.solvable; break;
                            case Status::Unsolvable: ++tally.unsolvable; break;
                            case Status::Undecided: ++tally.undecided; break;
                        }
                    }
                }
                if (opts.row_sink) opts.row_sink(row);
            }
        }
    };

    std::vector<Tally> tallies(threads);
    if (threads == 1) {
        run_range(-(T - 1), T, tallies[0]);
    } else {
        // static partition over B rows, deterministic reduction order
        std::vector<std::thread> pool;
        Int span = 2 * T - 1;
        for (int i = 0; i < threads; ++i) {
            Int lo = -(T - 1) + span * i / threads;
            Int hi = -(T - 1) + span * (i + 1) / threads;
            pool.emplace_back(run_range, lo, hi, std::ref(tallies[i]));
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& t : tallies) {
        res.locally_soluble += t.local;
        res.decided_solvable += t.solvable;
        res.decided_unsolvable += t.unsolvable;
        res.undecided += t.undecided;
    }
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return res;
}

// ---------------------------------------------------------------------------
// Directed-rounding interval scratchpad over MPFR
// ---------------------------------------------------------------------------

namespace {

constexpr mpfr_prec_t kPrec = 256;

struct RNum {
    mpfr_t v;
    RNum() { mpfr_init2(v, kPrec); }
    explicit RNum(const mpq_class& q, mpfr_rnd_t rnd) {
        mpfr_init2(v, kPrec);
        mpfr_set_q(v, q.get_mpq_t(), rnd);
    }
    ~RNum() { mpfr_clear(v); }
    RNum(const RNum&) = delete;
    RNum& operator=(const RNum&) = delete;
};

mpq_class mpq_of(const mpfr_t x) {
    if (mpfr_zero_p(x)) return mpq_class(0);
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    mpq_class q(m);
    if (e >= 0) {
        mpz_class s = 1;
        mpz_mul_2exp(s.get_mpz_t(), s.get_mpz_t(), (mp_bitcnt_t)e);
        q *= mpq_class(s);
    } else {
        mpz_class s = 1;
        mpz_mul_2exp(s.get_mpz_t(), s.get_mpz_t(), (mp_bitcnt_t)(-e));
        q /= mpq_class(s);
    }
    q.canonicalize();
    return q;
}

} // namespace

ConstantEnclosure kappa1(Int X) {
    if (X < 100) throw precondition_error("kappa1: X must be at least 100");
    // pi kappa1^2 = prod_p (1 - 3/(4p^2) - 1/(4p^3)); the truncated product
    // is an upper bound, and the factors dominate 1 - p^-2, which yields the
    // zeta(2) tail comparison for the lower bound.
    mpq_class P = 1, Q = 1;
    for (int p : primes_below((int)X + 1)) {
        mpz_class pz((unsigned long)p);
        mpq_class p2(mpz_class(pz * pz));
        mpq_class p3(mpz_class(pz * pz * pz));
        P *= 1 - mpq_class(3) / (4 * p2) - mpq_class(1) / (4 * p3);
        Q *= 1 - 1 / p2;
    }
    P.canonicalize();
    Q.canonicalize();

    // kappa1 <= sqrt(P / pi), kappa1 >= sqrt(6 P / (Q pi^3))
    RNum pi_lo{}, pi_hi{};
    mpfr_const_pi(pi_lo.v, MPFR_RNDD);
    mpfr_const_pi(pi_hi.v, MPFR_RNDU);

    ConstantEnclosure out;
    out.name = "kappa1";
    out.X = X;
    {
        RNum t(P, MPFR_RNDU);
        mpfr_div(t.v, t.v, pi_lo.v, MPFR_RNDU);
        mpfr_sqrt(t.v, t.v, MPFR_RNDU);
        out.upper = mpq_of(t.v);
    }
    {
        mpq_class num = 6 * P / Q;
        num.canonicalize();
        RNum t(num, MPFR_RNDD);
        RNum pi3{};
        mpfr_pow_ui(pi3.v, pi_hi.v, 3, MPFR_RNDU);
        mpfr_div(t.v, t.v, pi3.v, MPFR_RNDD);
        mpfr_sqrt(t.v, t.v, MPFR_RNDD);
        out.lower = mpq_of(t.v);
    }
    if (out.lower > out.upper)
        throw resource_error("kappa1: enclosure inverted");
    return out;
}

mpq_class kappa2_euler_factor(Int p) {
    mpz_class pz = to_mpz(p);
    mpq_class q(1, (unsigned long)p);
    // 1 - p^-2 - (1/2) p^-2 (1 - 1/p) * (geometric sum = 2p/(2p+1))
    mpq_class geo(2 * pz, 2 * pz + 1);
    mpq_class f = 1 - q * q - mpq_class(1, 2) * q * q * (1 - q) * geo;
    f.canonicalize();
    return f;
}

ConstantEnclosure kappa2(Int X) {
    if (X < 100) throw precondition_error("kappa2: X must be at least 100");
    mpq_class P = 1;
    for (int p : primes_below((int)X + 1)) P *= kappa2_euler_factor(p);
    P.canonicalize();

    ConstantEnclosure out;
    out.name = "kappa2";
    out.X = X;
    out.upper = P;  // remaining factors are < 1

    // Each factor is 1 - 3/(2p^2 + p), and 3/(2p^2 + p) <= p^-1.95 once
    // 2 p^0.05 + p^-0.95 >= 3, which holds from p = 3326 on. Above that the
    // zeta(1.95) comparison gives the tail; below, 1 - 3/(2X) is enough.
    if (X >= 4000) {
        RNum s_lo{}, s_hi{};
        mpfr_set_q(s_lo.v, mpq_class(39, 20).get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(s_hi.v, mpq_class(39, 20).get_mpq_t(), MPFR_RNDU);
        RNum zeta_hi{};
        mpfr_zeta(zeta_hi.v, s_lo.v, MPFR_RNDU);  // zeta decreasing in s
        // F_hi = prod_{p <= X} (1 - p^-1.95), every factor rounded up
        RNum F_hi{};
        mpfr_set_ui(F_hi.v, 1, MPFR_RNDU);
        RNum term{}, pw{}, pz{};
        RNum ms_hi{};  // -s rounded up (towards zero)
        mpfr_neg(ms_hi.v, s_lo.v, MPFR_RNDU);
        for (int p : primes_below((int)X + 1)) {
            mpfr_set_ui(pz.v, (unsigned long)p, MPFR_RNDN);
            // p^-1.95 rounded down: exponent rounded down, result down
            RNum ms_lo{};
            mpfr_neg(ms_lo.v, s_hi.v, MPFR_RNDD);
            mpfr_pow(pw.v, pz.v, ms_lo.v, MPFR_RNDD);
            mpfr_ui_sub(term.v, 1, pw.v, MPFR_RNDU);
            mpfr_mul(F_hi.v, F_hi.v, term.v, MPFR_RNDU);
        }
        // tail >= (1/zeta_hi) / F_hi, rounded down
        RNum tail_lo{};
        mpfr_ui_div(tail_lo.v, 1, zeta_hi.v, MPFR_RNDD);
        mpfr_div(tail_lo.v, tail_lo.v, F_hi.v, MPFR_RNDD);
        RNum lo(P, MPFR_RNDD);
        mpfr_mul(lo.v, lo.v, tail_lo.v, MPFR_RNDD);
        out.lower = mpq_of(lo.v);
    } else {
        mpq_class tail = 1 - mpq_class(3) / mpq_class(2 * to_mpz(X));
        mpq_class lo = P * tail;
        lo.canonicalize();
        out.lower = lo;
    }
    if (out.lower > out.upper)
        throw resource_error("kappa2: enclosure inverted");
    return out;
}

mpq_class density_product(int n, Int P) {
    if (n < 3 || n % 2 == 0)
        throw precondition_error("density_product: n must be odd >= 3");
    mpq_class prod = density_factor_2(n);
    for (int p : primes_below((int)P + 1)) {
        if (p == 2) continue;
        prod *= local_density_factor(p, n);
    }
    prod.canonicalize();
    return prod;
}

} // namespace fermat22n
