#include "fermat22n/local.hpp"

namespace fermat22n {

const char* local_case_name(LocalCase c) {
    switch (c) {
        case LocalCase::EvenEll: return "even-ell";
        case LocalCase::KLarge: return "k-large";
        case LocalCase::I: return "i";
        case LocalCase::II: return "ii";
        case LocalCase::III: return "iii";
        case LocalCase::IV: return "iv";
        case LocalCase::V: return "v";
    }
    return "?";
}

// Straight-line decision over (k mod 2, comparisons of k with ell and
// n+ell, B' mod 8, Kronecker symbol); no p-adic lifting.
LocalVerdict local_case_eval(Int p, int k, int ell, int n, int Bp_mod8,
                             int kron_neg_Bp) {
    LocalVerdict v;
    v.p = p;
    v.k = k;
    v.ell = ell;
    if (ell % 2 == 0) {
        v.solvable = true;
        v.case_label = LocalCase::EvenEll;
        return v;
    }
    if (k >= n + ell) {
        v.solvable = true;
        v.case_label = LocalCase::KLarge;
        return v;
    }
    // ell odd, k < n + ell
    if (k % 2 == 1) {
        v.case_label = LocalCase::I;
        v.solvable = !(ell < k);  // k odd, ell < k < n+ell insoluble
        return v;
    }
    if (p != 2) {
        v.case_label = LocalCase::II;
        v.solvable = (kron_neg_Bp != -1);
        return v;
    }
    // p = 2, k even; k != ell by parity
    if (k < ell) {
        v.case_label = LocalCase::III;
        v.solvable = (Bp_mod8 != 3);
        return v;
    }
    if (k == n + ell - 2) {
        v.case_label = LocalCase::V;
        v.solvable = !(Bp_mod8 == 1 || Bp_mod8 == 5);
        return v;
    }
    v.case_label = LocalCase::IV;
    v.solvable = (Bp_mod8 == 7);
    return v;
}

LocalVerdict local_solvable_at(const Instance& inst, Int p) {
    if (p < 2 || !is_prime_u64((u64)p))
        throw precondition_error("local_solvable_at: p must be prime");
    int k = valuation(inst.B, p);
    int ell = valuation(inst.C, p);
    Int Bp = inst.B;
    for (int i = 0; i < k; ++i) Bp /= p;
    int bp8 = (int)mod_floor(Bp, 8);
    int kron = (p != 2) ? kronecker64(mod_floor(-Bp, p), p) : 0;
    return local_case_eval(p, k, ell, inst.n, bp8, kron);
}

std::pair<bool, std::optional<LocalVerdict>>
everywhere_locally_solvable(const Instance& inst) {
    // Only p with v_p(C) odd can obstruct; the archimedean place is always
    // soluble since n is odd.
    auto fac = factorize64(inst.C);
    for (const auto& [p, e] : fac.factors) {
        if (e % 2 == 0) continue;
        LocalVerdict v = local_solvable_at(inst, p);
        if (!v.solvable) return {false, v};
    }
    return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Density factors
// ---------------------------------------------------------------------------

namespace {
mpq_class qpow(const mpq_class& q, int e) {
    mpq_class r = 1;
    for (int i = 0; i < e; ++i) r *= q;
    return r;
}
} // namespace

mpq_class local_density_factor(Int p, int n) {
    if (p == 2) throw precondition_error("local_density_factor: p must be odd");
    if (p < 3 || !is_prime_u64((u64)p))
        throw precondition_error("local_density_factor: p must be prime");
    if (n < 3 || n % 2 == 0)
        throw precondition_error("local_density_factor: n must be odd >= 3");
    mpq_class q(1, (unsigned long)p);
    // Insoluble classes: ell odd and either
    //   k odd with ell < k < n+ell              (full measure), or
    //   k even with k < n+ell and (-B'/p) = -1  (half measure).
    mpq_class S1 = 0;  // sum over the odd-k window, ell factored out
    for (int j = 1; j <= (n - 1) / 2; ++j) S1 += qpow(q, 2 * j);
    mpq_class T1 = q / (1 - q * q);              // sum of q^ell, ell odd
    mpq_class T2 = q * q / (1 - qpow(q, 4));     // sum of q^(2 ell), ell odd
    mpq_class one_m_q = 1 - q;
    mpq_class mu = one_m_q * one_m_q *
                   (S1 * T2 + (T1 - qpow(q, n) * T2) / (2 * (1 - q * q)));
    return 1 - mu;
}

mpq_class local_density_closed_form(Int p, int n) {
    if (p == 2) throw precondition_error("local_density_closed_form: p odd");
    if (n < 3 || n % 2 == 0)
        throw precondition_error("local_density_closed_form: n odd >= 3");
    mpz_class P = to_mpz(p);
    mpz_class pn, pn2, pn3;
    mpz_pow_ui(pn.get_mpz_t(), P.get_mpz_t(), n);
    mpz_pow_ui(pn2.get_mpz_t(), P.get_mpz_t(), n - 2);
    mpz_pow_ui(pn3.get_mpz_t(), P.get_mpz_t(), n - 3);
    mpz_class num = pn + pn2 + 2 * pn3 - P + 2;
    mpz_class den = 2 * pn3 * (P + 1) * (P * P * P + P * P + P + 1);
    mpq_class r(num, den);
    r.canonicalize();
    return 1 - r;
}

mpq_class density_factor_2(int n) {
    if (n < 3 || n % 2 == 0)
        throw precondition_error("density_factor_2: n must be odd >= 3");
    // mu = sum over ell odd of (1/2) 2^-ell [ a + b 2^-ell ] with the clause
    // windows folded into a and b.
    mpq_class q(1, 2);
    mpq_class S1 = 0;  // clause (i) window
    for (int j = 1; j <= (n - 1) / 2; ++j) S1 += qpow(q, 2 * j);
    mpq_class S4 = 0;  // clause (iv) window, (n-3)/2 terms
    for (int j = 0; j < (n - 3) / 2; ++j) S4 += qpow(q, 2 * j);
    mpq_class a(1, 6);  // clause (iii) constant part
    mpq_class b = S1 / 2 - mpq_class(1, 12) + mpq_class(3, 16) * S4 + qpow(q, n);
    mpq_class T1(2, 3);   // sum 2^-ell, ell odd
    mpq_class T2(4, 15);  // sum 2^-2ell, ell odd
    mpq_class mu = (a * T1 + b * T2) / 2;
    return 1 - mu;
}

mpq_class density_factor_2_truncated(int n, int depth) {
    if (n < 3 || n % 2 == 0)
        throw precondition_error("density_factor_2_truncated: n odd >= 3");
    mpq_class mu = 0;
    for (int ell = 1; ell <= depth; ell += 2) {
        for (int k = 0; k <= depth; ++k) {
            for (int b8 : {1, 3, 5, 7}) {
                LocalVerdict v = local_case_eval(2, k, ell, n, b8, 0);
                if (!v.solvable) {
                    mpq_class w = qpow(mpq_class(1, 2), k + 1) *
                                  qpow(mpq_class(1, 2), ell + 1) *
                                  mpq_class(1, 4);
                    mu += w;
                }
            }
        }
    }
    return 1 - mu;
}

} // namespace fermat22n
