#include "fermat22n/global.hpp"

#include <numeric>

namespace fermat22n {

const char* status_name(Status s) {
    switch (s) {
        case Status::Solvable: return "solvable";
        case Status::Unsolvable: return "unsolvable";
        case Status::Undecided: return "undecided";
    }
    return "?";
}

CFactorization factor_C_over_K(Int B0, Int f, Int C, int n, bool tilde,
                               const ClassGroup& G) {
    (void)n;
    CFactorization out;
    out.ell = valuation(C, 2);
    if (tilde && mod_floor(B0, 8) == 3 && out.ell != 2) {
        out.obstruction = Obstruction::TwoAdic;
        out.obstruction_p = 2;
        return out;
    }
    Int D = G.discriminant;
    auto fac = factorize64(std::abs(C));
    for (const auto& [p, e] : fac.factors) {
        if (tilde && p == 2) continue;  // the 2-part is carried by 2^ell
        switch (splitting(D, p)) {
            case SplittingType::Inert:
                out.obstruction = Obstruction::InertPrime;
                out.obstruction_p = p;
                return out;
            case SplittingType::Ramified:
                if (e >= 2) {
                    out.obstruction = Obstruction::RamifiedSquare;
                    out.obstruction_p = p;
                    return out;
                }
                out.ramified.emplace_back(p, e);
                break;
            case SplittingType::Split: {
                CFactorization::SplitPart part;
                part.p = p;
                part.e = e;
                QForm pf = prime_form(D, p);
                part.prime_class = G.canonical(pf);
                part.dlog = G.dlog(pf);
                out.split.push_back(std::move(part));
                break;
            }
        }
    }
    (void)f;
    return out;
}

namespace {

// Tests whether some per-prime conjugate assignment lands the product class
// (plus a fixed offset) in n Cl. Assignments come in conjugate pairs, so one
// sign is pinned whenever there is no offset.
bool assignment_membership(const std::vector<CFactorization::SplitPart>& split,
                           const std::vector<Int>& offset, int n,
                           const std::vector<Int>& divisors,
                           std::vector<Int>* witness) {
    size_t k = split.size();
    size_t rank = divisors.size();
    bool with_offset = !offset.empty();
    if (k > 20) throw resource_error("membership: too many split primes");
    u64 patterns = k == 0 ? 1 : (u64)1 << (with_offset ? k : k - 1);
    for (u64 mask = 0; mask < patterns; ++mask) {
        std::vector<Int> acc(rank, 0);
        if (with_offset) acc = offset;
        for (size_t i = 0; i < k; ++i) {
            int sign = (i < 63 && (mask >> i) & 1) ? -1 : 1;
            for (size_t t = 0; t < rank; ++t) {
                Int add = (Int)sign * split[i].e * split[i].dlog[t];
                acc[t] = mod_floor(acc[t] + add, divisors[t]);
            }
        }
        if (is_nth_power_vector(acc, n, divisors)) {
            if (witness) *witness = acc;
            return true;
        }
    }
    return false;
}

GlobalVerdict unsolvable_with(const QuadOrder& O,
                              std::shared_ptr<const ClassGroup> G,
                              std::string clause, Int M) {
    GlobalVerdict v;
    v.status = Status::Unsolvable;
    v.M = M;
    v.cert.order = O;
    if (G) v.cert.divisors = G->elementary_divisors;
    v.cert.membership = false;
    v.cert.clause = std::move(clause);
    return v;
}

void validate_inputs(Int B, Int C, int n) {
    if (B == 0 || C == 0) throw precondition_error("global: B, C must be nonzero");
    if (n < 3 || n % 2 == 0) throw precondition_error("global: n must be odd >= 3");
}

} // namespace

GlobalVerdict decide_star0(Int B, Int C, int n, Int M) {
    validate_inputs(B, C, n);
    auto sp = squarefree_split(B);
    if (sp.B0 == -1)
        throw precondition_error("decide_star0: -B is a perfect square");
    if (std::gcd(sp.f, std::abs(C)) != 1)
        throw precondition_error("decide_star0: gcd(f, C) != 1");

    QuadOrder O = order_for(sp.B0, sp.f, C);
    if (mod_floor(sp.B0, 4) == 3 && mod_floor(C, 2) == 0)
        return unsolvable_with(O, nullptr, "c-even-parity", M);

    auto G = class_group(O.disc);
    CFactorization fac = factor_C_over_K(sp.B0, sp.f, C, n, false, *G);
    switch (fac.obstruction) {
        case Obstruction::InertPrime:
            return unsolvable_with(O, G, "inert-prime", M);
        case Obstruction::RamifiedSquare:
            return unsolvable_with(O, G, "ramified-square", M);
        default:
            break;
    }
    GlobalVerdict v;
    v.M = M;
    v.cert.order = O;
    v.cert.divisors = G->elementary_divisors;
    v.cert.membership = assignment_membership(fac.split, {}, n,
                                              G->elementary_divisors,
                                              &v.cert.j_plus_vector);
    v.cert.clause = v.cert.membership ? "class-membership"
                                      : "class-membership-failed";
    v.status = v.cert.membership ? Status::Solvable : Status::Unsolvable;
    return v;
}

GlobalVerdict decide_star0_tilde(Int B, Int C, int n, Int M) {
    validate_inputs(B, C, n);
    auto sp = squarefree_split(B);
    if (sp.B0 == -1)
        throw precondition_error("decide_star0_tilde: -B is a perfect square");
    if (std::gcd(sp.f, std::abs(C)) != 1)
        throw precondition_error("decide_star0_tilde: gcd(f, C) != 1");
    Int b0m8 = mod_floor(sp.B0, 8);
    if (b0m8 != 3 && b0m8 != 7)
        throw precondition_error("decide_star0_tilde: requires B0 = 3 mod 4");
    int ell = valuation(C, 2);
    // admissible z-coprimality parameters: odd M forced when B0 = 7 mod 8
    // and 2 | C but 8 does not divide C
    if (b0m8 == 7 && ell >= 1 && ell <= 2 && mod_floor(M, 2) == 0)
        throw precondition_error("decide_star0_tilde: M outside the admissible set");

    QuadOrder O = order_for(sp.B0, sp.f, C);
    if (mod_floor(sp.f, 2) == 0)
        return unsolvable_with(O, nullptr, "even-f", M);

    if (b0m8 == 3) {
        if (ell != 2) return unsolvable_with(O, nullptr, "two-adic", M);
        auto G = class_group(O.disc);
        CFactorization fac = factor_C_over_K(sp.B0, sp.f, C, n, true, *G);
        switch (fac.obstruction) {
            case Obstruction::InertPrime:
                return unsolvable_with(O, G, "inert-prime", M);
            case Obstruction::RamifiedSquare:
                return unsolvable_with(O, G, "ramified-square", M);
            default:
                break;
        }
        GlobalVerdict v;
        v.M = M;
        v.cert.order = O;
        v.cert.divisors = G->elementary_divisors;
        v.cert.membership = assignment_membership(fac.split, {}, n,
                                                  G->elementary_divisors,
                                                  &v.cert.j_plus_vector);
        if (!v.cert.membership) {
            v.status = Status::Unsolvable;
            v.cert.clause = "class-membership-failed";
        } else if (n % 3 == 0) {
            // 2 is inert here, so (O/2O)^x has order 3 and n-th powers of
            // units cannot move the residue class of a generator mod 2O;
            // the class membership alone does not force the odd-y points
            // the annulus refinement needs. Witness search must settle it.
            v.status = Status::Undecided;
            v.cert.clause = "class-parity-unproven";
        } else {
            v.status = Status::Solvable;
            v.cert.clause = "class-membership";
        }
        return v;
    }

    // B0 = 7 mod 8: 2 splits and the test carries the offset -(2-ell)[p2].
    auto G = class_group(O.disc);
    CFactorization fac = factor_C_over_K(sp.B0, sp.f, C, n, true, *G);
    switch (fac.obstruction) {
        case Obstruction::InertPrime:
            return unsolvable_with(O, G, "inert-prime", M);
        case Obstruction::RamifiedSquare:
            return unsolvable_with(O, G, "ramified-square", M);
        default:
            break;
    }
    std::vector<Int> offset(G->elementary_divisors.size(), 0);
    {
        QForm p2 = prime_form(O.disc, 2);
        auto v2 = G->dlog(p2);
        for (size_t t = 0; t < offset.size(); ++t) {
            i128 val = -(i128)(2 - ell) * v2[t];
            offset[t] = mod_floor((Int)(val % G->elementary_divisors[t]),
                                  G->elementary_divisors[t]);
        }
    }
    GlobalVerdict v;
    v.M = M;
    v.cert.order = O;
    v.cert.divisors = G->elementary_divisors;
    bool member;
    if (offset.empty())
        member = assignment_membership(fac.split, {}, n,
                                       G->elementary_divisors,
                                       &v.cert.j_plus_vector);
    else
        member = assignment_membership(fac.split, offset, n,
                                       G->elementary_divisors,
                                       &v.cert.j_plus_vector);
    v.cert.membership = member;
    v.cert.clause = member ? "class-membership" : "class-membership-failed";
    v.status = member ? Status::Solvable : Status::Unsolvable;
    return v;
}

} // namespace fermat22n
