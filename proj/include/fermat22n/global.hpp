#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermat22n/qforms.hpp"

namespace fermat22n {

enum class Obstruction { None, InertPrime, RamifiedSquare, TwoAdic };

// Splitting data of C over the field: C O_K = j+ j- r^2 (times 2^ell in the
// tilde reading), recorded per prime with the class of one prime above p.
struct CFactorization {
    int ell = 0;  // v_2(C)
    std::vector<std::pair<Int, int>> ramified;
    struct SplitPart {
        Int p = 0;
        int e = 0;
        QForm prime_class;            // canonical class of one prime above p
        std::vector<Int> dlog;
    };
    std::vector<SplitPart> split;
    Obstruction obstruction = Obstruction::None;
    Int obstruction_p = 0;
};

enum class Status { Solvable, Unsolvable, Undecided };
const char* status_name(Status s);

struct GlobalCertificate {
    QuadOrder order;
    std::vector<Int> divisors;        // elementary divisors of Cl(O)
    std::vector<Int> j_plus_vector;   // exponent vector of the tested class
    bool membership = false;
    std::string clause;
};

struct GlobalVerdict {
    Status status = Status::Undecided;
    GlobalCertificate cert;
    Int M = 1;  // z-coprimality parameter, recorded for witness search only
};

// The prime-by-prime splitting of C over the order for (B0, f); obstruction
// codes report an inert divisor, a ramified square divisor, or (tilde
// reading with B0 = 3 mod 8) a 2-adic valuation other than 2.
CFactorization factor_C_over_K(Int B0, Int f, Int C, int n, bool tilde,
                               const ClassGroup& G);

// Non-emptiness of the *^0 groupoid (all z-coprimality parameters M at
// once; M is carried through for downstream witness search).
GlobalVerdict decide_star0(Int B, Int C, int n, Int M = 1);

// Non-emptiness of the tilde*^0 groupoid; requires B0 = 3 mod 4 and
// M in the admissible set of z-coprimality parameters.
GlobalVerdict decide_star0_tilde(Int B, Int C, int n, Int M = 1);

} // namespace fermat22n
