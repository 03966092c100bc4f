#pragma once

#include <cstdint>

namespace war {

// Operation counters used by the benchmark and acceptance suites. Wall-clock
// numbers are machine-dependent; these are not.
struct OpCounters {
    // Multiplications in F_p performed by the recovery data path
    // (syndrome updates, polynomial toolkit, locator synthesis, solves).
    std::uint64_t field_mults = 0;
    // GSW ciphertext products X * G^{-1}(Y) actually carried out.
    std::uint64_t cipher_mults = 0;
    // Point-circuit evaluations requested (cache hits included).
    std::uint64_t point_evals = 0;

    void reset() { *this = OpCounters{}; }
};

OpCounters& counters();

} // namespace war
