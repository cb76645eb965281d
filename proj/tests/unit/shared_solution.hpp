#pragma once

#include "airyproc/painleve.hpp"

namespace airyproc::testing {

/// Default Hastings-McLeod solution, solved once per test binary.
inline const PainleveSolution& hm() {
    static const PainleveSolution sol = solve_hastings_mcleod();
    return sol;
}

}  // namespace airyproc::testing
