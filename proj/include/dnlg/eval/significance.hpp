#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dnlg {

// Paired approximate randomization on the absolute mean difference. Each
// round swaps every pair independently with probability 1/2;
// p = (rounds at least as extreme + 1) / (rounds + 1).
double approximate_randomization(std::span<const double> a, std::span<const double> b, std::size_t rounds = 10000,
                                 std::uint64_t seed = 0);

}  // namespace dnlg
