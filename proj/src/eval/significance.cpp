#include "dnlg/eval/significance.hpp"

#include <cmath>
#include <random>

#include "dnlg/errors.hpp"
#include "dnlg/util/seed.hpp"

namespace dnlg {

double approximate_randomization(std::span<const double> a, std::span<const double> b, std::size_t rounds,
                                 std::uint64_t seed) {
    if (a.size() != b.size()) throw ValidationError("paired score lists differ in length");
    if (a.empty()) throw ValidationError("no paired scores");
    if (rounds == 0) throw ConfigError("approximate randomization needs at least one round");

    const auto n = static_cast<double>(a.size());
    double observed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) observed += a[i] - b[i];
    observed = std::abs(observed) / n;
    // Summation order differs between rounds; treat near-equal as a tie.
    const double threshold = observed - 1e-12 * std::max(1.0, observed);

    Rng rng(seed);
    std::bernoulli_distribution swap(0.5);
    std::size_t extreme = 0;
    for (std::size_t r = 0; r < rounds; ++r) {
        double diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff += swap(rng) ? b[i] - a[i] : a[i] - b[i];
        if (std::abs(diff) / n >= threshold) ++extreme;
    }
    return static_cast<double>(extreme + 1) / static_cast<double>(rounds + 1);
}

}  // namespace dnlg
