#pragma once

#include <cstdint>

#include "bnet/bundle.hpp"
#include "bnet/graph.hpp"

namespace bnet {
namespace fixtures {

// Three binary/ternary features feeding two intermediate classifiers and a
// binary decision on top:
//   x1 -> m1 <- x2 -> m2 <- x3,   y <- (m1, m2)
// m2 carries nearly all of the decision signal; m1 only modulates the
// positive rate of the m2-negative stratum.
Dag toy_network();

// Draws features from the toy generative story and emits gold labels for
// m1, m2 and y. Columns: x1, x2, x3, m1, m2, y. The m2 rule is monotone in
// x3, so every architecture fits it well.
DataTable toy_data(std::size_t n, std::uint64_t seed);

// Same story except m2 marks only the middle x3 category positive: a
// monotone linear fit is structurally wrong there while boosted stumps can
// represent the bump. Used by the model-swap experiment.
DataTable toy_data_nonlinear(std::size_t n, std::uint64_t seed);

}  // namespace fixtures
}  // namespace bnet
