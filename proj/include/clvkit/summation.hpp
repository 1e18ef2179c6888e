#pragma once

#include <span>

namespace clvkit {

/// Neumaier-compensated sum accumulated in long double, in index order.
/// Permuting or duplicating the inputs changes the result by far less than one ulp
/// of the double result in practice, so reductions are reproducible.
[[nodiscard]] double compensated_sum(std::span<const double> values);

} // namespace clvkit
