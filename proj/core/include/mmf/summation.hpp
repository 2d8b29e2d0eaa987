#pragma once

#include <cstddef>
#include <span>

namespace mmf {

/// Pairwise (cascade) summation with a fixed split point, so the result depends
/// only on the input order and length.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace mmf
