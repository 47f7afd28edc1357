#include "otm/quadrature.hpp"

#include <vector>

namespace otm {

double pairwise_sum(std::vector<double>& partials) {
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) partials[i] += partials[i + half];
    n = half;
  }
  return partials[0];
}

}  // namespace otm
