#include "resilnet/simplex.hpp"

#include <algorithm>
#include <functional>
#include <vector>

#include "resilnet/errors.hpp"

namespace resilnet {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double budget) {
  if (!(budget > 0.0)) throw InputError("project_simplex: budget must be positive");
  const Eigen::Index m = v.size();
  if (m == 0) throw InputError("project_simplex: empty vector");

  // Shifting by the max keeps the budget resolvable when entries are huge.
  const double top = v.maxCoeff();
  std::vector<double> sorted(m);
  for (Eigen::Index r = 0; r < m; ++r) sorted[static_cast<std::size_t>(r)] = v[r] - top;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    cumulative += sorted[static_cast<std::size_t>(r)];
    const double candidate = (cumulative - budget) / static_cast<double>(r + 1);
    if (sorted[static_cast<std::size_t>(r)] - candidate > 0.0) shift = candidate;
  }
  return ((v.array() - top) - shift).max(0.0).matrix();
}

}  // namespace resilnet
