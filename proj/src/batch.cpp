#include "l2s/batch.hpp"

namespace l2s::dep {

OracleCheckReport check_oracle_serial(std::span<const std::vector<int>> trees) {
  OracleCheckReport total;
  for (const auto& t : trees) total.merge(check_oracle_on_tree(t));
  return total;
}

OracleCheckReport check_oracle(std::span<const std::vector<int>> trees) {
  std::vector<OracleCheckReport> parts(trees.size());
  const auto n = static_cast<long>(trees.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) parts[static_cast<std::size_t>(i)] = check_oracle_on_tree(trees[static_cast<std::size_t>(i)]);
  // Merged in input order so the failure list matches the serial run.
  OracleCheckReport total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace l2s::dep
