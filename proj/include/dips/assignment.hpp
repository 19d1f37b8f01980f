#pragma once

#include <vector>

namespace dips {

// Maximum of sum_r w[r*m + c(r)] over permutations c of {0..m-1} (Hungarian method, O(m^3)).
double max_weight_assignment(const std::vector<double>& w, int m);

}  // namespace dips
