#pragma once

#include <vector>

#include "test_util.hpp"

namespace fixtures {

// Eight-node, twelve-edge sample network with a 3-core of four nodes.
//
//   nodes 0..3 (AAA..AAD) form a K4            -> shell 3
//   node 4 (AAE) links to 0, 1 and leaf 6      -> shell 2
//   node 5 (AAF) links to 2, 3 and leaf 7      -> shell 2
//   nodes 6, 7 (AAG, AAH) are leaves           -> shell 1
inline tradenet::YearlyTradeGraph kcore_sample_network() {
  return testutil::undirected_graph(8, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
                                        {4, 0}, {4, 1}, {4, 6},
                                        {5, 2}, {5, 3}, {5, 7}});
}

inline const std::vector<int> kcore_sample_shells{3, 3, 3, 3, 2, 2, 1, 1};

}  // namespace fixtures
