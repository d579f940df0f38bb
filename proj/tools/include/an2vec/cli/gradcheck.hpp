#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "an2vec/gradient.hpp"
#include "an2vec/synthgen.hpp"
#include "an2vec/train.hpp"

namespace an2vec::cli {

struct GradCheckCase {
  std::string variant;  // "<decoder>/<head>/f_ax=<k>"
  NodeId nodes = 0;
  FiniteDiffReport report;
};

struct GradCheckSuite {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  std::string worst;  // variant and coordinate of the maximum
};

/// Finite-difference checks on `instances` random featured graphs of at most
/// ten nodes, cycling through every decoder, feature head and overlap level
/// in {0, half, full}.
GradCheckSuite run_grad_check_suite(int instances, std::uint64_t seed);

/// At most `max_nodes` nodes gathered breadth-first from a highest-degree
/// node, with the induced edges and the matching feature rows.
FeaturedGraph shrink_graph(const FeaturedGraph& g, NodeId max_nodes);

/// Checks the configured architecture on a shrunken copy of `g`, with hidden
/// widths capped at `max_hidden`.
GradCheckCase grad_check_config(const FeaturedGraph& g, const TrainConfig& cfg, NodeId max_nodes = 10,
                                int max_hidden = 6);

}  // namespace an2vec::cli
