#pragma once

#include <compare>
#include <set>
#include <vector>

namespace neuralign {

// One alignment link between source position `source` (j) and target
// position `target` (i). Positions are 1-based in memory.
struct Link {
  int source = 0;
  int target = 0;

  auto operator<=>(const Link&) const = default;
};

// Links of one sentence pair.
using LinkSet = std::set<Link>;

// Links for every sentence of a corpus, in corpus order.
using AlignmentSet = std::vector<LinkSet>;

}  // namespace neuralign
