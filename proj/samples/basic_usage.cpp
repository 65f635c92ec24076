// Insert, look up, move and remove two-dimensional keys with the one-parent
// variant, then inspect the tree.

#include <iostream>
#include <string>

#include "quadboost/checker/structure.hpp"
#include "quadboost/quadboost_tree.hpp"

int main() {
  using quadboost::Point;
  quadboost::QuadboostTree<std::string, quadboost::Variant::qb_o> tree(1024);

  tree.insert({12, 40}, "depot");
  tree.insert({700, 512.5}, "truck-7");
  tree.insert({13, 40}, "truck-3");

  if (auto v = tree.lookup({700, 512.5})) std::cout << "found " << *v << '\n';

  // The truck changes position atomically: no reader sees it twice or not at all.
  tree.move({700, 512.5}, {701, 512.5});
  std::cout << "old position present: " << tree.contains({700, 512.5}) << '\n';
  std::cout << "new position value:   " << *tree.lookup({701, 512.5}) << '\n';

  tree.remove({13, 40});

  const auto report = quadboost::checker::validate_structure(tree.root());
  std::cout << "structure " << report.summary() << ": " << report.counts.internal
            << " internal, " << report.counts.leaf << " leaf, " << report.counts.empty
            << " empty\n";
  return report.ok ? 0 : 1;
}
