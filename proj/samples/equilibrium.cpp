// Solves the pure and mixed equilibria of a two-player 2x2 game.

#include <cstdio>

#include "olcais/policies/game.hpp"

int main() {
  using namespace olcais::policy;
  const auto m = PayoffMatrix::from_bimatrix({{{3, 0}, {5, 1}}}, {{{3, 5}, {0, 1}}});
  for (const auto& c : find_psne(m)) std::printf("pure: (%zu, %zu)\n", c.row, c.col);
  if (const auto eq = solve_msne(m))
    std::printf("mixed: p=%.4f q=%.4f\n", eq->p, eq->q);
  else
    std::printf("no interior mixed equilibrium\n");
}
