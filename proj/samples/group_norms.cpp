// Two groups under different norm strengths, coupled pairwise.

#include <cstdio>

#include "qnorm/random.hpp"
#include "qnorm/social/group_dynamics.hpp"

int main() {
  qnorm::social::GroupDynamicsConfig config;
  qnorm::PseudoStream rng(7);
  const auto t = qnorm::social::run_group_dynamics(config, rng);

  std::printf("step  A:R  A:N  B:R  B:N\n");
  for (const auto& s : t.steps) {
    std::printf("%4d %4d %4d %4d %4d\n", s.step, s.a.conforming, s.a.breaking, s.b.conforming, s.b.breaking);
  }
  const auto& a = t.final_a.members.front();
  const auto& b = t.final_b.members.front();
  std::printf("final P(R): A %.4f  B %.4f\n", a.conforming_probability(), b.conforming_probability());
}
