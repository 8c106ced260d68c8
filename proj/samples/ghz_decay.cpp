// Prints the ensemble mean of <Z0 Z1> for a 5-qubit GHZ register with one
// random flip per step, next to the analytic (1 - 4/n)^m curve.

#include <cmath>
#include <cstdio>

#include "qnorm/quantum/decay_protocol.hpp"

int main() {
  qnorm::quantum::DecayProtocolConfig config;
  config.group_sizes = {5};
  config.steps = 6;
  config.flip_period = 1;
  config.runs = 20000;
  config.seed = 2024;
  config.record_events = false;

  const auto result = qnorm::quantum::run_decay_protocol(config);
  std::printf("%4s %10s %10s %10s\n", "m", "mean", "stderr", "analytic");
  for (int m = 0; m <= config.steps; ++m) {
    std::printf("%4d %10.4f %10.4f %10.4f\n", m, result.mean[m][0], result.std_error[m][0], std::pow(0.2, m));
  }
}
