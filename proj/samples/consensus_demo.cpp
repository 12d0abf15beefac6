// Runs the ten-agent network under three delay bounds and prints where the
// states end up.

#include <iomanip>
#include <iostream>

#include "rppac/rppac.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "data/fig1.edges";
  const rppac::Digraph g = rppac::load_edge_list(path);

  Eigen::VectorXd x0(g.size());
  for (int j = 0; j < g.size(); ++j) x0[j] = j + 1.0;

  for (int tau_bar : {0, 2, 5}) {
    rppac::DelaySpec spec;
    spec.kind = rppac::DelayKind::uniform_iid;
    spec.tau_bar = tau_bar;
    spec.seed = 7;
    const auto delays = rppac::make_schedule(spec, g);
    const auto traj = rppac::run_rppac(g, delays, 0.1, x0, 300);
    std::cout << "tau_bar=" << tau_bar << "  x(300) =";
    for (double v : traj.x.back()) std::cout << ' ' << std::setprecision(8) << v;
    std::cout << "\n           error(300) = " << traj.error.back() << "\n";
  }
}
