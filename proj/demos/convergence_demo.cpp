// Worst-case error of interlaced nets against Monte Carlo at the same sizes.
//
//   convergence_demo [b] [w_max]

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <vector>

#include "hoqmc/hoqmc.hpp"

int main(int argc, char** argv) {
  using namespace hoqmc;
  try {
    const std::uint32_t b = argc > 1 ? static_cast<std::uint32_t>(std::stoul(argv[1])) : 5;
    const unsigned w_max = argc > 2 ? static_cast<unsigned>(std::stoul(argv[2])) : 4;

    SweepConfig cfg;
    cfg.params.s = 1;
    cfg.params.alpha = 2;
    cfg.params.beta = 4;
    cfg.params.g = 1;
    cfg.params.b = PrimeBase(b);
    cfg.params.strict = false;
    cfg.w_min = 1;
    cfg.w_max = w_max;
    const auto nets = run_sweep(cfg);

    std::vector<std::uint64_t> counts;
    for (const auto& r : nets.rows) counts.push_back(static_cast<std::uint64_t>(r.N));
    const auto mc = monte_carlo_sweep(counts, 1, 2, 2024);

    std::cout << std::setw(4) << "w" << std::setw(10) << "N" << std::setw(16) << "e(net)" << std::setw(16)
              << "e(MC)" << '\n';
    for (std::size_t i = 0; i < nets.rows.size(); ++i) {
      const auto& r = nets.rows[i];
      std::cout << std::setw(4) << r.w << std::setw(10) << static_cast<std::uint64_t>(r.N) << std::setw(16);
      if (r.ok()) {
        std::cout << r.e;
      } else {
        std::cout << "n/a";
      }
      std::cout << std::setw(16) << mc.rows[i].e << '\n';
      if (!r.ok()) std::cout << "    " << r.error << '\n';
    }
    std::cout << "slope(net) = " << nets.slope << "   slope(MC) = " << mc.slope << '\n';
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
