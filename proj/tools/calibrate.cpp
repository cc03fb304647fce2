// Picks the query constant c_total for the tomography budget
// N = c_total d1 d2 / eps^2: the smallest grid value whose empirical success
// rate (diamond error <= eps) reaches the target for both isometry
// tomography in ISO(2, 4) and channel tomography of rank-2 qubit channels.
//
// usage: qct_calibrate [trials] [seed] [target]

#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "qct/metrics.hpp"
#include "qct/random.hpp"
#include "qct/tomography.hpp"

int main(int argc, char** argv) {
  const std::size_t trials = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 300;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20240611;
  const double target = argc > 3 ? std::strtod(argv[3], nullptr) : 0.95;
  const double eps = 0.25;

  std::cout << "c_total  iso_success  channel_success\n";
  double chosen = -1.0;
  for (double c : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0}) {
    std::size_t iso_ok = 0;
    std::size_t ch_ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      qct::Rng rng = qct::make_stream(seed, t);
      const qct::Isometry v = qct::random_isometry(2, 4, rng);
      const qct::IsometryEstimate est = qct::isometry_tomography(v, eps, rng, c);
      iso_ok += qct::isometry_diamond_distance(v.matrix(), est.v_hat) <= eps ? 1 : 0;
      const qct::QuantumChannel ch = qct::random_channel(2, 2, 2, rng);
      const qct::ChannelTomographyResult res = qct::channel_tomography(ch, 2, eps, rng, c);
      ch_ok += qct::diamond_distance(res.estimate, ch, rng).value <= eps ? 1 : 0;
    }
    const double iso_rate = static_cast<double>(iso_ok) / static_cast<double>(trials);
    const double ch_rate = static_cast<double>(ch_ok) / static_cast<double>(trials);
    std::cout << std::setw(7) << c << "  " << std::setw(11) << iso_rate << "  " << std::setw(15) << ch_rate << '\n';
    if (chosen < 0.0 && iso_rate >= target && ch_rate >= target) chosen = c;
  }
  if (chosen < 0.0) {
    std::cout << "no grid value reaches the target rate " << target << '\n';
    return 1;
  }
  std::cout << "calibrated c_total = " << chosen << " (target success rate " << target << ")\n";
  return 0;
}
