#ifndef OCDSP_ANALYTICS_HPP
#define OCDSP_ANALYTICS_HPP

#include <iosfwd>
#include <vector>

#include "ocdsp/cpe.hpp"

namespace ocdsp::analytics {

// Phase-noise-limited BER floors of m-PSK with the four carrier-phase
// estimators. `sigma` is the per-symbol Wiener phase standard deviation,
// sigma^2 = 2 pi (linewidth_tx + linewidth_lo) T_s. erfc comes from the C
// library (glibc: correctly rounded to within 1 ulp over the whole range).

/// (1 / log2 m) erfc(pi / (m sqrt(2) sigma)); 0 at sigma = 0.
double ber_floor_nlms(int m, double sigma);

/// Same expression as ber_floor_nlms.
double ber_floor_differential(int m, double sigma);

/// Phase-error variance (rad^2) of the k-th symbol (1-based) of a BWA block:
/// sigma^2 / (6 N^2) [2(k-1)^3 + 3(k-1)^2 + 2(N-k)^3 + 3(N-k)^2 + N - 1].
double sigma_bwa_k(double sigma, int block_size, int k);

/// (1 / (N log2 m)) sum_k erfc(pi / (m sqrt(2) sigma_k)).
double ber_floor_bwa(int m, double sigma, int block_size);

/// Phase-error variance (rad^2) of the VV estimate: sigma^2 (N^2 - 1) / (12 N).
double sigma_vv(double sigma, int window);

/// (1 / log2 m) erfc(pi / (m sqrt(2) sigma_vv)).
double ber_floor_vv(int m, double sigma, int window);

/// Floor of a configured estimator; `size` is N_b or N_v where it applies.
double ber_floor(CpeMethod method, int m, double sigma, int size);

/// Per-symbol sigma at which the floor equals `target` (floors increase
/// monotonically with sigma). Throws DomainError when the target is not
/// reachable (e.g. N = 1 for BWA/VV, whose floor is identically 0).
double sigma_for_floor(CpeMethod method, int m, double target, int size);

struct FloorRow {
  int m;
  double sigma;
  int size;
  double floor;
};

std::vector<FloorRow> floor_table(CpeMethod method, int m, const std::vector<double>& sigmas,
                                  const std::vector<int>& sizes);

/// CSV with header "m,sigma,N,floor".
void write_floor_csv(std::ostream& os, const std::vector<FloorRow>& rows);

}  // namespace ocdsp::analytics

#endif  // OCDSP_ANALYTICS_HPP
