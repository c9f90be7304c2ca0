#include "hiercal/rng.hpp"

#include "hiercal/stats.hpp"

namespace hiercal {

double Rng::normal() { return stats::norm_quantile(uniform_open()); }

}  // namespace hiercal
