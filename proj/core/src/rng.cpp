#include "crqkit/rng.hpp"

#include <cmath>

#include "crqkit/inference.hpp"

namespace crqkit::rng {

double Stream::next_gaussian() { return normal_quantile(next_uniform()); }

double Stream::next_exponential() { return -std::log(next_uniform()); }

double Stream::next_student_t2() {
  // t_2 = Z / sqrt(E) with E ~ Exp(1); consumes two draws.
  const double z = next_gaussian();
  const double e = next_exponential();
  return z / std::sqrt(e);
}

}  // namespace crqkit::rng
