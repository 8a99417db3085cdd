#include "rng.hpp"

#include "numerics.hpp"

namespace genheck::rng {

double Stream::normal() { return numerics::norm_quantile(uniform()); }

}  // namespace genheck::rng
