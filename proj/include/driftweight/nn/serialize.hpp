#pragma once

#include <iosfwd>

#include "driftweight/nn/dense_net.hpp"

namespace dw::nn {

// Text snapshot: a shape header (one line per layer: in out activation norm), then
// the flat parameter vector and batchnorm running statistics, one value per line,
// printed with round-trip precision.
void write_snapshot(std::ostream& out, const DenseNet& net);
DenseNet read_snapshot(std::istream& in);

}  // namespace dw::nn
