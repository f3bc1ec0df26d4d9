#include "driftweight/nn/serialize.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "driftweight/errors.hpp"
#include "driftweight/text.hpp"

namespace dw::nn {

namespace {

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "identity"; }
const char* norm_name(Norm n) { return n == Norm::batchnorm ? "batchnorm" : "none"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw IoError("unknown activation '" + s + "'");
}

Norm parse_norm(const std::string& s) {
  if (s == "batchnorm") return Norm::batchnorm;
  if (s == "none") return Norm::none;
  throw IoError("unknown normalization '" + s + "'");
}

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("snapshot truncated");
  return line;
}

void expect_keyword(std::istringstream& row, const std::string& keyword) {
  std::string word;
  row >> word;
  if (word != keyword) throw IoError("snapshot: expected '" + keyword + "', got '" + word + "'");
}

}  // namespace

void write_snapshot(std::ostream& out, const DenseNet& net) {
  out << "densenet 1\n";
  out << "layers " << net.layers().size() << "\n";
  for (const auto& spec : net.layers()) {
    out << spec.in << ' ' << spec.out << ' ' << activation_name(spec.activation) << ' '
        << norm_name(spec.norm) << "\n";
  }
  out << "params " << net.parameter_count() << "\n";
  for (double v : net.parameters()) out << text::format_double(v) << "\n";
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    if (net.layers()[k].norm != Norm::batchnorm) continue;
    out << "running " << k << "\n";
    for (Eigen::Index i = 0; i < net.running_mean(k).size(); ++i) {
      out << text::format_double(net.running_mean(k)[i]) << ' '
          << text::format_double(net.running_var(k)[i]) << "\n";
    }
  }
  out << "end\n";
}

DenseNet read_snapshot(std::istream& in) {
  {
    std::istringstream row(next_line(in));
    expect_keyword(row, "densenet");
    int version = 0;
    row >> version;
    if (version != 1) throw IoError("unsupported densenet snapshot version");
  }
  std::size_t count = 0;
  {
    std::istringstream row(next_line(in));
    expect_keyword(row, "layers");
    row >> count;
    if (!row || count == 0) throw IoError("snapshot: bad layer count");
  }
  std::vector<LayerSpec> specs;
  for (std::size_t k = 0; k < count; ++k) {
    std::istringstream row(next_line(in));
    LayerSpec spec;
    std::string act, norm;
    row >> spec.in >> spec.out >> act >> norm;
    if (!row) throw IoError("snapshot: bad layer line");
    spec.activation = parse_activation(act);
    spec.norm = parse_norm(norm);
    specs.push_back(spec);
  }
  DenseNet net(std::move(specs));
  {
    std::istringstream row(next_line(in));
    expect_keyword(row, "params");
    std::size_t n = 0;
    row >> n;
    if (n != net.parameter_count()) throw IoError("snapshot: parameter count mismatch");
  }
  for (double& v : net.parameters()) v = text::parse_double(next_line(in));
  while (true) {
    std::istringstream row(next_line(in));
    std::string word;
    row >> word;
    if (word == "end") break;
    if (word != "running") throw IoError("snapshot: unexpected '" + word + "'");
    std::size_t k = 0;
    row >> k;
    if (k >= net.layers().size() || net.layers()[k].norm != Norm::batchnorm) {
      throw IoError("snapshot: running statistics for a layer without batchnorm");
    }
    for (Eigen::Index i = 0; i < net.running_mean(k).size(); ++i) {
      const auto parts = text::split(next_line(in), ' ');
      if (parts.size() != 2) throw IoError("snapshot: bad running statistics line");
      net.running_mean(k)[i] = text::parse_double(parts[0]);
      net.running_var(k)[i] = text::parse_double(parts[1]);
    }
  }
  return net;
}

}  // namespace dw::nn
