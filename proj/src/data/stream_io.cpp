#include "driftweight/data/stream_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "driftweight/errors.hpp"
#include "driftweight/text.hpp"

namespace dw::data {

void write_stream_csv(std::ostream& out, const Stream& stream) {
  const std::size_t dim = stream.empty() ? 0 : stream.front().x.size();
  out << "t,y";
  for (std::size_t k = 0; k < dim; ++k) out << ",x_" << k;
  out << '\n';
  for (const auto& s : stream) {
    if (s.x.size() != dim) throw ShapeError("stream feature dimension is not constant");
    out << s.t << ',';
    if (s.y) out << *s.y;
    for (double v : s.x) out << ',' << text::format_double(v);
    out << '\n';
  }
}

Stream read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("stream csv: missing header");
  const auto header = text::split(line, ',');
  if (header.size() < 2 || header[0] != "t" || header[1] != "y") {
    throw IoError("stream csv: header must start with t,y");
  }
  const std::size_t dim = header.size() - 2;
  Stream stream;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != dim + 2) {
      throw IoError("stream csv line " + std::to_string(line_no) + ": expected " +
                    std::to_string(dim + 2) + " fields");
    }
    TimedSample s;
    s.t = static_cast<int>(text::parse_int(fields[0]));
    if (!fields[1].empty()) s.y = static_cast<int>(text::parse_int(fields[1]));
    s.x.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) s.x.push_back(text::parse_double(fields[k + 2]));
    stream.push_back(std::move(s));
  }
  return stream;
}

void save_stream(const std::filesystem::path& path, const Stream& stream) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_stream_csv(out, stream);
  if (!out) throw IoError("write failed for " + path.string());
}

Stream load_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return read_stream_csv(in);
}

Stream load_stream_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("step_") && name.ends_with(".csv")) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw IoError("no step_*.csv files in " + dir.string());
  std::sort(files.begin(), files.end());
  Stream all;
  for (const auto& f : files) {
    auto part = load_stream(f);
    std::move(part.begin(), part.end(), std::back_inserter(all));
  }
  return all;
}

std::filesystem::path step_file_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%05d.csv", t);
  return buf;
}

}  // namespace dw::data
