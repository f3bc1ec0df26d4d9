#pragma once

#include <filesystem>
#include <iosfwd>

#include "driftweight/data/schedule.hpp"

namespace dw::data {

// CSV layout: header "t,y,x_0,...,x_{d-1}", then one sample per line. An absent label
// is written as an empty field.
void write_stream_csv(std::ostream& out, const Stream& stream);
Stream read_stream_csv(std::istream& in);

void save_stream(const std::filesystem::path& path, const Stream& stream);
Stream load_stream(const std::filesystem::path& path);

/// Loads every step_*.csv file in a directory (lexicographic order) into one stream.
Stream load_stream_dir(const std::filesystem::path& dir);

std::filesystem::path step_file_name(int t);

}  // namespace dw::data
