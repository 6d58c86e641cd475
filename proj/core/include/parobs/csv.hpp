#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>

namespace parobs::csv {

/// Format a double with 17 significant digits (shortest round-trip safe form).
std::string format(double v);

/// Write one comma-separated row of doubles, newline terminated.
void write_row(std::ostream& os, std::initializer_list<double> values);

/// Write `content` to `path` atomically (temp file in the same directory,
/// then rename). Throws IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace parobs::csv
