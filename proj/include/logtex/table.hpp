#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace logtex {

// Delimiter-separated table with a mandatory header row. Fields containing the
// delimiter, quotes or newlines are quoted; embedded quotes are doubled.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 if absent.
  int column(const std::string& name) const;
};

Table read_table(const std::filesystem::path& path, char delimiter = ',');
Table parse_table(const std::string& text, char delimiter = ',');

void write_table(const Table& table, const std::filesystem::path& path, char delimiter = ',');
std::string format_table(const Table& table, char delimiter = ',');

std::string csv_escape(const std::string& field, char delimiter = ',');

}  // namespace logtex
