#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace logtex {

// Splits a raw log line into named header fields and the message content,
// following the "<Field>" format-string convention, e.g.
// "<Date> <Time> <Level> <Component>: <Content>".
struct HeaderPattern {
  std::string format_string;
  std::vector<std::string> field_names;  // in format order; exactly one is "Content"

  bool content_only() const { return field_names.size() == 1; }
};

struct LogRecord {
  std::int64_t line_id = 0;  // 1-based
  std::string content;
  std::map<std::string, std::string> header_fields;
};

struct Dataset {
  std::string name;
  std::vector<LogRecord> records;
  std::optional<std::map<std::int64_t, std::string>> ground_truth;
  std::int64_t header_mismatches = 0;  // lines kept whole because the pattern did not apply

  const std::string* truth_for(std::int64_t line_id) const;
};

// Template/parameter alignment of one message against a "<*>" template.
struct ParamExtraction {
  std::string template_text;
  std::vector<std::pair<size_t, size_t>> param_spans;  // [byte_start, byte_end) into message
  std::vector<std::string> params;
};

HeaderPattern parse_format_string(const std::string& format);

// Applies the pattern to one raw line. Returns false when the line does not
// fit; callers then keep the whole line as content.
bool split_header(const HeaderPattern& pattern, const std::string& line,
                  std::map<std::string, std::string>& fields, std::string& content);

Dataset load_dataset(const std::filesystem::path& log_path,
                     const std::optional<std::filesystem::path>& truth_path,
                     const HeaderPattern& pattern);

// Character-level alignment: each "<*>" matches a non-empty run, resolved
// leftmost-shortest with backtracking. Throws NoMatch when impossible.
ParamExtraction match_template(const std::string& message, const std::string& template_text);

bool template_matches(const std::string& message, const std::string& template_text);

// Rebuilds the message from template_text with params substituted in order.
std::string substitute_params(const std::string& template_text,
                              const std::vector<std::string>& params);

}  // namespace logtex
