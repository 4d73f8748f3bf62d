#include "logtex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "logtex/error.hpp"
#include "logtex/table.hpp"

namespace logtex {

namespace {

constexpr const char* kPlaceholder = "<*>";

std::string regex_escape(const std::string& text) {
  static const std::string specials = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : text) {
    if (specials.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

const std::string* Dataset::truth_for(std::int64_t line_id) const {
  if (!ground_truth) return nullptr;
  auto it = ground_truth->find(line_id);
  return it == ground_truth->end() ? nullptr : &it->second;
}

HeaderPattern parse_format_string(const std::string& format) {
  HeaderPattern pattern;
  pattern.format_string = format;
  size_t pos = 0;
  while (pos < format.size()) {
    size_t open = format.find('<', pos);
    if (open == std::string::npos) break;
    size_t close = format.find('>', open + 1);
    if (close == std::string::npos) break;
    pattern.field_names.push_back(format.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  std::set<std::string> seen;
  for (const auto& name : pattern.field_names) {
    if (!seen.insert(name).second)
      raise(ErrorKind::DuplicateFieldName, "field <" + name + "> appears twice in \"" + format + "\"");
  }
  if (!seen.count("Content"))
    raise(ErrorKind::MissingContentField, "format \"" + format + "\" has no <Content> field");
  return pattern;
}

namespace {

// Line regex for a pattern: literals with whitespace runs relaxed to \s+,
// lazy groups per field, greedy for the trailing field.
std::regex compile_pattern(const HeaderPattern& pattern) {
  std::string expr = "^";
  size_t pos = 0;
  size_t field_index = 0;
  const std::string& format = pattern.format_string;
  while (pos < format.size()) {
    size_t open = format.find('<', pos);
    size_t literal_end = (open == std::string::npos) ? format.size() : open;
    std::string literal = format.substr(pos, literal_end - pos);
    for (size_t i = 0; i < literal.size(); ++i) {
      if (std::isspace(static_cast<unsigned char>(literal[i]))) {
        while (i + 1 < literal.size() && std::isspace(static_cast<unsigned char>(literal[i + 1]))) ++i;
        expr += "\\s+";
      } else {
        expr += regex_escape(std::string(1, literal[i]));
      }
    }
    if (open == std::string::npos) break;
    size_t close = format.find('>', open + 1);
    bool last = field_index + 1 == pattern.field_names.size();
    expr += last ? "(.*)" : "(.*?)";
    ++field_index;
    pos = close + 1;
  }
  expr += "$";
  return std::regex(expr, std::regex::ECMAScript);
}

bool split_with(const std::regex& re, const HeaderPattern& pattern, const std::string& line,
                std::map<std::string, std::string>& fields, std::string& content) {
  std::smatch match;
  if (!std::regex_match(line, match, re)) return false;
  for (size_t i = 0; i < pattern.field_names.size(); ++i) {
    const std::string& name = pattern.field_names[i];
    std::string value = match[i + 1].str();
    if (name == "Content") content = value;
    else fields[name] = value;
  }
  return !content.empty();
}

}  // namespace

bool split_header(const HeaderPattern& pattern, const std::string& line,
                  std::map<std::string, std::string>& fields, std::string& content) {
  if (pattern.content_only()) {
    content = line;
    return true;
  }
  return split_with(compile_pattern(pattern), pattern, line, fields, content);
}

Dataset load_dataset(const std::filesystem::path& log_path,
                     const std::optional<std::filesystem::path>& truth_path,
                     const HeaderPattern& pattern) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + log_path.string());

  Dataset dataset;
  dataset.name = log_path.stem().string();

  const bool content_only = pattern.content_only();
  std::regex re;
  if (!content_only) re = compile_pattern(pattern);

  std::string line;
  std::int64_t line_id = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LogRecord record;
    record.line_id = ++line_id;
    std::map<std::string, std::string> fields;
    std::string content;
    bool matched = content_only ? (content = line, true)
                                : split_with(re, pattern, line, fields, content);
    if (matched) {
      record.content = std::move(content);
      record.header_fields = std::move(fields);
    } else {
      record.content = line;  // malformed line kept whole
      ++dataset.header_mismatches;
    }
    dataset.records.push_back(std::move(record));
  }

  if (truth_path) {
    Table table = read_table(*truth_path);
    int id_col = table.column("LineId");
    int template_col = table.column("EventTemplate");
    if (id_col < 0 || template_col < 0)
      raise(ErrorKind::ValidationError,
            "truth table needs LineId and EventTemplate columns: " + truth_path->string());
    std::map<std::int64_t, std::string> truth;
    for (const auto& row : table.rows) {
      std::int64_t id = 0;
      try {
        id = std::stoll(row.at(id_col));
      } catch (const std::exception&) {
        raise(ErrorKind::ValidationError, "bad LineId \"" + row.at(id_col) + "\"");
      }
      truth[id] = row.at(template_col);
    }
    if (truth.size() != dataset.records.size())
      raise(ErrorKind::ValidationError,
            "truth table has " + std::to_string(truth.size()) + " rows for " +
                std::to_string(dataset.records.size()) + " records");
    for (const auto& record : dataset.records) {
      if (!truth.count(record.line_id))
        raise(ErrorKind::ValidationError, "truth table missing LineId " + std::to_string(record.line_id));
    }
    dataset.ground_truth = std::move(truth);
  }
  return dataset;
}

namespace {

// Template split into alternating literal / placeholder pieces.
struct TemplatePieces {
  std::vector<std::string> literals;  // literals.size() == placeholders + 1
  size_t placeholders = 0;
};

TemplatePieces split_template(const std::string& template_text) {
  TemplatePieces pieces;
  size_t pos = 0;
  std::string current;
  while (pos < template_text.size()) {
    if (template_text.compare(pos, 3, kPlaceholder) == 0) {
      pieces.literals.push_back(current);
      current.clear();
      ++pieces.placeholders;
      pos += 3;
    } else {
      current += template_text[pos++];
    }
  }
  pieces.literals.push_back(current);
  return pieces;
}

// Backtracking matcher, shortest-first per placeholder, so the first complete
// assignment found is the leftmost-shortest one.
bool match_pieces(const std::string& message, const TemplatePieces& pieces, size_t msg_pos,
                  size_t segment, std::vector<std::pair<size_t, size_t>>& spans) {
  const std::string& literal = pieces.literals[segment];
  if (message.compare(msg_pos, literal.size(), literal) != 0) return false;
  msg_pos += literal.size();
  if (segment == pieces.placeholders) return msg_pos == message.size();

  const std::string& next_literal = pieces.literals[segment + 1];
  bool last = segment + 1 == pieces.placeholders;
  for (size_t end = msg_pos + 1; end <= message.size(); ++end) {
    // A trailing placeholder must consume everything up to the final literal.
    if (last && next_literal.empty() && end != message.size()) continue;
    if (message.compare(end, next_literal.size(), next_literal) != 0) continue;
    spans.emplace_back(msg_pos, end);
    if (match_pieces(message, pieces, end, segment + 1, spans)) return true;
    spans.pop_back();
  }
  return false;
}

}  // namespace

ParamExtraction match_template(const std::string& message, const std::string& template_text) {
  if (template_text.empty()) raise(ErrorKind::NoMatch, "empty template");
  TemplatePieces pieces = split_template(template_text);
  std::vector<std::pair<size_t, size_t>> spans;
  if (!match_pieces(message, pieces, 0, 0, spans))
    raise(ErrorKind::NoMatch, "template \"" + template_text + "\" does not align with \"" + message + "\"");
  ParamExtraction extraction;
  extraction.template_text = template_text;
  extraction.param_spans = spans;
  extraction.params.reserve(spans.size());
  for (auto [start, end] : spans) extraction.params.push_back(message.substr(start, end - start));
  return extraction;
}

bool template_matches(const std::string& message, const std::string& template_text) {
  if (template_text.empty()) return false;
  TemplatePieces pieces = split_template(template_text);
  std::vector<std::pair<size_t, size_t>> spans;
  return match_pieces(message, pieces, 0, 0, spans);
}

std::string substitute_params(const std::string& template_text,
                              const std::vector<std::string>& params) {
  std::string out;
  size_t pos = 0;
  size_t param_index = 0;
  while (pos < template_text.size()) {
    if (template_text.compare(pos, 3, kPlaceholder) == 0) {
      if (param_index >= params.size())
        raise(ErrorKind::ValidationError, "not enough params for template");
      out += params[param_index++];
      pos += 3;
    } else {
      out += template_text[pos++];
    }
  }
  if (param_index != params.size())
    raise(ErrorKind::ValidationError, "too many params for template");
  return out;
}

}  // namespace logtex
