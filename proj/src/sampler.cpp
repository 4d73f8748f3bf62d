#include "logtex/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "logtex/error.hpp"
#include "logtex/table.hpp"

namespace logtex {

namespace {

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)); }
bool is_alpha_only(const std::string& word) {
  return !word.empty() &&
         std::all_of(word.begin(), word.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

std::string to_lower(std::string word) {
  std::transform(word.begin(), word.end(), word.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return word;
}

std::vector<std::string> whitespace_split(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream stream(text);
  std::string word;
  while (stream >> word) out.push_back(word);
  return out;
}

}  // namespace

std::vector<std::string> split_camel_case(const std::string& word) {
  std::vector<std::string> parts;
  std::string current;
  for (size_t i = 0; i < word.size(); ++i) {
    char c = word[i];
    bool boundary = false;
    if (!current.empty() && is_upper(c)) {
      // camelCase: lower followed by Upper
      if (is_lower(current.back())) boundary = true;
      // acronym end: HTTPServer -> HTTP | Server
      else if (is_upper(current.back()) && i + 1 < word.size() && is_lower(word[i + 1]))
        boundary = true;
    }
    if (boundary) {
      parts.push_back(current);
      current.clear();
    }
    current += c;
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = {
      "a",      "about",  "above", "after", "again",  "all",   "an",    "and",   "any",
      "are",    "as",     "at",    "be",    "been",   "being", "below", "between", "both",
      "but",    "by",     "can",   "did",   "do",     "does",  "doing", "down",  "during",
      "each",   "few",    "for",   "from",  "had",    "has",   "have",  "having", "how",
      "if",     "in",     "into",  "is",    "it",     "its",   "just",  "more",  "most",
      "no",     "nor",    "not",   "of",    "off",    "on",    "once",  "only",  "or",
      "other",  "out",    "over",  "own",   "so",     "some",  "such",  "than",  "that",
      "the",    "their",  "them",  "then",  "there",  "these", "they",  "this",  "those",
      "through", "to",    "too",   "under", "until",  "up",    "very",  "was",   "were",
      "what",   "when",   "where", "which", "while",  "who",   "whom",  "why",   "will",
      "with",   "would",
  };
  return words;
}

CleanedLog preprocess(const std::string& message, std::int64_t source_id) {
  static const std::unordered_set<std::string> stops(stop_words().begin(), stop_words().end());
  CleanedLog cleaned;
  cleaned.org = message;
  cleaned.source_id = source_id;
  for (const auto& raw : whitespace_split(message)) {
    for (const auto& piece : split_camel_case(raw)) {
      if (!is_alpha_only(piece)) continue;
      std::string word = to_lower(piece);
      if (stops.count(word)) continue;
      cleaned.cln.push_back(std::move(word));
    }
  }
  if (cleaned.cln.empty()) cleaned.cln = whitespace_split(message);
  return cleaned;
}

double token_similarity(const CleanedLog& a, const CleanedLog& b) {
  std::set<std::string> sa(a.cln.begin(), a.cln.end());
  std::set<std::string> sb(b.cln.begin(), b.cln.end());
  if (sa.empty() && sb.empty()) return 1.0;
  size_t intersection = 0;
  for (const auto& token : sa) intersection += sb.count(token);
  size_t unions = sa.size() + sb.size() - intersection;
  return unions == 0 ? 1.0 : static_cast<double>(intersection) / static_cast<double>(unions);
}

std::vector<std::int64_t> adaptive_sample(const Dataset& dataset, const SamplerConfig& config) {
  if (config.k < 1) raise(ErrorKind::ConfigError, "K must be >= 1");
  if (config.eta < 1) raise(ErrorKind::ConfigError, "eta must be >= 1");
  if (dataset.records.empty()) raise(ErrorKind::ValidationError, "dataset is empty");

  std::vector<CleanedLog> logs;
  logs.reserve(dataset.records.size());
  std::unordered_set<std::string> distinct;
  for (const auto& record : dataset.records) {
    logs.push_back(preprocess(record.content, record.line_id));
    distinct.insert(record.content);
  }
  if (static_cast<size_t>(config.k) > distinct.size())
    raise(ErrorKind::KTooLarge, "K=" + std::to_string(config.k) + " exceeds " +
                                    std::to_string(distinct.size()) + " distinct messages");

  auto cln_key = [](const CleanedLog& log) {
    std::string key;
    for (const auto& token : log.cln) {
      key += token;
      key += '\x1f';
    }
    return key;
  };

  // Seed: shortest cleaned log, ties broken by smallest line id.
  size_t seed_index = 0;
  for (size_t i = 1; i < logs.size(); ++i) {
    if (logs[i].cln.size() < logs[seed_index].cln.size()) seed_index = i;
  }

  std::vector<size_t> selected{seed_index};
  std::unordered_set<std::string> selected_orgs{logs[seed_index].org};

  Rng rng(config.seed);
  while (selected.size() < static_cast<size_t>(config.k)) {
    // Candidate pool: eta draws, each uniform over logs whose cleaned form is
    // not already pooled and whose original is not already selected. The rng
    // is consumed exactly once per pool slot, in slot order; similarity
    // scoring below draws nothing, so evaluating it concurrently cannot
    // change results.
    std::vector<size_t> pool;
    std::unordered_set<std::string> pool_keys;
    for (std::int64_t i = 0; i < config.eta; ++i) {
      std::vector<size_t> eligible;
      for (size_t j = 0; j < logs.size(); ++j) {
        if (selected_orgs.count(logs[j].org)) continue;
        if (pool_keys.count(cln_key(logs[j]))) continue;
        eligible.push_back(j);
      }
      if (eligible.empty()) break;
      size_t pick = eligible[rng.next_below(eligible.size())];
      pool.push_back(pick);
      pool_keys.insert(cln_key(logs[pick]));
    }
    if (pool.empty()) break;  // nothing left to draw

    // Candidate whose nearest selected neighbour is least similar wins;
    // ties go to the smallest line id.
    size_t best = pool.front();
    double best_delta = 2.0;
    for (size_t candidate : pool) {
      double delta = 0.0;
      for (size_t s : selected)
        delta = std::max(delta, token_similarity(logs[candidate], logs[s]));
      if (delta < best_delta ||
          (delta == best_delta && logs[candidate].source_id < logs[best].source_id)) {
        best_delta = delta;
        best = candidate;
      }
    }
    selected.push_back(best);
    selected_orgs.insert(logs[best].org);
  }

  std::vector<std::int64_t> ids;
  ids.reserve(selected.size());
  for (size_t index : selected) ids.push_back(logs[index].source_id);
  return ids;
}

std::vector<std::int64_t> uniform_sample(const Dataset& dataset, std::int64_t k,
                                         std::uint64_t seed) {
  if (k < 1) raise(ErrorKind::ConfigError, "K must be >= 1");
  std::vector<size_t> order(dataset.records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
  std::vector<std::int64_t> ids;
  std::unordered_set<std::string> seen;
  for (size_t index : order) {
    if (ids.size() == static_cast<size_t>(k)) break;
    const auto& record = dataset.records[index];
    if (!seen.insert(record.content).second) continue;
    ids.push_back(record.line_id);
  }
  if (ids.size() < static_cast<size_t>(k))
    raise(ErrorKind::KTooLarge, "K=" + std::to_string(k) + " exceeds distinct messages");
  return ids;
}

void write_annotation_sheet(const Dataset& dataset, const std::vector<std::int64_t>& ids,
                            const std::filesystem::path& path) {
  std::unordered_map<std::int64_t, const LogRecord*> by_id;
  for (const auto& record : dataset.records) by_id[record.line_id] = &record;

  Table table;
  table.header = {"Content", "EventTemplate"};
  for (std::int64_t id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      raise(ErrorKind::ValidationError, "line id " + std::to_string(id) + " not in dataset");
    const std::string* truth = dataset.truth_for(id);
    // Prefilled with the true template when ground truth is available
    // (auto-annotation); otherwise the raw content, for the annotator to edit.
    table.rows.push_back({it->second->content, truth ? *truth : it->second->content});
  }
  write_table(table, path);
}

std::vector<LabeledExample> read_annotation_sheet(const std::filesystem::path& path) {
  Table table = read_table(path);
  int content_col = table.column("Content");
  int template_col = table.column("EventTemplate");
  if (content_col < 0 || template_col < 0)
    raise(ErrorKind::ValidationError, "annotation sheet needs Content and EventTemplate columns");

  std::vector<LabeledExample> examples;
  std::vector<std::string> bad_rows;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    LabeledExample example{row.at(content_col), row.at(template_col)};
    if (!template_matches(example.message, example.template_text)) {
      bad_rows.push_back(std::to_string(i + 2));  // 1-based, after the header row
      continue;
    }
    examples.push_back(std::move(example));
  }
  if (!bad_rows.empty()) {
    std::string rows;
    for (size_t i = 0; i < bad_rows.size(); ++i) rows += (i ? "," : "") + bad_rows[i];
    raise(ErrorKind::InvalidTemplate, "template does not match message at row(s) " + rows);
  }
  return examples;
}

}  // namespace logtex
