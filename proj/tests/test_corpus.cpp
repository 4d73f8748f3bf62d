#include <doctest.h>

#include <fstream>
#include <functional>
#include <optional>
#include <random>

#include "helpers.hpp"
#include "logtex/corpus.hpp"
#include "logtex/error.hpp"

using namespace logtex;
using logtex::testing::TempDir;

namespace {

// Exhaustive-split oracle: enumerates every placeholder end-position
// combination in lexicographic order and returns the first full match, which
// is exactly the leftmost-shortest assignment.
std::optional<std::vector<std::string>> oracle_match(const std::string& message,
                                                     const std::string& templ) {
  std::vector<std::string> literals;
  size_t placeholders = 0;
  {
    std::string current;
    for (size_t i = 0; i < templ.size();) {
      if (templ.compare(i, 3, "<*>") == 0) {
        literals.push_back(current);
        current.clear();
        ++placeholders;
        i += 3;
      } else {
        current += templ[i++];
      }
    }
    literals.push_back(current);
  }

  std::vector<std::string> params(placeholders);
  std::function<bool(size_t, size_t, size_t)> search = [&](size_t msg_pos, size_t segment,
                                                           size_t depth) {
    if (message.compare(msg_pos, literals[segment].size(), literals[segment]) != 0) return false;
    msg_pos += literals[segment].size();
    if (segment == placeholders) return msg_pos == message.size();
    for (size_t end = msg_pos + 1; end <= message.size(); ++end) {
      params[depth] = message.substr(msg_pos, end - msg_pos);
      if (search(end, segment + 1, depth + 1)) return true;
    }
    return false;
  };
  if (!search(0, 0, 0)) return std::nullopt;
  return params;
}

}  // namespace

TEST_CASE("format string parsing") {
  auto pattern = parse_format_string("<Level> <Content>");
  CHECK(pattern.field_names == std::vector<std::string>{"Level", "Content"});

  CHECK_THROWS_AS((void)parse_format_string("<Date> <Time>"), Error);
  CHECK_THROWS_AS((void)parse_format_string("<Content> <Content>"), Error);
}

TEST_CASE("header split on a spark-style line") {
  auto pattern = parse_format_string("<Date> <Time> <Level> <Component>: <Content>");
  std::map<std::string, std::string> fields;
  std::string content;
  bool ok = split_header(pattern, "17/08/22 15:50:46 INFO BlockManager: Putting block rdd_1_1 with replication took 0",
                         fields, content);
  REQUIRE(ok);
  CHECK(content == "Putting block rdd_1_1 with replication took 0");
  CHECK(fields["Level"] == "INFO");
  CHECK(fields["Component"] == "BlockManager");
  CHECK(fields["Date"] == "17/08/22");
}

TEST_CASE("load_dataset basics") {
  TempDir dir;
  {
    std::ofstream log(dir.path / "a.log");
    log << "alpha one\n\nbeta two\ngamma three\n";
  }
  auto dataset = load_dataset(dir.path / "a.log", std::nullopt, parse_format_string("<Content>"));
  CHECK(dataset.records.size() == 3);  // blank line skipped
  CHECK(dataset.records[0].line_id == 1);
  CHECK(dataset.records[2].content == "gamma three");
  CHECK_FALSE(dataset.ground_truth.has_value());

  CHECK_THROWS_AS((void)load_dataset(dir.path / "missing.log", std::nullopt,
                                     parse_format_string("<Content>")),
                  Error);
}

TEST_CASE("load_dataset with truth table and mismatched row count") {
  TempDir dir;
  {
    std::ofstream log(dir.path / "b.log");
    log << "one 1\ntwo 2\n";
    std::ofstream truth(dir.path / "b.csv");
    truth << "LineId,Content,EventTemplate\n1,one 1,one <*>\n2,two 2,two <*>\n";
  }
  auto dataset = load_dataset(dir.path / "b.log", dir.path / "b.csv", parse_format_string("<Content>"));
  REQUIRE(dataset.ground_truth.has_value());
  CHECK(dataset.ground_truth->at(2) == "two <*>");

  {
    std::ofstream truth(dir.path / "short.csv");
    truth << "LineId,Content,EventTemplate\n1,one 1,one <*>\n";
  }
  CHECK_THROWS_AS(
      (void)load_dataset(dir.path / "b.log", dir.path / "short.csv", parse_format_string("<Content>")),
      Error);
}

TEST_CASE("two-thousand-line fixture with headers and truth table") {
  TempDir dir;
  {
    std::ofstream log(dir.path / "big.log");
    std::ofstream truth(dir.path / "big.csv");
    truth << "LineId,Content,EventTemplate\n";
    for (int i = 1; i <= 2000; ++i) {
      std::string content = "written block blk_" + std::to_string(1000 + i) + " to disk";
      log << "17/08/22 15:50:" << (i % 60 < 10 ? "0" : "") << (i % 60) << " INFO DataNode: "
          << content << "\n";
      truth << i << "," << content << ",written block <*> to disk\n";
    }
  }
  auto pattern = parse_format_string("<Date> <Time> <Level> <Component>: <Content>");
  auto dataset = load_dataset(dir.path / "big.log", dir.path / "big.csv", pattern);
  CHECK(dataset.records.size() == 2000);
  REQUIRE(dataset.ground_truth.has_value());
  CHECK(dataset.ground_truth->size() == 2000);
  CHECK(dataset.header_mismatches == 0);
  CHECK(dataset.records[0].content == "written block blk_1001 to disk");
  CHECK(dataset.records[0].header_fields.at("Component") == "DataNode");
  CHECK(dataset.records[1999].line_id == 2000);
}

TEST_CASE("header mismatches keep whole line") {
  TempDir dir;
  {
    std::ofstream log(dir.path / "c.log");
    log << "INFO worker started\n"
        << "malformed-line-without-level-token\n";
  }
  auto pattern = parse_format_string("<Level> <Content>");
  auto dataset = load_dataset(dir.path / "c.log", std::nullopt, pattern);
  CHECK(dataset.records.size() == 2);
  CHECK(dataset.records[0].content == "worker started");
  CHECK(dataset.records[1].content == "malformed-line-without-level-token");
  CHECK(dataset.header_mismatches == 1);
}

TEST_CASE("quoted truth tables keep embedded delimiters") {
  TempDir dir;
  {
    std::ofstream log(dir.path / "d.log");
    log << "update a, b done\n";
    std::ofstream truth(dir.path / "d.csv");
    truth << "LineId,Content,EventTemplate\n1,\"update a, b done\",\"update <*>, <*> done\"\n";
  }
  auto dataset = load_dataset(dir.path / "d.log", dir.path / "d.csv", parse_format_string("<Content>"));
  CHECK(dataset.ground_truth->at(1) == "update <*>, <*> done");
}

TEST_CASE("match_template on the spark example") {
  auto extraction = match_template("Putting block rdd_1_1 with replication took 0",
                                   "Putting block <*> with replication took <*>");
  CHECK(extraction.params == std::vector<std::string>{"rdd_1_1", "0"});
  REQUIRE(extraction.param_spans.size() == 2);
  CHECK(extraction.param_spans[0] == std::pair<size_t, size_t>{14, 21});
}

TEST_CASE("match_template trivial and failing cases") {
  CHECK(match_template("abc", "abc").params.empty());
  CHECK_THROWS_AS((void)match_template("abc", "abd"), Error);
  CHECK_THROWS_AS((void)match_template("abc", ""), Error);
  // placeholders must match non-empty text
  CHECK_THROWS_AS((void)match_template("ab", "a<*>b"), Error);
  // intra-word placeholder
  auto core = match_template("core.2275", "core.<*>");
  CHECK(core.params == std::vector<std::string>{"2275"});
}

TEST_CASE("match_template equals the exhaustive oracle") {
  auto host = match_template("open proxy.cse.cuhk.edu.hk:5070", "open <*>:<*>");
  auto oracle = oracle_match("open proxy.cse.cuhk.edu.hk:5070", "open <*>:<*>");
  REQUIRE(oracle.has_value());
  CHECK(host.params == *oracle);

  std::mt19937 rng(99);
  const std::string alphabet = "ab:x ";
  int matched = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::string message;
    size_t len = 1 + rng() % 14;
    for (size_t i = 0; i < len; ++i) message += alphabet[rng() % alphabet.size()];
    // random template: replace up to 3 random slices with <*>
    std::string templ;
    size_t pos = 0;
    int slots = 0;
    while (pos < message.size() && slots < 3) {
      size_t start = pos + rng() % (message.size() - pos + 1);
      size_t stop = start + 1 + (start < message.size() ? rng() % (message.size() - start) : 0);
      if (start >= message.size()) break;
      templ += message.substr(pos, start - pos);
      templ += "<*>";
      ++slots;
      pos = std::min(stop, message.size());
    }
    templ += message.substr(pos);

    auto expected = oracle_match(message, templ);
    if (!expected) {
      CHECK_THROWS_AS((void)match_template(message, templ), Error);
      continue;
    }
    ++matched;
    auto got = match_template(message, templ);
    CHECK(got.params == *expected);
    // round trip
    CHECK(substitute_params(templ, got.params) == message);
  }
  CHECK(matched > 50);  // the generator must exercise real matches
}

TEST_CASE("match is deterministic") {
  auto a = match_template("x 1 2 3 y", "x <*> y");
  auto b = match_template("x 1 2 3 y", "x <*> y");
  CHECK(a.param_spans == b.param_spans);
}
