// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Oracles here are written independently of the library code they check.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logtex/checkpoint.hpp"
#include "logtex/metrics.hpp"
#include "logtex/pipeline.hpp"
#include "logtex/synth.hpp"

using namespace logtex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int criterion;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

void report(int criterion, bool pass, const std::string& detail) {
  outcomes.push_back({criterion, pass, detail});
  std::printf("criterion %2d: %s  (%s)\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("logtex_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

// ---------------------------------------------------------------- criterion 1

double oracle_ga(const TemplateMap& pred, const TemplateMap& truth) {
  std::int64_t correct = 0;
  for (const auto& [id, templ] : pred) {
    std::set<std::int64_t> pg, tg;
    for (const auto& [o, ot] : pred)
      if (ot == templ) pg.insert(o);
    for (const auto& [o, ot] : truth)
      if (ot == truth.at(id)) tg.insert(o);
    if (pg == tg) ++correct;
  }
  return double(correct) / double(pred.size());
}

std::int64_t oracle_ed(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::int64_t>> dp(a.size() + 1, std::vector<std::int64_t>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) dp[i][0] = i;
  for (size_t j = 0; j <= b.size(); ++j) dp[0][j] = j;
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                           dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return dp[a.size()][b.size()];
}

double oracle_pa(const TemplateMap& pred, const TemplateMap& truth) {
  std::int64_t correct = 0;
  for (const auto& [id, templ] : pred)
    if (postprocess(templ) == postprocess(truth.at(id))) ++correct;
  return double(correct) / double(pred.size());
}

void criterion_1() {
  double start = now_seconds();
  // hand-built 10-message fixture: one truth group of 4 split 2+2, six
  // messages parsed exactly, one of them with a near-miss template
  TemplateMap truth, pred;
  for (int i = 1; i <= 4; ++i) truth[i] = "mount volume <*>";
  pred[1] = pred[2] = "mount volume <*>";
  pred[3] = pred[4] = "mount <*> volume";
  truth[5] = truth[6] = "sync done in <*> ms";
  pred[5] = pred[6] = "sync done in <*> ms";
  truth[7] = "link down";
  pred[7] = "link down";
  truth[8] = "link up";
  pred[8] = "link up";
  truth[9] = "reboot after <*> failures";
  pred[9] = "reboot after <*> <*> failures";  // extra placeholder run survives postprocess
  truth[10] = "user <*> expired";
  pred[10] = "user <*> expired";

  EvalReport report_values = evaluate(pred, truth);

  bool ok = true;
  std::ostringstream detail;
  double ga = oracle_ga(pred, truth);
  double pa = oracle_pa(pred, truth);
  ok &= report_values.ga == ga;
  ok &= report_values.pa == pa;

  std::vector<std::int64_t> eds;
  double ed_total = 0;
  for (const auto& [id, templ] : pred) {
    auto d = oracle_ed(postprocess(templ), postprocess(truth.at(id)));
    eds.push_back(d);
    ed_total += double(d);
  }
  std::sort(eds.begin(), eds.end());
  double ed_median = 0.5 * double(eds[4] + eds[5]);
  double ed_mean = ed_total / 10.0;
  ok &= report_values.ed_median == ed_median;
  ok &= report_values.ed_mean == ed_mean;

  // unseen slice: truth templates occurring once are ids 7..10
  TemplateMap pred_slice, truth_slice;
  for (int i = 7; i <= 10; ++i) {
    pred_slice[i] = pred[i];
    truth_slice[i] = truth[i];
  }
  ok &= report_values.unseen_count == 4;
  ok &= report_values.unseen_pa.has_value() &&
        *report_values.unseen_pa == oracle_pa(pred_slice, truth_slice);

  // spot expectations of the fixture itself: the split group zeroes GA for
  // ids 1..4, and ids 3,4 are the only wrong template strings
  ok &= ga == 0.6;
  ok &= pa == 0.8;

  double elapsed = now_seconds() - start;
  ok &= elapsed < 1.0;
  detail << "GA=" << report_values.ga << " PA=" << report_values.pa
         << " EDmed=" << report_values.ed_median << " EDmean=" << report_values.ed_mean
         << " unseen=" << report_values.unseen_pa.value_or(-1) << " in " << elapsed << "s";
  report(1, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 2

std::vector<std::int64_t> transliterated_sampling(const Dataset& dataset, std::int64_t k,
                                                  std::int64_t eta, std::uint64_t seed) {
  std::vector<CleanedLog> l_hat;
  for (const auto& record : dataset.records)
    l_hat.push_back(preprocess(record.content, record.line_id));

  size_t shortest = 0;
  for (size_t i = 1; i < l_hat.size(); ++i)
    if (l_hat[i].cln.size() < l_hat[shortest].cln.size()) shortest = i;
  std::vector<size_t> s{shortest};

  auto key = [](const CleanedLog& log) {
    std::string out;
    for (const auto& token : log.cln) {
      out += token;
      out += '\x1f';
    }
    return out;
  };

  Rng rng(seed);
  for (std::int64_t remaining = k; remaining > 1;) {
    std::vector<size_t> pool;
    std::set<std::string> pool_keys, selected_orgs;
    for (size_t index : s) selected_orgs.insert(l_hat[index].org);
    for (std::int64_t i = 0; i < eta; ++i) {
      std::vector<size_t> eligible;
      for (size_t j = 0; j < l_hat.size(); ++j)
        if (!selected_orgs.count(l_hat[j].org) && !pool_keys.count(key(l_hat[j])))
          eligible.push_back(j);
      if (eligible.empty()) break;
      size_t chosen = eligible[rng.next_below(eligible.size())];
      pool.push_back(chosen);
      pool_keys.insert(key(l_hat[chosen]));
    }
    if (pool.empty()) break;
    size_t best = 0;
    double best_delta = 3.0;
    for (size_t i = 0; i < pool.size(); ++i) {
      double delta = 0.0;
      for (size_t index : s)
        delta = std::max(delta, token_similarity(l_hat[pool[i]], l_hat[index]));
      if (delta < best_delta || (delta == best_delta && l_hat[pool[i]].source_id <
                                                            l_hat[pool[best]].source_id)) {
        best_delta = delta;
        best = i;
      }
    }
    s.push_back(pool[best]);
    --remaining;
  }
  std::vector<std::int64_t> ids;
  for (size_t index : s) ids.push_back(l_hat[index].source_id);
  return ids;
}

void criterion_2() {
  double start = now_seconds();
  std::vector<std::string> messages;
  const char* stems[] = {"request served from cache in", "replica sync lag exceeded",
                         "login denied for account", "partition rebalanced onto broker"};
  for (int i = 0; i < 60; ++i)
    messages.push_back(std::string(stems[i % 4]) + " v" + std::to_string(i));
  Dataset dataset;
  for (size_t i = 0; i < messages.size(); ++i)
    dataset.records.push_back({std::int64_t(i + 1), messages[i], {}});

  bool ok = true;
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SamplerConfig config;
    config.k = 1 + std::int64_t(seed % 4);
    config.eta = 9;
    config.seed = seed;
    auto expected = transliterated_sampling(dataset, config.k, config.eta, seed);
    auto got = adaptive_sample(dataset, config);
    if (got != expected) ++mismatches;
  }
  ok &= mismatches == 0;
  double elapsed = now_seconds() - start;
  ok &= elapsed < 5.0;
  std::ostringstream detail;
  detail << "50 seeds, K in 1..4, mismatches=" << mismatches << " in " << elapsed << "s";
  report(2, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 3

double min_pairwise_similarity(const Dataset& dataset, const std::vector<std::int64_t>& ids) {
  std::vector<CleanedLog> logs;
  for (auto id : ids) logs.push_back(preprocess(dataset.records[id - 1].content, id));
  double lowest = 1.0;
  for (size_t i = 0; i < logs.size(); ++i)
    for (size_t j = i + 1; j < logs.size(); ++j)
      lowest = std::min(lowest, token_similarity(logs[i], logs[j]));
  return lowest;
}

void criterion_3() {
  auto dataset = generate(default_generator_spec(404));
  std::vector<double> adaptive_values, uniform_values;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplerConfig config;
    config.k = 16;
    config.eta = 32;
    config.seed = seed;
    adaptive_values.push_back(min_pairwise_similarity(dataset, adaptive_sample(dataset, config)));
    uniform_values.push_back(min_pairwise_similarity(dataset, uniform_sample(dataset, 16, seed)));
  }
  auto median = [](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return 0.5 * (values[values.size() / 2 - 1] + values[values.size() / 2]);
  };
  double adaptive_median = median(adaptive_values);
  double uniform_median = median(uniform_values);
  bool ok = adaptive_median <= uniform_median;
  std::ostringstream detail;
  detail << "min-pairwise-jaccard medians over 20 seeds: adaptive=" << adaptive_median
         << " uniform=" << uniform_median;
  report(3, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 4

void criterion_4() {
  EncoderConfig config;
  config.vocab_size = 300;
  config.d_model = 32;
  config.n_layers = 2;
  config.n_heads = 4;
  config.d_ff = 128;
  config.max_len = 64;
  config.dropout = 0.0;
  config.seed = 2024;
  Encoder model(config);

  std::vector<TokenId> ids(14);
  std::iota(ids.begin(), ids.end(), 30);
  auto targets = ids;
  targets[2] = 280;
  targets[7] = 280;
  targets[12] = 280;

  double worst = 0.0;
  for (std::uint64_t probe_seed : {11ULL, 22ULL, 33ULL})
    worst = std::max(worst, model.grad_check(ids, targets, 12, probe_seed));
  bool ok = worst < 1e-4;
  std::ostringstream detail;
  detail << "max relative error " << worst << " over 3x12 probes per tensor";
  report(4, ok, detail.str());
}

// ------------------------------------------------------- criteria 5 and 6

struct EndToEnd {
  EvalReport report;
  EvalReport rerun;
  double seconds = 0.0;
  fs::path checkpoint;
  fs::path corpus_dir;
};

const EndToEnd& end_to_end() {
  static EndToEnd cached = [] {
    EndToEnd result;
    result.corpus_dir = work_dir() / "corpus";
    Dataset dataset = generate(default_generator_spec(derive_seed(7, "synth")));
    write_dataset(dataset, result.corpus_dir, "synthetic");

    RunConfig config;
    config.log_path = (result.corpus_dir / "synthetic.log").string();
    config.truth_path = (result.corpus_dir / "synthetic_templates.csv").string();
    config.sampler.k = 16;
    config.out_dir = (work_dir() / "run_a").string();
    config.seed = 7;

    double start = now_seconds();
    result.report = run_end_to_end(config);
    result.seconds = now_seconds() - start;
    result.checkpoint = fs::path(config.out_dir) / "checkpoint.bin";

    config.out_dir = (work_dir() / "run_b").string();
    result.rerun = run_end_to_end(config);
    return result;
  }();
  return cached;
}

void criterion_5() {
  const auto& e2e = end_to_end();
  bool ok = true;
  ok &= e2e.report.pa >= 0.90;
  ok &= e2e.report.ga >= 0.90;
  ok &= e2e.report.ed_median <= 2.0;
  ok &= e2e.seconds < 600.0;
  bool deterministic = e2e.report.ga == e2e.rerun.ga && e2e.report.pa == e2e.rerun.pa &&
                       e2e.report.ed_median == e2e.rerun.ed_median &&
                       e2e.report.ed_mean == e2e.rerun.ed_mean &&
                       e2e.report.unseen_pa == e2e.rerun.unseen_pa;
  ok &= deterministic;
  std::ostringstream detail;
  detail << "GA=" << e2e.report.ga << " PA=" << e2e.report.pa << " EDmed=" << e2e.report.ed_median
         << " wall=" << e2e.seconds << "s deterministic=" << (deterministic ? "yes" : "no");
  report(5, ok, detail.str());
}

void criterion_6() {
  const auto& e2e = end_to_end();
  bool ok = e2e.report.unseen_count == 3 && e2e.report.unseen_pa.has_value() &&
            *e2e.report.unseen_pa >= 0.6;
  std::ostringstream detail;
  detail << "unseen templates=" << e2e.report.unseen_count
         << " unseen-PA=" << (e2e.report.unseen_pa ? *e2e.report.unseen_pa : -1.0);
  report(6, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 7

// Compact configuration shared by the ablation and throughput criteria.
RunConfig compact_config(const fs::path& corpus_dir, const fs::path& out_dir, std::uint64_t seed,
                         bool no_virtual_token) {
  RunConfig config;
  config.log_path = (corpus_dir / "synthetic.log").string();
  config.truth_path = (corpus_dir / "synthetic_templates.csv").string();
  config.sampler.k = 16;
  config.tokenizer_vocab = 600;
  config.encoder.d_model = 48;
  config.encoder.n_layers = 2;
  config.encoder.n_heads = 4;
  config.encoder.d_ff = 192;
  config.train.steps = 120;
  config.no_virtual_token = no_virtual_token;
  config.out_dir = out_dir.string();
  config.seed = seed;
  return config;
}

void criterion_7() {
  const auto& e2e = end_to_end();  // reuse the corpus files
  double enabled_total = 0.0, ablated_total = 0.0;
  std::ostringstream detail;
  detail.precision(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto enabled = run_end_to_end(
        compact_config(e2e.corpus_dir, work_dir() / ("vt_on_" + std::to_string(seed)), seed, false));
    auto ablated = run_end_to_end(
        compact_config(e2e.corpus_dir, work_dir() / ("vt_off_" + std::to_string(seed)), seed, true));
    enabled_total += enabled.pa;
    ablated_total += ablated.pa;
  }
  double enabled_mean = enabled_total / 5.0;
  double ablated_mean = ablated_total / 5.0;
  bool ok = ablated_mean <= enabled_mean;
  detail << "mean PA over 5 seeds: with-mean-init=" << enabled_mean
         << " ablated=" << ablated_mean;
  report(7, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 8

void criterion_8() {
  const auto& e2e = end_to_end();
  Checkpoint compact = [&] {
    auto config = compact_config(e2e.corpus_dir, work_dir() / "throughput_model", 3, false);
    Dataset corpus = load_run_dataset(config);
    fs::path sheet = work_dir() / "throughput_model" / "sheet.csv";
    run_sample(config, corpus, sheet);
    auto output = run_train(config, corpus, read_annotation_sheet(sheet));
    return load_checkpoint(output.checkpoint_path);
  }();

  // forward-call counter: exactly one forward per message
  Parser parser(compact.model, compact.tokenizer);
  std::vector<std::string> probe_messages;
  for (int i = 0; i < 257; ++i)
    probe_messages.push_back("Connection from 10.0.0." + std::to_string(i % 250) +
                             ":1024 closed after " + std::to_string(i) + " ms");
  compact.model.reset_forward_calls();
  parser.parse_batch(probe_messages, 32);
  bool one_pass = compact.model.forward_calls() == std::int64_t(probe_messages.size());

  // throughput linearity over rising volumes
  std::vector<std::int64_t> volumes{10000, 25000, 50000, 100000};
  std::vector<double> times;
  for (std::int64_t volume : volumes) {
    GeneratorSpec spec = default_generator_spec(derive_seed(900 + volume, "synth"));
    for (auto& templ : spec.templates) templ.count = templ.count * volume / 2000;
    Dataset big = generate(spec);
    std::vector<std::string> messages;
    messages.reserve(big.records.size());
    for (const auto& record : big.records) messages.push_back(record.content);
    double start = now_seconds();
    parser.parse_batch(messages, 32);
    times.push_back(now_seconds() - start);
  }

  // least-squares line fit, R^2
  double n = double(volumes.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < volumes.size(); ++i) {
    sx += double(volumes[i]);
    sy += times[i];
    sxx += double(volumes[i]) * double(volumes[i]);
    sxy += double(volumes[i]) * times[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean_y = sy / n;
  for (size_t i = 0; i < volumes.size(); ++i) {
    double fit = intercept + slope * double(volumes[i]);
    ss_res += (times[i] - fit) * (times[i] - fit);
    ss_tot += (times[i] - mean_y) * (times[i] - mean_y);
  }
  double r2 = 1.0 - ss_res / ss_tot;

  bool ok = one_pass && r2 >= 0.98;
  std::ostringstream detail;
  detail.precision(4);
  detail << "one-pass=" << (one_pass ? "yes" : "no") << " R2=" << r2 << " times(s):";
  for (double t : times) detail << " " << t;
  report(8, ok, detail.str());
}

// ---------------------------------------------------------------- criterion 9

void criterion_9() {
  bool ok = true;
  std::ostringstream detail;

  // tokenizer round trip on random byte strings
  auto dataset = generate(default_generator_spec(55));
  std::vector<std::string> contents;
  for (const auto& record : dataset.records) contents.push_back(record.content);
  Tokenizer tokenizer = Tokenizer::train(contents, 600);
  std::mt19937_64 rng(987);
  int round_trip_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string bytes;
    size_t len = rng() % 40;
    for (size_t i = 0; i < len; ++i) bytes += char(rng() % 256);
    auto sequence = tokenizer.encode(bytes);
    if (tokenizer.decode(sequence.ids) != bytes) ++round_trip_failures;
  }
  ok &= round_trip_failures == 0;

  // checkpoint identity via bit-identical parse results
  const auto& e2e = end_to_end();
  Checkpoint first = load_checkpoint(e2e.checkpoint);
  fs::path resaved_path = work_dir() / "resaved.bin";
  save_checkpoint(first, resaved_path);
  Checkpoint second = load_checkpoint(resaved_path);
  Parser parser_a(first.model, first.tokenizer);
  Parser parser_b(second.model, second.tokenizer);
  int parse_mismatches = 0;
  for (size_t i = 0; i < 200; ++i) {
    const auto& message = dataset.records[i * 7 % dataset.records.size()].content;
    auto a = parser_a.parse_message(message);
    auto b = parser_b.parse_message(message);
    if (a.template_text != b.template_text || a.params != b.params) ++parse_mismatches;
  }
  ok &= parse_mismatches == 0;

  // postprocess idempotence on random placeholder strings
  const std::vector<std::string> pieces{"<*>", " ", "x", "yz", "<", "*", ">", "  ", "\t"};
  int idempotence_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s;
    size_t len = rng() % 14;
    for (size_t i = 0; i < len; ++i) s += pieces[rng() % pieces.size()];
    std::string once = postprocess(s);
    if (postprocess(once) != once) ++idempotence_failures;
  }
  ok &= idempotence_failures == 0;

  detail << "round-trip failures=" << round_trip_failures
         << " parse mismatches=" << parse_mismatches
         << " idempotence failures=" << idempotence_failures;
  report(9, ok, detail.str());
}

// --------------------------------------------------------------- criterion 10

void criterion_10() {
  RunConfig config;
  bool ok = true;
  ok &= config.train.learning_rate == 5e-5;
  ok &= config.train.batch_size == 8;
  ok &= config.train.steps == 200;
  ok &= config.train.warmup_fraction == 0.10;
  ok &= config.parse_batch_size == 32;
  ok &= config.vtoken.m == 8;
  ok &= config.sampler.k == 32;
  ok &= config.sampler.eta == 32;
  report(10, ok,
         "lr=5e-5 batch=8 steps=200 warmup=0.10 parse_batch=32 m=8 K=32 eta=32 defaults");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10},
  };
  for (auto& [number, run] : criteria) {
    if (only != 0 && number != only) continue;
    try {
      run();
    } catch (const std::exception& e) {
      report(number, false, std::string("exception: ") + e.what());
    }
  }
  int failed = 0;
  for (const auto& outcome : outcomes)
    if (!outcome.pass) ++failed;
  std::printf("%zu criteria run, %d failed\n", outcomes.size(), failed);
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  return failed == 0 ? 0 : 1;
}
