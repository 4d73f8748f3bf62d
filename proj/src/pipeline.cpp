#include "logtex/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logtex/error.hpp"
#include "logtex/table.hpp"

namespace logtex {

RunConfig RunConfig::with_derived_seeds() const {
  RunConfig derived = *this;
  derived.sampler.seed = derive_seed(seed, "sampler");
  derived.encoder.seed = derive_seed(seed, "encoder");
  derived.train.seed = derive_seed(seed, "trainer");
  return derived;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::MissingArtifact, "config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorKind::ConfigError, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t");
      size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto context = [&] { return path.string() + ":" + std::to_string(line_no); };
    auto as_bool = [&] {
      if (value == "1" || value == "true") return true;
      if (value == "0" || value == "false") return false;
      raise(ErrorKind::ConfigError, context() + ": boolean expected for " + key);
    };
    try {
      if (key == "log") config.log_path = value;
      else if (key == "truth") config.truth_path = value;
      else if (key == "format") config.format = value;
      else if (key == "out_dir") config.out_dir = value;
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "k") config.sampler.k = std::stoll(value);
      else if (key == "eta") config.sampler.eta = std::stoll(value);
      else if (key == "steps") config.train.steps = std::stoll(value);
      else if (key == "batch_size") config.train.batch_size = std::stoll(value);
      else if (key == "learning_rate") config.train.learning_rate = std::stod(value);
      else if (key == "warmup_fraction") config.train.warmup_fraction = std::stod(value);
      else if (key == "weight_decay") config.train.weight_decay = std::stod(value);
      else if (key == "vocab_size") config.tokenizer_vocab = std::stoi(value);
      else if (key == "d_model") config.encoder.d_model = std::stoi(value);
      else if (key == "n_layers") config.encoder.n_layers = std::stoi(value);
      else if (key == "n_heads") config.encoder.n_heads = std::stoi(value);
      else if (key == "d_ff") config.encoder.d_ff = std::stoi(value);
      else if (key == "max_len") config.encoder.max_len = std::stoi(value);
      else if (key == "dropout") config.encoder.dropout = std::stod(value);
      else if (key == "k_top") config.vtoken.k_top = std::stoi(value);
      else if (key == "m") config.vtoken.m = std::stoi(value);
      else if (key == "parse_batch_size") config.parse_batch_size = std::stoi(value);
      else if (key == "random_sampling") config.random_sampling = as_bool();
      else if (key == "no_virtual_token") config.no_virtual_token = as_bool();
      else raise(ErrorKind::ConfigError, context() + ": unknown key \"" + key + "\"");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      raise(ErrorKind::ConfigError, context() + ": bad value \"" + value + "\" for " + key);
    }
  }
}

void apply_env_overrides(RunConfig& config) {
  if (const char* seed = std::getenv("LOGTEX_SEED")) {
    try {
      config.seed = std::stoull(seed);
    } catch (const std::exception&) {
      raise(ErrorKind::ConfigError, "LOGTEX_SEED is not an integer");
    }
  }
  if (const char* out = std::getenv("LOGTEX_OUT")) config.out_dir = out;
}

Dataset load_run_dataset(const RunConfig& config) {
  if (config.log_path.empty()) raise(ErrorKind::ConfigError, "log path not set");
  if (!std::filesystem::exists(config.log_path))
    raise(ErrorKind::MissingArtifact, "log file " + config.log_path);
  std::optional<std::filesystem::path> truth;
  if (!config.truth_path.empty()) {
    if (!std::filesystem::exists(config.truth_path))
      raise(ErrorKind::MissingArtifact, "truth table " + config.truth_path);
    truth = config.truth_path;
  }
  return load_dataset(config.log_path, truth, parse_format_string(config.format));
}

std::vector<std::int64_t> run_sample(const RunConfig& config, const Dataset& dataset,
                                     const std::filesystem::path& sheet_path) {
  RunConfig rc = config.with_derived_seeds();
  std::vector<std::int64_t> ids =
      rc.random_sampling ? uniform_sample(dataset, rc.sampler.k, rc.sampler.seed)
                         : adaptive_sample(dataset, rc.sampler);
  if (!sheet_path.empty()) {
    std::filesystem::create_directories(sheet_path.parent_path().empty()
                                            ? std::filesystem::path(".")
                                            : sheet_path.parent_path());
    write_annotation_sheet(dataset, ids, sheet_path);
  }
  return ids;
}

TrainOutput run_train(const RunConfig& config, const Dataset& corpus,
                      const std::vector<LabeledExample>& d_train) {
  RunConfig rc = config.with_derived_seeds();
  std::filesystem::path out_dir(rc.out_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<std::string> contents;
  contents.reserve(corpus.records.size());
  for (const auto& record : corpus.records) contents.push_back(record.content);
  Tokenizer tokenizer = Tokenizer::train(contents, rc.tokenizer_vocab);

  EncoderConfig encoder_config = rc.encoder;
  encoder_config.vocab_size = tokenizer.vocab_size();
  Encoder model(encoder_config);

  VTokenConfig vtoken_config = rc.vtoken;
  vtoken_config.mean_embedding = !rc.no_virtual_token;
  VirtualTokenReport report = generate_param_token(model, tokenizer, d_train, corpus, vtoken_config);

  std::vector<TrainStepResult> curve = train(model, tokenizer, d_train, rc.train);

  TrainOutput output;
  output.vtoken_report = report;
  output.curve = curve;
  output.checkpoint_path = out_dir / "checkpoint.bin";
  output.report_path = out_dir / "vtoken_report.txt";
  output.loss_curve_path = out_dir / "loss_curve.csv";

  save_checkpoint({tokenizer, model, report.param_token_id}, output.checkpoint_path);
  write_vtoken_report(report, tokenizer, output.report_path);
  {
    Table table;
    table.header = {"step", "loss"};
    for (const auto& step : curve) {
      std::ostringstream loss;
      loss.precision(17);
      loss << step.loss;
      table.rows.push_back({std::to_string(step.step), loss.str()});
    }
    write_table(table, output.loss_curve_path);
  }
  return output;
}

ParseOutput run_parse(const Checkpoint& checkpoint, const std::vector<std::string>& messages,
                      std::int32_t batch_size) {
  Parser parser(checkpoint.model, checkpoint.tokenizer);
  ParseOutput output;
  auto start = std::chrono::steady_clock::now();
  output.results = parser.parse_batch(messages, batch_size);
  output.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return output;
}

void write_structured_output(const Dataset& dataset, const std::vector<ParseResult>& results,
                             const std::filesystem::path& path) {
  if (dataset.records.size() != results.size())
    raise(ErrorKind::ValidationError, "result count does not match dataset");
  Table table;
  table.header = {"LineId", "Content", "EventTemplate", "Parameters"};
  for (size_t i = 0; i < results.size(); ++i) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& param : results[i].params) params.push_back(param);
    table.rows.push_back({std::to_string(dataset.records[i].line_id), results[i].message,
                          results[i].template_text, params.dump()});
  }
  write_table(table, path);
}

TemplateMap read_structured_templates(const std::filesystem::path& path) {
  Table table = read_table(path);
  int id_col = table.column("LineId");
  int template_col = table.column("EventTemplate");
  if (id_col < 0 || template_col < 0)
    raise(ErrorKind::ValidationError, "structured output needs LineId and EventTemplate columns");
  TemplateMap map;
  for (const auto& row : table.rows) {
    try {
      map[std::stoll(row.at(id_col))] = row.at(template_col);
    } catch (const std::exception&) {
      raise(ErrorKind::ValidationError, "bad LineId \"" + row.at(id_col) + "\"");
    }
  }
  return map;
}

TemplateMap truth_templates(const Dataset& dataset) {
  if (!dataset.ground_truth) raise(ErrorKind::MissingArtifact, "dataset has no ground truth");
  TemplateMap map;
  for (const auto& [id, templ] : *dataset.ground_truth) map[id] = templ;
  return map;
}

EvalReport run_end_to_end(const RunConfig& config) {
  Dataset dataset = load_run_dataset(config);
  if (!dataset.ground_truth)
    raise(ErrorKind::MissingArtifact, "end-to-end run needs ground truth for auto-annotation");

  std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);
  std::filesystem::path sheet = out_dir / "annotation_sheet.csv";
  run_sample(config, dataset, sheet);
  std::vector<LabeledExample> d_train = read_annotation_sheet(sheet);

  TrainOutput trained = run_train(config, dataset, d_train);
  Checkpoint checkpoint = load_checkpoint(trained.checkpoint_path);

  std::vector<std::string> messages;
  messages.reserve(dataset.records.size());
  for (const auto& record : dataset.records) messages.push_back(record.content);
  ParseOutput parsed = run_parse(checkpoint, messages, config.parse_batch_size);
  write_structured_output(dataset, parsed.results, out_dir / "parsed.csv");

  TemplateMap pred;
  for (size_t i = 0; i < parsed.results.size(); ++i)
    pred[dataset.records[i].line_id] = parsed.results[i].template_text;
  EvalReport report = evaluate(pred, truth_templates(dataset));
  std::ofstream report_file(out_dir / "eval_report.txt", std::ios::binary);
  report_file << report.to_key_values();
  return report;
}

}  // namespace logtex
