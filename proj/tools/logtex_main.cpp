// logtex: few-shot log template extraction.
//
// Pipeline: gen -> sample -> annotate -> train -> parse -> evaluate, plus
// bench to run the full loop over several datasets with shared defaults.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "logtex/checkpoint.hpp"
#include "logtex/error.hpp"
#include "logtex/pipeline.hpp"
#include "logtex/synth.hpp"
#include "logtex/table.hpp"

namespace fs = std::filesystem;
using namespace logtex;

namespace {

void add_run_options(CLI::App* cmd, RunConfig& config, std::string& config_file,
                     bool with_dataset = true) {
  if (with_dataset) {
    cmd->add_option("--log", config.log_path, "raw log file, one message per line");
    cmd->add_option("--truth", config.truth_path, "ground-truth table (LineId,Content,EventTemplate)");
    cmd->add_option("--format", config.format, "header format string")->capture_default_str();
  }
  cmd->add_option("--seed", config.seed, "run seed; every module seed derives from it")
      ->capture_default_str();
  cmd->add_option("--out-dir", config.out_dir, "artifact directory")->capture_default_str();
  // Applied before flag parsing (see main); the option exists so the flag is
  // recognized and shows up in help.
  cmd->add_option("--config", config_file, "flat key=value config file");
}

void add_train_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--steps", config.train.steps)->capture_default_str();
  cmd->add_option("--batch-size", config.train.batch_size)->capture_default_str();
  cmd->add_option("--lr", config.train.learning_rate)->capture_default_str();
  cmd->add_option("--warmup", config.train.warmup_fraction)->capture_default_str();
  cmd->add_option("--weight-decay", config.train.weight_decay)->capture_default_str();
  cmd->add_option("--vocab-size", config.tokenizer_vocab)->capture_default_str();
  cmd->add_option("--d-model", config.encoder.d_model)->capture_default_str();
  cmd->add_option("--n-layers", config.encoder.n_layers)->capture_default_str();
  cmd->add_option("--n-heads", config.encoder.n_heads)->capture_default_str();
  cmd->add_option("--d-ff", config.encoder.d_ff)->capture_default_str();
  cmd->add_option("--max-len", config.encoder.max_len)->capture_default_str();
  cmd->add_option("--encoder-dropout", config.encoder.dropout)->capture_default_str();
  cmd->add_option("--k-top", config.vtoken.k_top, "predictions kept per parameter position")
      ->capture_default_str();
  cmd->add_option("--m", config.vtoken.m, "label tokens used for the PARAM embedding")
      ->capture_default_str();
  cmd->add_flag("--no-virtual-token", config.no_virtual_token,
                "ablation: default PARAM init instead of the mean embedding");
}

TemplateMap truth_table_templates(const fs::path& path) {
  Table table = read_table(path);
  int id_col = table.column("LineId");
  int template_col = table.column("EventTemplate");
  if (id_col < 0 || template_col < 0)
    raise(ErrorKind::ValidationError, "truth table needs LineId and EventTemplate columns");
  TemplateMap map;
  for (const auto& row : table.rows) map[std::stoll(row.at(id_col))] = row.at(template_col);
  return map;
}

std::string format_metric(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

int cmd_gen(const RunConfig& config) {
  GeneratorSpec spec = default_generator_spec(derive_seed(config.seed, "synth"));
  Dataset dataset = generate(spec);
  write_dataset(dataset, config.out_dir, "synthetic");
  std::cout << "wrote " << dataset.records.size() << " messages to " << config.out_dir << "\n";
  return 0;
}

int cmd_sample(RunConfig& config, const std::string& sheet, bool random_sampling) {
  config.random_sampling = random_sampling;
  Dataset dataset = load_run_dataset(config);
  auto ids = run_sample(config, dataset, sheet);
  std::cout << "sampled " << ids.size() << " messages -> " << sheet << "\n";
  return 0;
}

int cmd_annotate(const std::string& sheet) {
  if (!fs::exists(sheet)) raise(ErrorKind::MissingArtifact, "annotation sheet " + sheet);
  auto examples = read_annotation_sheet(sheet);
  std::cout << "annotation sheet valid: " << examples.size() << " labeled examples\n";
  return 0;
}

int cmd_train(RunConfig& config, const std::string& sheet) {
  if (!fs::exists(sheet)) raise(ErrorKind::MissingArtifact, "annotation sheet " + sheet);
  Dataset corpus = load_run_dataset(config);
  auto d_train = read_annotation_sheet(sheet);
  if (d_train.empty()) raise(ErrorKind::ValidationError, "annotation sheet has no rows");
  TrainOutput output = run_train(config, corpus, d_train);
  std::cout << "checkpoint: " << output.checkpoint_path.string() << "\n"
            << "vtoken report: " << output.report_path.string() << "\n"
            << "loss curve: " << output.loss_curve_path.string() << " (final "
            << output.curve.back().loss << ")\n";
  return 0;
}

int cmd_parse(RunConfig& config, const std::string& checkpoint_path, const std::string& out_path,
              const std::string& time_report) {
  if (!fs::exists(checkpoint_path)) raise(ErrorKind::MissingArtifact, "checkpoint " + checkpoint_path);
  Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  Dataset dataset = load_run_dataset(config);
  std::vector<std::string> messages;
  messages.reserve(dataset.records.size());
  for (const auto& record : dataset.records) messages.push_back(record.content);
  ParseOutput output = run_parse(checkpoint, messages, config.parse_batch_size);
  write_structured_output(dataset, output.results, out_path);
  if (!time_report.empty()) {
    std::ofstream report(time_report, std::ios::binary | std::ios::app);
    report << messages.size() << "," << output.seconds << "\n";
  }
  std::cout << "parsed " << messages.size() << " messages in " << output.seconds << " s -> "
            << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& out_path) {
  if (!fs::exists(pred_path)) raise(ErrorKind::MissingArtifact, "parsed output " + pred_path);
  if (!fs::exists(truth_path)) raise(ErrorKind::MissingArtifact, "truth table " + truth_path);
  TemplateMap pred = read_structured_templates(pred_path);
  TemplateMap truth = truth_table_templates(truth_path);
  EvalReport report = evaluate(pred, truth);
  std::cout << report.to_key_values();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << report.to_key_values();
  }
  return 0;
}

int cmd_bench(RunConfig& base, const std::string& list_path) {
  if (!fs::exists(list_path)) raise(ErrorKind::MissingArtifact, "dataset list " + list_path);
  Table list = read_table(list_path);
  int name_col = list.column("Name");
  int log_col = list.column("Log");
  int truth_col = list.column("Truth");
  if (name_col < 0 || log_col < 0 || truth_col < 0)
    raise(ErrorKind::ValidationError, "dataset list needs Name,Log,Truth columns");

  Table summary;
  summary.header = {"Dataset", "GA", "PA", "EDMedian", "EDMean", "UnseenPA", "UnseenCount", "Messages"};
  double ga_sum = 0, pa_sum = 0, med_sum = 0, mean_sum = 0;
  fs::path out_root(base.out_dir);
  for (const auto& row : list.rows) {
    RunConfig config = base;
    config.log_path = row.at(log_col);
    config.truth_path = row.at(truth_col);
    config.out_dir = (out_root / row.at(name_col)).string();
    EvalReport report = run_end_to_end(config);
    summary.rows.push_back({row.at(name_col), format_metric(report.ga), format_metric(report.pa),
                            format_metric(report.ed_median), format_metric(report.ed_mean),
                            report.unseen_pa ? format_metric(*report.unseen_pa) : "",
                            std::to_string(report.unseen_count),
                            std::to_string(report.n_messages)});
    ga_sum += report.ga;
    pa_sum += report.pa;
    med_sum += report.ed_median;
    mean_sum += report.ed_mean;
    std::cout << row.at(name_col) << ": GA=" << format_metric(report.ga)
              << " PA=" << format_metric(report.pa) << " ED=" << format_metric(report.ed_median)
              << "\n";
  }
  const double n = static_cast<double>(list.rows.size());
  summary.rows.push_back({"average", format_metric(ga_sum / n), format_metric(pa_sum / n),
                          format_metric(med_sum / n), format_metric(mean_sum / n), "", "", ""});
  fs::create_directories(out_root);
  write_table(summary, out_root / "summary.csv");
  std::cout << "summary: " << (out_root / "summary.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot log template extraction"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_file;
  std::string sheet = "annotation_sheet.csv";
  std::string checkpoint_path = "out/checkpoint.bin";
  std::string parse_out = "parsed.csv";
  std::string time_report;
  std::string pred_path, truth_path, report_out;
  std::string dataset_list;
  bool random_sampling = false;

  // defaults < config file < environment < explicit flags
  try {
    for (int i = 1; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) apply_config_file(config, argv[i + 1]);
      else if (arg.rfind("--config=", 0) == 0) apply_config_file(config, arg.substr(9));
    }
    apply_env_overrides(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }

  auto* gen = app.add_subcommand("gen", "generate the default synthetic dataset");
  add_run_options(gen, config, config_file, false);

  auto* sample = app.add_subcommand("sample", "select K diverse messages for labeling");
  add_run_options(sample, config, config_file);
  sample->add_option("--k", config.sampler.k, "samples to select")->capture_default_str();
  sample->add_option("--eta", config.sampler.eta, "candidate pool size per round")
      ->capture_default_str();
  sample->add_flag("--random", random_sampling, "ablation: uniform random sampling");
  sample->add_option("--sheet", sheet, "annotation sheet to write")->capture_default_str();

  auto* annotate = app.add_subcommand("annotate", "validate an edited annotation sheet");
  annotate->add_option("--sheet", sheet, "annotation sheet to check")->capture_default_str();

  auto* train = app.add_subcommand("train", "tune the encoder on the annotation sheet");
  add_run_options(train, config, config_file);
  add_train_options(train, config);
  train->add_option("--sheet", sheet, "validated annotation sheet")->capture_default_str();

  auto* parse = app.add_subcommand("parse", "extract templates with a trained checkpoint");
  add_run_options(parse, config, config_file);
  parse->add_option("--checkpoint", checkpoint_path)->capture_default_str();
  parse->add_option("--out", parse_out, "structured output table")->capture_default_str();
  parse->add_option("--batch-size", config.parse_batch_size)->capture_default_str();
  parse->add_option("--time-report", time_report, "append messages,seconds to this file");

  auto* evaluate = app.add_subcommand("evaluate", "score structured output against ground truth");
  evaluate->add_option("--pred", pred_path, "structured output table")->required();
  evaluate->add_option("--truth", truth_path, "ground-truth table")->required();
  evaluate->add_option("--out", report_out, "report file (key=value lines)");

  auto* bench = app.add_subcommand("bench", "run the full pipeline over a dataset list");
  add_run_options(bench, config, config_file);
  add_train_options(bench, config);
  bench->add_option("--k", config.sampler.k, "samples per dataset")->capture_default_str();
  bench->add_option("--eta", config.sampler.eta)->capture_default_str();
  bench->add_flag("--random", random_sampling, "ablation: uniform random sampling");
  bench->add_option("--datasets", dataset_list, "table with Name,Log,Truth columns")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(config);
    if (sample->parsed()) return cmd_sample(config, sheet, random_sampling);
    if (annotate->parsed()) return cmd_annotate(sheet);
    if (train->parsed()) return cmd_train(config, sheet);
    if (parse->parsed()) return cmd_parse(config, checkpoint_path, parse_out, time_report);
    if (evaluate->parsed()) return cmd_evaluate(pred_path, truth_path, report_out);
    if (bench->parsed()) {
      config.random_sampling = random_sampling;
      return cmd_bench(config, dataset_list);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
