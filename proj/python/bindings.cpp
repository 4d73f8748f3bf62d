#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "logtex/checkpoint.hpp"
#include "logtex/error.hpp"
#include "logtex/metrics.hpp"
#include "logtex/pipeline.hpp"
#include "logtex/sampler.hpp"
#include "logtex/synth.hpp"
#include "logtex/tokenizer.hpp"

namespace py = pybind11;
using namespace logtex;

PYBIND11_MODULE(_logtex, m) {
  m.doc() = "few-shot log template extraction";

  py::register_exception<Error>(m, "LogtexError");

  py::class_<LogRecord>(m, "LogRecord")
      .def_readonly("line_id", &LogRecord::line_id)
      .def_readonly("content", &LogRecord::content)
      .def_readonly("header_fields", &LogRecord::header_fields);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("name", &Dataset::name)
      .def_readonly("records", &Dataset::records)
      .def_readonly("ground_truth", &Dataset::ground_truth)
      .def("__len__", [](const Dataset& d) { return d.records.size(); });

  py::class_<ParamExtraction>(m, "ParamExtraction")
      .def_readonly("template_text", &ParamExtraction::template_text)
      .def_readonly("param_spans", &ParamExtraction::param_spans)
      .def_readonly("params", &ParamExtraction::params);

  py::class_<ParseResult>(m, "ParseResult")
      .def_readonly("message", &ParseResult::message)
      .def_readonly("template_text", &ParseResult::template_text)
      .def_readonly("params", &ParseResult::params);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("ga", &EvalReport::ga)
      .def_readonly("pa", &EvalReport::pa)
      .def_readonly("ed_median", &EvalReport::ed_median)
      .def_readonly("ed_mean", &EvalReport::ed_mean)
      .def_readonly("unseen_pa", &EvalReport::unseen_pa)
      .def_readonly("unseen_count", &EvalReport::unseen_count)
      .def_readonly("n_messages", &EvalReport::n_messages)
      .def("__repr__", [](const EvalReport& r) {
        return "EvalReport(ga=" + std::to_string(r.ga) + ", pa=" + std::to_string(r.pa) +
               ", ed_median=" + std::to_string(r.ed_median) + ")";
      });

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("k", &SamplerConfig::k)
      .def_readwrite("eta", &SamplerConfig::eta)
      .def_readwrite("seed", &SamplerConfig::seed);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("steps", &TrainConfig::steps)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("warmup_fraction", &TrainConfig::warmup_fraction)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<EncoderConfig>(m, "EncoderConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &EncoderConfig::vocab_size)
      .def_readwrite("d_model", &EncoderConfig::d_model)
      .def_readwrite("n_layers", &EncoderConfig::n_layers)
      .def_readwrite("n_heads", &EncoderConfig::n_heads)
      .def_readwrite("d_ff", &EncoderConfig::d_ff)
      .def_readwrite("max_len", &EncoderConfig::max_len)
      .def_readwrite("dropout", &EncoderConfig::dropout)
      .def_readwrite("seed", &EncoderConfig::seed);

  py::class_<VTokenConfig>(m, "VTokenConfig")
      .def(py::init<>())
      .def_readwrite("k_top", &VTokenConfig::k_top)
      .def_readwrite("m", &VTokenConfig::m)
      .def_readwrite("mean_embedding", &VTokenConfig::mean_embedding);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("log_path", &RunConfig::log_path)
      .def_readwrite("truth_path", &RunConfig::truth_path)
      .def_readwrite("format", &RunConfig::format)
      .def_readwrite("sampler", &RunConfig::sampler)
      .def_readwrite("train", &RunConfig::train)
      .def_readwrite("encoder", &RunConfig::encoder)
      .def_readwrite("vtoken", &RunConfig::vtoken)
      .def_readwrite("tokenizer_vocab", &RunConfig::tokenizer_vocab)
      .def_readwrite("parse_batch_size", &RunConfig::parse_batch_size)
      .def_readwrite("random_sampling", &RunConfig::random_sampling)
      .def_readwrite("no_virtual_token", &RunConfig::no_virtual_token)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("seed", &RunConfig::seed);

  py::enum_<SlotKind>(m, "SlotKind")
      .value("Number", SlotKind::Number)
      .value("BlockId", SlotKind::BlockId)
      .value("Hex", SlotKind::Hex)
      .value("HostPort", SlotKind::HostPort)
      .value("Path", SlotKind::Path)
      .value("TaskId", SlotKind::TaskId)
      .value("User", SlotKind::User)
      .value("Duration", SlotKind::Duration);

  py::class_<SynthTemplate>(m, "SynthTemplate")
      .def(py::init([](std::string text, std::vector<SlotKind> slots, std::int64_t count) {
             return SynthTemplate{std::move(text), std::move(slots), count};
           }),
           py::arg("text"), py::arg("slots"), py::arg("count"))
      .def_readwrite("text", &SynthTemplate::text)
      .def_readwrite("slots", &SynthTemplate::slots)
      .def_readwrite("count", &SynthTemplate::count);

  py::class_<GeneratorSpec>(m, "GeneratorSpec")
      .def(py::init<>())
      .def_readwrite("templates", &GeneratorSpec::templates)
      .def_readwrite("seed", &GeneratorSpec::seed);

  py::class_<Tokenizer>(m, "Tokenizer")
      .def_static(
          "train",
          [](const std::vector<std::string>& corpus, std::int32_t vocab_size) {
            return Tokenizer::train(corpus, vocab_size);
          },
          py::arg("corpus"), py::arg("vocab_size"))
      .def_property_readonly("vocab_size", &Tokenizer::vocab_size)
      .def(
          "encode",
          [](const Tokenizer& tokenizer, const std::string& text) {
            auto sequence = tokenizer.encode(text);
            return std::make_pair(sequence.ids, sequence.offsets);
          },
          py::arg("text"), "returns (ids, byte offsets)")
      .def(
          "decode",
          [](const Tokenizer& tokenizer, const std::vector<TokenId>& ids) {
            return py::bytes(tokenizer.decode(ids));
          },
          py::arg("ids"));

  py::class_<Checkpoint>(m, "Checkpoint");

  py::class_<Parser>(m, "Parser")
      .def(py::init([](const Checkpoint& checkpoint) {
             return new Parser(checkpoint.model, checkpoint.tokenizer);
           }),
           py::keep_alive<1, 2>(), py::arg("checkpoint"))
      .def("parse_message", &Parser::parse_message, py::arg("message"))
      .def("parse_batch", &Parser::parse_batch, py::arg("messages"), py::arg("batch_size") = 32);

  m.def("default_generator_spec", &default_generator_spec, py::arg("seed") = 0);
  m.def("generate", &generate, py::arg("spec"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("directory"), py::arg("name"));

  m.def(
      "load_dataset",
      [](const std::filesystem::path& log, std::optional<std::filesystem::path> truth,
         const std::string& format) {
        return load_dataset(log, truth, parse_format_string(format));
      },
      py::arg("log"), py::arg("truth") = std::nullopt, py::arg("format") = "<Content>");

  m.def(
      "preprocess", [](const std::string& message) { return preprocess(message).cln; },
      py::arg("message"));
  m.def(
      "token_similarity",
      [](const std::string& a, const std::string& b) {
        return token_similarity(preprocess(a), preprocess(b));
      },
      py::arg("a"), py::arg("b"));
  m.def("adaptive_sample", &adaptive_sample, py::arg("dataset"), py::arg("config"));
  m.def("write_annotation_sheet", &write_annotation_sheet, py::arg("dataset"), py::arg("ids"),
        py::arg("path"));
  m.def("read_annotation_sheet",
        [](const std::filesystem::path& path) {
          std::vector<std::pair<std::string, std::string>> out;
          for (const auto& example : read_annotation_sheet(path))
            out.emplace_back(example.message, example.template_text);
          return out;
        },
        py::arg("path"));

  m.def("match_template", &match_template, py::arg("message"), py::arg("template_text"));
  m.def("postprocess", &postprocess, py::arg("template_text"));

  m.def("run_sample", &run_sample, py::arg("config"), py::arg("dataset"), py::arg("sheet_path"));
  m.def(
      "run_train",
      [](const RunConfig& config, const Dataset& corpus,
         const std::vector<std::pair<std::string, std::string>>& d_train) {
        std::vector<LabeledExample> examples;
        examples.reserve(d_train.size());
        for (const auto& [message, templ] : d_train) examples.push_back({message, templ});
        TrainOutput output = run_train(config, corpus, examples);
        return output.checkpoint_path;
      },
      py::arg("config"), py::arg("corpus"), py::arg("d_train"));
  m.def("run_end_to_end", &run_end_to_end, py::arg("config"));

  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def(
      "evaluate",
      [](const std::map<std::int64_t, std::string>& pred,
         const std::map<std::int64_t, std::string>& truth) { return evaluate(pred, truth); },
      py::arg("pred"), py::arg("truth"));
  m.def("edit_distance", &edit_distance, py::arg("a"), py::arg("b"));
}
