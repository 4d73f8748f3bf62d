#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace logtex {

using TemplateMap = std::map<std::int64_t, std::string>;

struct EvalReport {
  double ga = 0.0;
  double pa = 0.0;
  double ed_median = 0.0;
  double ed_mean = 0.0;
  std::optional<double> unseen_pa;
  std::int64_t unseen_count = 0;
  std::int64_t n_messages = 0;

  std::string to_key_values() const;
};

// Fraction of messages whose predicted group (the set of messages sharing its
// predicted template) equals its ground-truth group.
double group_accuracy(const TemplateMap& pred, const TemplateMap& truth);

// Fraction of messages whose predicted template string equals the truth
// template string, both canonicalized through postprocess.
double parsing_accuracy(const TemplateMap& pred, const TemplateMap& truth);

// Character-level Levenshtein distance, unit costs.
std::int64_t edit_distance(const std::string& a, const std::string& b);

// Median and mean edit distance over canonicalized (pred, truth) pairs.
std::pair<double, double> dataset_edit_distance(const TemplateMap& pred, const TemplateMap& truth);

// PA restricted to messages whose canonicalized truth template occurs exactly
// once. Fraction is absent when there are no such messages.
std::pair<std::optional<double>, std::int64_t> unseen_parsing_accuracy(const TemplateMap& pred,
                                                                       const TemplateMap& truth);

EvalReport evaluate(const TemplateMap& pred, const TemplateMap& truth);

}  // namespace logtex
