#include "logtex/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "logtex/error.hpp"
#include "logtex/parser.hpp"

namespace logtex {

namespace {

void require_same_keys(const TemplateMap& pred, const TemplateMap& truth) {
  if (pred.size() != truth.size())
    raise(ErrorKind::KeyMismatch, "pred has " + std::to_string(pred.size()) + " keys, truth " +
                                      std::to_string(truth.size()));
  for (const auto& [id, templ] : pred) {
    if (!truth.count(id)) raise(ErrorKind::KeyMismatch, "line id " + std::to_string(id));
  }
}

std::unordered_map<std::string, std::vector<std::int64_t>> group_by_template(
    const TemplateMap& map) {
  std::unordered_map<std::string, std::vector<std::int64_t>> groups;
  for (const auto& [id, templ] : map) groups[templ].push_back(id);  // ids ascend (ordered map)
  return groups;
}

}  // namespace

double group_accuracy(const TemplateMap& pred, const TemplateMap& truth) {
  require_same_keys(pred, truth);
  if (pred.empty()) return 0.0;
  auto pred_groups = group_by_template(pred);
  auto truth_groups = group_by_template(truth);
  std::int64_t correct = 0;
  for (const auto& [templ, members] : pred_groups) {
    const auto& truth_members = truth_groups.at(truth.at(members.front()));
    if (members == truth_members) correct += static_cast<std::int64_t>(members.size());
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double parsing_accuracy(const TemplateMap& pred, const TemplateMap& truth) {
  require_same_keys(pred, truth);
  if (pred.empty()) return 0.0;
  std::int64_t correct = 0;
  for (const auto& [id, templ] : pred) {
    if (postprocess(templ) == postprocess(truth.at(id))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::int64_t edit_distance(const std::string& a, const std::string& b) {
  const size_t n = a.size();
  const size_t m = b.size();
  std::vector<std::int64_t> previous(m + 1), current(m + 1);
  for (size_t j = 0; j <= m; ++j) previous[j] = static_cast<std::int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    current[0] = static_cast<std::int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      std::int64_t substitution = previous[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      current[j] = std::min({previous[j] + 1, current[j - 1] + 1, substitution});
    }
    std::swap(previous, current);
  }
  return previous[m];
}

std::pair<double, double> dataset_edit_distance(const TemplateMap& pred, const TemplateMap& truth) {
  require_same_keys(pred, truth);
  if (pred.empty()) return {0.0, 0.0};
  std::vector<std::int64_t> distances;
  distances.reserve(pred.size());
  double total = 0.0;
  for (const auto& [id, templ] : pred) {
    std::int64_t d = edit_distance(postprocess(templ), postprocess(truth.at(id)));
    distances.push_back(d);
    total += static_cast<double>(d);
  }
  std::sort(distances.begin(), distances.end());
  const size_t n = distances.size();
  double median = (n % 2 == 1)
                      ? static_cast<double>(distances[n / 2])
                      : 0.5 * static_cast<double>(distances[n / 2 - 1] + distances[n / 2]);
  return {median, total / static_cast<double>(n)};
}

std::pair<std::optional<double>, std::int64_t> unseen_parsing_accuracy(const TemplateMap& pred,
                                                                       const TemplateMap& truth) {
  require_same_keys(pred, truth);
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& [id, templ] : truth) counts[postprocess(templ)] += 1;
  TemplateMap pred_slice, truth_slice;
  for (const auto& [id, templ] : truth) {
    if (counts.at(postprocess(templ)) != 1) continue;
    truth_slice[id] = templ;
    pred_slice[id] = pred.at(id);
  }
  if (truth_slice.empty()) return {std::nullopt, 0};
  return {parsing_accuracy(pred_slice, truth_slice),
          static_cast<std::int64_t>(truth_slice.size())};
}

EvalReport evaluate(const TemplateMap& pred, const TemplateMap& truth) {
  EvalReport report;
  report.n_messages = static_cast<std::int64_t>(pred.size());
  report.ga = group_accuracy(pred, truth);
  report.pa = parsing_accuracy(pred, truth);
  auto [median, mean] = dataset_edit_distance(pred, truth);
  report.ed_median = median;
  report.ed_mean = mean;
  auto [unseen, count] = unseen_parsing_accuracy(pred, truth);
  report.unseen_pa = unseen;
  report.unseen_count = count;
  return report;
}

std::string EvalReport::to_key_values() const {
  std::ostringstream out;
  out << "n_messages=" << n_messages << "\n";
  out << "ga=" << ga << "\n";
  out << "pa=" << pa << "\n";
  out << "ed_median=" << ed_median << "\n";
  out << "ed_mean=" << ed_mean << "\n";
  if (unseen_pa) out << "unseen_pa=" << *unseen_pa << "\n";
  else out << "unseen_pa=\n";
  out << "unseen_count=" << unseen_count << "\n";
  return out.str();
}

}  // namespace logtex
