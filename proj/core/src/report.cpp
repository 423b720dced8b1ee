#include "alrn/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "alrn/text.hpp"

namespace alrn {

std::string format_1dp(double value) {
  if (!std::isfinite(value)) return fmt::format("{}", value);
  // Shortest decimal that round-trips, so 0.25 and 0.15 round as written.
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::fabs(value), std::chars_format::fixed);
  std::string digits(buf, res.ptr);
  const auto dot = digits.find('.');
  std::string whole = dot == std::string::npos ? digits : digits.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : digits.substr(dot + 1);
  std::string kept = whole + (frac.empty() ? '0' : frac[0]);
  if (frac.size() > 1 && frac[1] >= '5') {
    std::size_t i = kept.size();
    while (i > 0) {
      --i;
      if (kept[i] == '9') {
        kept[i] = '0';
      } else {
        ++kept[i];
        break;
      }
      if (i == 0) kept.insert(kept.begin(), '1');
    }
  }
  std::string out = kept.substr(0, kept.size() - 1) + "." + kept.back();
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  return (value < 0 && !zero ? "-" : "") + out;
}

namespace {

std::size_t display_width(const std::string& s) { return text::decode_utf8(s).size(); }

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string percent_of_layers(int n, std::size_t total) {
  const double pct = total == 0 ? 0.0 : 100.0 * n / static_cast<double>(total);
  return fmt::format("{} ({}%)", n, static_cast<long>(std::floor(pct + 0.5)));
}

std::string scheme_display(const std::string& key) {
  if (key == "base") return "Base";
  if (key == "y_to_xhat") return "LLM y->x_hat";
  if (key == "x_to_yhat") return "LLM x->y_hat";
  return key;
}

}  // namespace

std::string text_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) width[c] = display_width(headers[c]);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], display_width(r[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      out += cell;
      if (c + 1 < width.size()) out += std::string(width[c] - display_width(cell) + 2, ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  const std::string rule(total > 2 ? total - 2 : 0, '-');
  std::string out = line(headers) + rule + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string csv_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + csv_field(cells[c]);
    return out + "\n";
  };
  std::string out = line(headers);
  for (const auto& r : rows) out += line(r);
  return out;
}

TableData customization_table(std::span<const CustomizationRow> rows) {
  TableData t{{"Model", "Base", "Customized", "Improvement", "Time"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.model, format_1dp(r.base_accuracy), format_1dp(r.customized_accuracy),
                      format_1dp(improvement_points(r.base_accuracy, r.customized_accuracy)),
                      r.minutes ? format_1dp(*r.minutes) : "-"});
  }
  return t;
}

TableData sweep_table(double base_accuracy, std::span<const SweepRow> rows) {
  TableData t{{"Model", "Trainable layers", "Accuracy", "Improvement"}, {}};
  const std::size_t total = rows.empty() ? 0 : rows.front().total_layers;
  t.rows.push_back({"Base", percent_of_layers(0, total), format_1dp(base_accuracy), "-"});
  for (const auto& r : rows) {
    if (r.n == 0) continue;
    t.rows.push_back({"Customized", percent_of_layers(r.n, r.total_layers), format_1dp(r.accuracy),
                      format_1dp(r.improvement_relative)});
  }
  return t;
}

TableData scheme_table(std::span<const SchemeRow> rows) {
  TableData t{{"Customization data", "Accuracy", "Improvement (%)"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({scheme_display(r.scheme), format_1dp(r.accuracy),
                      r.scheme == "base" ? "-" : format_1dp(r.improvement_relative)});
  }
  return t;
}

std::string eval_text(const EvalReport& r) {
  std::string out = fmt::format("accuracy: {}% ({} of {})\n", format_1dp(r.accuracy), r.correct, r.total);
  if (r.baseline_accuracy) {
    out += fmt::format("baseline ({}): {}%  improvement: {} points, {}% relative\n", r.baseline_name.value_or("base"),
                       format_1dp(*r.baseline_accuracy), format_1dp(*r.improvement_points),
                       format_1dp(*r.improvement_relative));
  }
  std::vector<std::string> headers{"true \\ predicted"};
  for (SentimentLabel l : kAllLabels) headers.emplace_back(label_name(l));
  headers.emplace_back("Recall");
  std::vector<std::vector<std::string>> rows;
  for (SentimentLabel t : kAllLabels) {
    const auto ti = static_cast<std::size_t>(code(t));
    std::vector<std::string> row{std::string(label_name(t))};
    for (SentimentLabel p : kAllLabels) row.push_back(std::to_string(r.confusion[ti][static_cast<std::size_t>(code(p))]));
    row.push_back(format_1dp(r.recall[ti]));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> prec{"Precision"};
  for (SentimentLabel p : kAllLabels) prec.push_back(format_1dp(r.precision[static_cast<std::size_t>(code(p))]));
  prec.emplace_back("");
  rows.push_back(std::move(prec));
  return out + text_table(headers, rows);
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["trainable_layers"] = c.trainable_layers;
  j["seed"] = c.seed;
  j["shuffle"] = c.shuffle;
  j["allow_short"] = c.allow_short;
  return j;
}

nlohmann::ordered_json to_json(const TrainReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["stage"] = r.stage;
  j["config"] = to_json(r.config);
  j["trainable_layers"] = r.trainable_layers;
  j["noop"] = r.noop;
  j["examples"] = r.examples;
  j["epoch_loss"] = r.epoch_loss;
  j["final_train_loss"] = r.final_train_loss;
  j["final_train_accuracy"] = r.final_train_accuracy;
  j["dataset_fingerprints"] = r.dataset_fingerprints;
  if (include_timing) j["duration_seconds"] = r.duration_seconds;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["accuracy"] = r.accuracy;
  j["labels"] = nlohmann::ordered_json::array();
  for (SentimentLabel l : kAllLabels) j["labels"].push_back(label_key(l));
  j["confusion"] = r.confusion;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["test_fingerprint"] = r.test_fingerprint;
  if (r.baseline_accuracy) {
    j["baseline"] = r.baseline_name.value_or("base");
    j["baseline_accuracy"] = *r.baseline_accuracy;
    j["improvement_points"] = *r.improvement_points;
    j["improvement_relative"] = *r.improvement_relative;
  }
  return j;
}

}  // namespace alrn
