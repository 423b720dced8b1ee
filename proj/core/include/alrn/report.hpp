#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "alrn/training.hpp"

namespace alrn {

/// One decimal, rounded half away from zero on the decimal value; never "-0.0".
std::string format_1dp(double value);

/// Column-aligned plain-text table with a header rule.
std::string text_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows);
/// RFC 4180 style CSV; fields containing ',', '"' or newlines are quoted.
std::string csv_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows);

// Table layouts. Each returns header + rows; format with text_table/csv_table.
struct TableData {
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;

  std::string text() const { return text_table(headers, rows); }
  std::string csv() const { return csv_table(headers, rows); }
};

/// Base vs customized accuracy, improvement in points, training time.
struct CustomizationRow {
  std::string model;
  double base_accuracy = 0.0;
  double customized_accuracy = 0.0;
  std::optional<double> minutes;  // "-" when absent
};
TableData customization_table(std::span<const CustomizationRow> rows);

/// Trainable-layer sweep: a Base row (n = 0) followed by the rows with n > 0;
/// improvement is relative to the base accuracy, in percent.
TableData sweep_table(double base_accuracy, std::span<const SweepRow> rows);

/// Labeling-scheme comparison: Base, y -> x-hat, x -> y-hat.
TableData scheme_table(std::span<const SchemeRow> rows);

/// Evaluation summary with the confusion matrix (rows = true label).
std::string eval_text(const EvalReport& report);

nlohmann::ordered_json to_json(const TrainConfig& config);
/// Wall-clock duration is only included when include_timing is set, so that
/// reports of identical runs are byte-identical.
nlohmann::ordered_json to_json(const TrainReport& report, bool include_timing = false);
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace alrn
