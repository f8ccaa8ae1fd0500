#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamlink/check/checker.hpp"
#include "streamlink/error.hpp"

namespace streamlink::eval {

// LengthMismatch, EmptyInput, NeedBothClasses, EmptyDataset, InvalidDataset.
class EvalError : public Error {
 public:
  using Error::Error;
};

enum class Label { Benign, Malicious };

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
  nlohmann::json to_json() const;
};

// Positive class is malicious; predicted positive is a block.
ConfusionCounts confusion(std::span<const Label> labels, std::span<const check::Security> verdicts);

// Exact non-negative ratio, reduced.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational of(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  double rounded(int digits = 4) const;
  std::string str() const;
  bool operator==(const Rational&) const = default;
};

// nullopt where the denominator is zero.
struct CheckerMetrics {
  std::optional<Rational> precision;     // TP / (TP + FP)
  std::optional<Rational> recall;        // TP / (TP + FN)
  std::optional<Rational> escape;        // FN / (TP + FN)
  std::optional<Rational> misintercept;  // FP / (TN + FP)

  nlohmann::json to_json() const;
};

CheckerMetrics metrics(const ConfusionCounts& c);

struct RocPoint {
  double threshold = 0;  // predicted positive iff score >= threshold
  double fpr = 0;
  double tpr = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0;
};

// Sweeps every distinct score as a threshold; AUC by the trapezoid rule,
// computed exactly in integers before the final division.
RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels);

std::string roc_csv(const RocCurve& curve);

}  // namespace streamlink::eval
