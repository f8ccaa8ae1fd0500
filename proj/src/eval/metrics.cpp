#include "streamlink/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace streamlink::eval {

nlohmann::json ConfusionCounts::to_json() const { return {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}}; }

ConfusionCounts confusion(std::span<const Label> labels, std::span<const check::Security> verdicts) {
  if (labels.size() != verdicts.size()) {
    throw EvalError("LengthMismatch", std::to_string(labels.size()) + " labels but " +
                                          std::to_string(verdicts.size()) + " verdicts");
  }
  if (labels.empty()) throw EvalError("EmptyInput", "no labelled verdicts");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool positive = labels[i] == Label::Malicious;
    bool blocked = verdicts[i] == check::Security::Block;
    if (positive && blocked) ++c.tp;
    if (!positive && blocked) ++c.fp;
    if (positive && !blocked) ++c.fn;
    if (!positive && !blocked) ++c.tn;
  }
  return c;
}

Rational Rational::of(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw EvalError("InvalidArgument", "zero denominator");
  auto g = std::gcd(num, den);
  if (g == 0) g = 1;
  return {num / g, den / g};
}

double Rational::rounded(int digits) const {
  double scale = std::pow(10.0, digits);
  return std::round(value() * scale) / scale;
}

std::string Rational::str() const { return std::to_string(num) + "/" + std::to_string(den); }

namespace {

std::optional<Rational> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Rational::of(num, den);
}

nlohmann::json metric_json(const std::optional<Rational>& r) {
  if (!r) return nullptr;
  return {{"value", r->rounded()}, {"exact", r->str()}};
}

}  // namespace

CheckerMetrics metrics(const ConfusionCounts& c) {
  CheckerMetrics m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.escape = ratio(c.fn, c.tp + c.fn);
  m.misintercept = ratio(c.fp, c.tn + c.fp);
  return m;
}

nlohmann::json CheckerMetrics::to_json() const {
  return {{"precision", metric_json(precision)},
          {"recall", metric_json(recall)},
          {"escape", metric_json(escape)},
          {"misintercept", metric_json(misintercept)}};
}

RocCurve roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw EvalError("LengthMismatch", std::to_string(scores.size()) + " scores but " +
                                          std::to_string(labels.size()) + " labels");
  }
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw EvalError("InvalidArgument", "score " + std::to_string(i) + " is NaN");
    (labels[i] == Label::Malicious ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw EvalError("NeedBothClasses", "ROC needs at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  // Twice the area, scaled by pos * neg.
  std::uint64_t area2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    double threshold = scores[order[i]];
    std::uint64_t tp_before = tp, fp_before = fp;
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == Label::Malicious ? tp : fp) += 1;
      ++i;
    }
    area2 += (fp - fp_before) * (tp + tp_before);
    curve.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  curve.auc = static_cast<double>(static_cast<long double>(area2) / (2.0L * pos * neg));
  return curve;
}

std::string roc_csv(const RocCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    if (std::isinf(p.threshold)) {
      out << "inf";
    } else {
      out << p.threshold;
    }
    out << ',' << p.fpr << ',' << p.tpr << '\n';
  }
  return out.str();
}

}  // namespace streamlink::eval
