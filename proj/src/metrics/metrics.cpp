#include "molrel/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace molrel::metrics {
namespace {

double edge(double lo, double hi, std::size_t b, std::size_t bins) {
  return lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability " + std::to_string(p) + " outside [0, 1]");
}

void check_record(const PredictionRecord& r) {
  check_probability(r.probability);
  if (r.label != 0 && r.label != 1) throw ConfigError("label must be 0 or 1, got " + std::to_string(r.label));
}

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

std::string fmt_edge(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::vector<PredictionRecord> make_records(std::span<const double> probabilities, std::span<const std::int8_t> labels,
                                           std::size_t tasks) {
  if (tasks == 0 || probabilities.size() != labels.size() || probabilities.size() % tasks != 0)
    throw ShapeError("make_records: probabilities and labels must both be rows x tasks");
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    out.push_back({probabilities[i], labels[i], i % tasks});
  }
  return out;
}

std::size_t bin_index(double x, double lo, double hi, std::size_t bins) {
  if (bins == 0) throw ConfigError("bin count must be >= 1");
  const double t = std::floor((x - lo) / (hi - lo) * static_cast<double>(bins));
  std::size_t b = t <= 0.0 ? 0 : std::min(static_cast<std::size_t>(t), bins - 1);
  while (b > 0 && x < edge(lo, hi, b, bins)) --b;
  while (b + 1 < bins && x >= edge(lo, hi, b + 1, bins)) ++b;
  return b;
}

CalibrationReport ece(std::span<const PredictionRecord> records, std::size_t bins) {
  if (records.empty()) throw ConfigError("ece: no records");
  CalibrationReport report;
  report.total = records.size();
  report.bins.resize(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<std::size_t> correct(bins, 0);
  for (const PredictionRecord& r : records) {
    check_record(r);
    const double conf = std::max(r.probability, 1.0 - r.probability);
    const int predicted = r.probability >= 0.5 ? 1 : 0;
    const std::size_t b = bin_index(conf, 0.5, 1.0, bins);
    ++report.bins[b].count;
    conf_sum[b] += conf;
    correct[b] += predicted == r.label;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    CalibrationBin& bin = report.bins[b];
    bin.low = edge(0.5, 1.0, b, bins);
    bin.high = edge(0.5, 1.0, b + 1, bins);
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.accuracy = ratio(correct[b], bin.count);
    report.ece += ratio(bin.count, report.total) * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return report;
}

double auroc(std::span<const PredictionRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& r : records) check_record(r);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].probability < records[b].probability; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && records[order[j]].probability == records[order[i]].probability) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (records[order[k]].label == 1) {
        rank_sum += mid_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = records.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetric("auroc needs both classes");
  const double np = static_cast<double>(pos), nn = static_cast<double>(neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

ClassificationMetrics classification_metrics(std::span<const PredictionRecord> records, double threshold) {
  if (records.empty()) throw ConfigError("classification_metrics: no records");
  ClassificationMetrics m;
  for (const auto& r : records) {
    check_record(r);
    const bool predicted = r.probability >= threshold;
    if (predicted) (r.label ? m.tp : m.fp)++;
    else (r.label ? m.fn : m.tn)++;
  }
  m.accuracy = ratio(m.tp + m.tn, records.size());
  m.precision_undefined = m.tp + m.fp == 0;
  m.recall_undefined = m.tp + m.fn == 0;
  m.precision = m.precision_undefined ? 0.0 : ratio(m.tp, m.tp + m.fp);
  m.recall = m.recall_undefined ? 0.0 : ratio(m.tp, m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

ClassificationMetrics ConfusionHistogram::totals() const {
  ClassificationMetrics m;
  for (const auto& b : bins) {
    m.tp += b.tp;
    m.fp += b.fp;
    m.tn += b.tn;
    m.fn += b.fn;
  }
  return m;
}

ConfusionHistogram confusion_histogram(std::span<const PredictionRecord> records, std::size_t bins) {
  ConfusionHistogram h;
  h.bins.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    h.bins[b].low = edge(0.0, 1.0, b, bins);
    h.bins[b].high = edge(0.0, 1.0, b + 1, bins);
  }
  for (const auto& r : records) {
    check_record(r);
    ConfusionBin& bin = h.bins[bin_index(r.probability, 0.0, 1.0, bins)];
    if (r.probability >= 0.5) (r.label ? bin.tp : bin.fp)++;
    else (r.label ? bin.fn : bin.tn)++;
  }
  return h;
}

ScreeningSummary screening_summary(std::span<const double> probabilities, double low, double high, std::size_t bins) {
  ScreeningSummary s;
  s.low = low;
  s.high = high;
  s.total = probabilities.size();
  s.histogram.assign(bins, 0);
  for (double p : probabilities) {
    check_probability(p);
    s.below += p < low;
    s.above += p > high;
    ++s.histogram[bin_index(p, 0.0, 1.0, bins)];
  }
  return s;
}

DatasetMetrics evaluate(std::span<const PredictionRecord> records, std::size_t tasks) {
  DatasetMetrics out;
  std::vector<std::vector<PredictionRecord>> by_task(tasks);
  for (const auto& r : records) {
    if (r.task >= tasks) throw ShapeError("evaluate: task index out of range");
    by_task[r.task].push_back(r);
  }
  double auroc_sum = 0.0;
  for (std::size_t t = 0; t < tasks; ++t) {
    if (by_task[t].empty()) continue;
    ++out.tasks;
    out.ece += ece(by_task[t]).ece;
    const ClassificationMetrics c = classification_metrics(by_task[t]);
    out.accuracy += c.accuracy;
    out.precision += c.precision;
    out.recall += c.recall;
    out.f1 += c.f1;
    try {
      auroc_sum += auroc(by_task[t]);
      ++out.auroc_tasks;
    } catch (const UndefinedMetric&) {
      out.undefined_auroc_tasks.push_back(t);
    }
  }
  if (out.tasks == 0) throw ConfigError("evaluate: no labelled records");
  const double n = static_cast<double>(out.tasks);
  out.ece /= n;
  out.accuracy /= n;
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  if (out.auroc_tasks > 0) out.auroc = auroc_sum / static_cast<double>(out.auroc_tasks);
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"low", b.low},
                    {"high", b.high},
                    {"mean_confidence", b.mean_confidence},
                    {"accuracy", b.accuracy},
                    {"count", b.count}});
  }
  return {{"ece", report.ece}, {"total", report.total}, {"bins", std::move(bins)}};
}

nlohmann::json to_json(const ClassificationMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined}};
}

nlohmann::json to_json(const ConfusionHistogram& h) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : h.bins)
    bins.push_back({{"low", b.low}, {"high", b.high}, {"tp", b.tp}, {"fp", b.fp}, {"tn", b.tn}, {"fn", b.fn}});
  return {{"bins", std::move(bins)}};
}

nlohmann::json to_json(const ScreeningSummary& s) {
  return {{"below_low", s.below},
          {"above_high", s.above},
          {"total", s.total},
          {"low", s.low},
          {"high", s.high},
          {"extreme_fraction", s.extreme_fraction()},
          {"histogram", s.histogram}};
}

nlohmann::json to_json(const DatasetMetrics& m) {
  return {{"ece", m.ece},
          {"auroc", optional_number(m.auroc)},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"tasks", m.tasks},
          {"auroc_tasks", m.auroc_tasks},
          {"undefined_auroc_tasks", m.undefined_auroc_tasks}};
}

nlohmann::json to_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}, {"n", s.n}}; }

std::string confusion_csv(const ConfusionHistogram& h) {
  std::ostringstream os;
  os << "bin_low,bin_high,tp,fp,tn,fn\n";
  for (const auto& b : h.bins)
    os << fmt_edge(b.low) << ',' << fmt_edge(b.high) << ',' << b.tp << ',' << b.fp << ',' << b.tn << ',' << b.fn << '\n';
  return os.str();
}

std::string screening_csv(const ScreeningSummary& s) {
  std::ostringstream os;
  os << "bin_low,bin_high,count\n";
  const std::size_t bins = s.histogram.size();
  for (std::size_t b = 0; b < bins; ++b)
    os << fmt_edge(edge(0.0, 1.0, b, bins)) << ',' << fmt_edge(edge(0.0, 1.0, b + 1, bins)) << ',' << s.histogram[b] << '\n';
  return os.str();
}

namespace {

constexpr double kWidth = 640, kHeight = 360, kLeft = 50, kRight = 20, kTop = 40, kBottom = 40;

struct SvgBar {
  double value;
  const char* color;
};

std::string svg_chart(const std::vector<std::vector<SvgBar>>& stacks, const std::string& title,
                      const std::vector<std::pair<const char*, const char*>>& legend, const std::vector<double>& markers) {
  double peak = 1.0;
  for (const auto& s : stacks) {
    double total = 0.0;
    for (const auto& b : s) total += b.value;
    peak = std::max(peak, total);
  }
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double bar_w = plot_w / static_cast<double>(std::max<std::size_t>(stacks.size(), 1));
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    double y = kTop + plot_h;
    for (const auto& b : stacks[i]) {
      const double h = plot_h * b.value / peak;
      if (h <= 0.0) continue;
      y -= h;
      os << "<rect x=\"" << kLeft + bar_w * static_cast<double>(i) + 1 << "\" y=\"" << y << "\" width=\"" << bar_w - 2
         << "\" height=\"" << h << "\" fill=\"" << b.color << "\"/>\n";
    }
  }
  for (double m : markers) {
    const double x = kLeft + plot_w * m;
    os << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\"" << kTop + plot_h
       << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    os << "<text x=\"" << kLeft + plot_w * t / 4.0 << "\" y=\"" << kHeight - 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << t / 4.0 << "</text>\n";
  }
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << std::setprecision(0) << peak
     << "</text>\n";
  double lx = kLeft;
  for (const auto& [label, color] : legend) {
    os << "<rect x=\"" << lx << "\" y=\"" << kHeight - 12 << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>";
    os << "<text x=\"" << lx + 14 << "\" y=\"" << kHeight - 3 << "\" font-family=\"sans-serif\" font-size=\"11\">" << label
       << "</text>\n";
    lx += 60;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string confusion_svg(const ConfusionHistogram& h, const std::string& title) {
  std::vector<std::vector<SvgBar>> stacks;
  for (const auto& b : h.bins) {
    stacks.push_back({{static_cast<double>(b.tp), "#2b8a3e"},
                      {static_cast<double>(b.fp), "#e8590c"},
                      {static_cast<double>(b.tn), "#1971c2"},
                      {static_cast<double>(b.fn), "#c2255c"}});
  }
  return svg_chart(stacks, title, {{"TP", "#2b8a3e"}, {"FP", "#e8590c"}, {"TN", "#1971c2"}, {"FN", "#c2255c"}}, {0.5});
}

std::string screening_svg(const ScreeningSummary& s, const std::string& title) {
  std::vector<std::vector<SvgBar>> stacks;
  for (std::size_t c : s.histogram) stacks.push_back({{static_cast<double>(c), "#495057"}});
  return svg_chart(stacks, title, {{"count", "#495057"}}, {s.low, s.high});
}

}  // namespace molrel::metrics
