#include <algorithm>
#include <iomanip>
#include "json.hpp"
#include <sstream>

#include "wavefuse/error.hpp"
#include "wavefuse/metrics.hpp"

namespace wavefuse::metrics {

namespace {

std::size_t index_of(std::string_view name) {
  const auto it = std::find(kMetricNames.begin(), kMetricNames.end(), name);
  if (it == kMetricNames.end()) throw ArgumentError("unknown metric '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - kMetricNames.begin());
}

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

double MetricReport::get(std::string_view name) const { return values[index_of(name)]; }
double& MetricReport::operator[](std::string_view name) { return values[index_of(name)]; }

MetricReport evaluate_all(const GrayImage& a, const GrayImage& b, const GrayImage& fused) {
  if (!a.same_dims(fused) || !b.same_dims(fused)) {
    throw ArgumentError("evaluate_all: image dims differ (A " + std::to_string(a.width) + "x" +
                        std::to_string(a.height) + ", B " + std::to_string(b.width) + "x" +
                        std::to_string(b.height) + ", F " + std::to_string(fused.width) + "x" +
                        std::to_string(fused.height) + ")");
  }
  MetricReport r;
  // Slots are independent; each iteration writes only its own entry.
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < static_cast<int>(kMetricNames.size()); ++m) {
    double v = 0.0;
    switch (m) {
      case 0: v = entropy(fused); break;
      case 1: v = cross_entropy_metric(a, b, fused); break;
      case 2: v = fmi(a, b, fused, FmiVariant::pixel); break;
      case 3: v = fmi(a, b, fused, FmiVariant::dct); break;
      case 4: v = fmi(a, b, fused, FmiVariant::wavelet); break;
      case 5: v = q_nice(a, b, fused); break;
      case 6: v = q_abf(a, b, fused); break;
      case 7: v = variance_metric(fused); break;
      case 8: v = (ms_ssim(fused, a) + ms_ssim(fused, b)) / 2.0; break;
    }
    r.values[m] = v;
  }
  return r;
}

std::string csv_header() {
  std::string h = "source_a,source_b,fused";
  for (auto n : kMetricNames) h += "," + std::string(n);
  return h;
}

std::string csv_row(const MetricReport& report) {
  std::string row = report.source_a + "," + report.source_b + "," + report.fused;
  for (double v : report.values) row += "," + format_number(v);
  return row;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    j[std::string(kMetricNames[i])] = report.values[i];
  }
  j["source_a"] = report.source_a;
  j["source_b"] = report.source_b;
  j["fused"] = report.fused;
  return j.dump(2);
}

}  // namespace wavefuse::metrics
