// Copyright 2026 The PyroGrid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pyrogrid/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pyrogrid/error.hpp"

namespace pyrogrid::metrics {
namespace {

void same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": target " + numerics::shape_string(a.shape()) +
                     " vs prediction " + numerics::shape_string(b.shape()));
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double bce(const Tensor& target, const Tensor& pred, double clip) {
  same_shape(target, pred, "bce");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double q = std::clamp(pred[i], clip, 1.0 - clip);
    const double t = target[i];
    if (t != 0.0) s -= t * std::log(q);
    if (t != 1.0) s -= (1.0 - t) * std::log(1.0 - q);
  }
  return s / static_cast<double>(pred.size());
}

AurocResult auroc(std::span<const double> targets, std::span<const double> scores) {
  if (targets.size() != scores.size()) {
    throw Error(Errc::length_mismatch, std::to_string(targets.size()) + " targets vs " +
                                           std::to_string(scores.size()) + " scores");
  }
  const std::size_t n = targets.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0, n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (targets[order[k]] == 1.0) {
        rank_sum += avg_rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = double(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return {0.5, true};
  return {(rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg), false};
}

double iou(const Tensor& target, const Tensor& pred, double threshold) {
  same_shape(target, pred, "iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = target[i] >= 0.5;
    const bool b = pred[i] >= threshold;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

void MetricTable::add_method_means() {
  std::vector<std::string> methods;
  std::map<std::string, MetricRow> sums;
  std::map<std::string, int> counts;
  for (const MetricRow& r : rows_) {
    if (r.agent == "mean") continue;
    if (!sums.count(r.method)) {
      methods.push_back(r.method);
      sums[r.method] = {r.method, "mean", "mean", 0.0, 0.0, 0.0};
    }
    MetricRow& s = sums[r.method];
    s.bce += r.bce;
    s.auroc += r.auroc;
    s.iou += r.iou;
    ++counts[r.method];
  }
  for (const std::string& m : methods) {
    MetricRow s = sums[m];
    const double c = counts[m];
    s.bce /= c;
    s.auroc /= c;
    s.iou /= c;
    rows_.push_back(s);
  }
}

void MetricTable::write_csv(std::ostream& out) const {
  out << "method,agent,horizon,bce,auroc,iou\n";
  for (const MetricRow& r : rows_) {
    out << r.method << ',' << r.agent << ',' << r.horizon << ',' << fixed(r.bce, 9) << ','
        << fixed(r.auroc, 9) << ',' << fixed(r.iou, 9) << '\n';
  }
}

void MetricTable::write_text(std::ostream& out) const {
  std::size_t wm = 6;
  for (const MetricRow& r : rows_) wm = std::max(wm, r.method.size());
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  out << pad("method", wm + 2) << pad("agent", 7) << pad("horizon", 9) << pad("bce", 10)
      << pad("auroc", 9) << "iou\n";
  for (const MetricRow& r : rows_) {
    out << pad(r.method, wm + 2) << pad(r.agent, 7) << pad(r.horizon, 9) << pad(fixed(r.bce, 4), 10)
        << pad(fixed(100.0 * r.auroc, 1) + "%", 9) << fixed(100.0 * r.iou, 1) << "%\n";
  }
}

MetricTable MetricTable::read_csv(std::istream& in) {
  MetricTable t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,", 0) != 0)
    throw Error(Errc::io, "metric table: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    MetricRow r;
    std::string b, a, i;
    std::getline(ss, r.method, ',');
    std::getline(ss, r.agent, ',');
    std::getline(ss, r.horizon, ',');
    std::getline(ss, b, ',');
    std::getline(ss, a, ',');
    std::getline(ss, i, ',');
    try {
      r.bce = std::stod(b);
      r.auroc = std::stod(a);
      r.iou = std::stod(i);
    } catch (const std::exception&) {
      throw Error(Errc::io, "metric table: bad row '" + line + "'");
    }
    t.add(std::move(r));
  }
  return t;
}

}  // namespace pyrogrid::metrics
