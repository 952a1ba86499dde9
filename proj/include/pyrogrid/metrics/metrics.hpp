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

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pyrogrid/numerics/tensor.hpp"

namespace pyrogrid::metrics {

using numerics::Tensor;

// Pixel-mean negated binary cross-entropy with pred clipped to
// [clip, 1 - clip].
double bce(const Tensor& target, const Tensor& pred, double clip = 1e-7);

struct AurocResult {
  double value = 0.5;
  bool degenerate_labels = false;  // no positives or no negatives
};

// Mann-Whitney statistic with average ranks for ties.
AurocResult auroc(std::span<const double> targets, std::span<const double> scores);

// |A & B| / |A | B| with pred binarized at pred >= threshold; 1 when both
// sets are empty.
double iou(const Tensor& target, const Tensor& pred, double threshold = 0.5);

struct MetricRow {
  std::string method;
  std::string agent;  // agent index, or "mean"
  std::string horizon;  // weeks ahead, or "mean"
  double bce = 0.0;
  double auroc = 0.5;
  double iou = 0.0;
};

class MetricTable {
 public:
  void add(MetricRow row) { rows_.push_back(std::move(row)); }
  const std::vector<MetricRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Appends one ("mean", "mean") row per method, averaging that method's rows.
  void add_method_means();

  void write_csv(std::ostream& out) const;
  // Column-aligned text: method, agent, horizon, bce, auroc, iou.
  void write_text(std::ostream& out) const;

  static MetricTable read_csv(std::istream& in);

 private:
  std::vector<MetricRow> rows_;
};

}  // namespace pyrogrid::metrics
