#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expcopilot/space.hpp"

namespace expcopilot {

// Linear-interpolation empirical quantile of an ascending-sorted sample,
// q in [0, 1]. Sample must be non-empty.
double interpolated_quantile(std::span<const double> sorted, double q);

// Maps a numeric parameter onto ordinal levels using quantile split points of
// the values observed in the best historical solutions.
//
// Bins are half-open [s_i, s_i+1); values below the first split fall in the
// first bin and values at or above the last split fall in the last bin.
// Duplicate split points, and a split at the smallest fitted value, collapse
// bins; the survivors are relabeled with a symmetric subset of the five-level
// lexicon (a single bin is "medium").
class Discretizer {
 public:
  static Discretizer fit(std::span<const double> values, const ParameterDef& param,
                         std::size_t n_levels = kNumLevels);

  // Rebuilds a persisted discretizer; validates internal consistency.
  static Discretizer from_parts(std::string parameter, std::vector<double> split_points,
                                std::vector<std::string> bin_labels,
                                std::vector<double> representatives, bool fitted_in_log, double lo,
                                double hi);

  const std::string& parameter() const { return parameter_; }
  // Raw-domain split points, strictly increasing. For log-scale parameters
  // they are the exponentiated log10-domain quantiles.
  const std::vector<double>& split_points() const { return splits_; }
  const std::vector<std::string>& bin_labels() const { return labels_; }
  const std::vector<double>& representatives() const { return reps_; }
  bool fitted_in_log() const { return log_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  std::size_t bin_of(double x) const;
  const std::string& discretize(double x) const;

  // Value standing for `level` when a discrete suggestion is concretized.
  // `level` must be a canonical label; labels of collapsed bins resolve to
  // the nearest surviving bin by ordinal (ties go to the lower bin).
  double representative(std::string_view level) const;

 private:
  Discretizer() = default;
  void validate() const;

  std::string parameter_;
  std::vector<double> splits_;
  std::vector<std::string> labels_;
  std::vector<double> reps_;
  bool log_ = false;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

// Canonical labels used for `bins` surviving bins (1..5).
const std::vector<std::string>& labels_for_bins(std::size_t bins);

}  // namespace expcopilot
