#include "expcopilot/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "expcopilot/error.hpp"

namespace expcopilot {

double interpolated_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size() || frac == 0.0) return sorted[std::min(lo, sorted.size() - 1)];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

const std::vector<std::string>& labels_for_bins(std::size_t bins) {
  static const std::vector<std::vector<std::string>> table = {
      {},
      {kLevelLabels[2]},
      {kLevelLabels[1], kLevelLabels[3]},
      {kLevelLabels[1], kLevelLabels[2], kLevelLabels[3]},
      {kLevelLabels[0], kLevelLabels[1], kLevelLabels[3], kLevelLabels[4]},
      {kLevelLabels[0], kLevelLabels[1], kLevelLabels[2], kLevelLabels[3], kLevelLabels[4]},
  };
  if (bins == 0 || bins >= table.size()) throw Error("unsupported bin count " + std::to_string(bins));
  return table[bins];
}

namespace {

double median_sorted(std::span<const double> v, bool in_log) {
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double a = v[n / 2 - 1];
  const double b = v[n / 2];
  if (a == b) return a;
  const double m = in_log ? std::pow(10.0, 0.5 * (std::log10(a) + std::log10(b))) : 0.5 * (a + b);
  return std::clamp(m, a, b);
}

}  // namespace

Discretizer Discretizer::fit(std::span<const double> values, const ParameterDef& param,
                             std::size_t n_levels) {
  if (!param.is_numeric())
    throw Error("cannot discretize categorical parameter '" + param.name + "'");
  if (values.empty())
    throw Error("parameter '" + param.name + "': no best-solution statistics");
  if (n_levels < 2 || n_levels > kNumLevels)
    throw Error("parameter '" + param.name + "': n_levels must be in [2, 5]");
  for (double v : values)
    if (!std::isfinite(v) || !param.contains(v))
      throw OutOfSpaceError("parameter '" + param.name + "': fitting value " + format_real(v) +
                            " outside its range");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> domain = sorted;
  if (param.log_scale)
    for (double& v : domain) v = std::log10(v);

  std::vector<double> splits;
  for (std::size_t i = 1; i < n_levels; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(n_levels);
    const double pos = q * static_cast<double>(domain.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    if (k + 1 >= sorted.size() || frac == 0.0 || sorted[k] == sorted[k + 1]) {
      // Lands on an order statistic: keep the raw value so that the data
      // point sits exactly on the split.
      splits.push_back(sorted[std::min(k, sorted.size() - 1)]);
      continue;
    }
    const double t = domain[k] + frac * (domain[k + 1] - domain[k]);
    const double raw = param.log_scale ? std::pow(10.0, t) : t;
    splits.push_back(std::clamp(raw, sorted[k], sorted[k + 1]));
  }
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  // A split at the smallest value would leave the first bin empty.
  if (!splits.empty() && splits.front() <= sorted.front()) splits.erase(splits.begin());

  Discretizer d;
  d.parameter_ = param.name;
  d.splits_ = std::move(splits);
  d.log_ = param.log_scale;
  d.lo_ = param.lo;
  d.hi_ = param.hi;
  const std::size_t bins = d.splits_.size() + 1;
  d.labels_ = labels_for_bins(bins);
  d.reps_.resize(bins);

  auto begin = sorted.begin();
  for (std::size_t b = 0; b < bins; ++b) {
    auto end = b + 1 < bins ? std::lower_bound(begin, sorted.end(), d.splits_[b]) : sorted.end();
    if (begin != end) {
      d.reps_[b] = median_sorted(std::span<const double>(&*begin, static_cast<std::size_t>(end - begin)),
                                 d.log_);
    } else {
      const double lower = b == 0 ? d.lo_ : d.splits_[b - 1];
      const double upper = b + 1 < bins ? d.splits_[b] : d.hi_;
      d.reps_[b] = d.log_ ? std::pow(10.0, 0.5 * (std::log10(lower) + std::log10(upper)))
                          : 0.5 * (lower + upper);
      d.reps_[b] = std::clamp(d.reps_[b], d.lo_, d.hi_);
    }
    begin = end;
  }
  return d;
}

Discretizer Discretizer::from_parts(std::string parameter, std::vector<double> split_points,
                                    std::vector<std::string> bin_labels,
                                    std::vector<double> representatives, bool fitted_in_log,
                                    double lo, double hi) {
  Discretizer d;
  d.parameter_ = std::move(parameter);
  d.splits_ = std::move(split_points);
  d.labels_ = std::move(bin_labels);
  d.reps_ = std::move(representatives);
  d.log_ = fitted_in_log;
  d.lo_ = lo;
  d.hi_ = hi;
  d.validate();
  return d;
}

void Discretizer::validate() const {
  auto fail = [&](const std::string& why) {
    throw ConfigError("discretizer '" + parameter_ + "': " + why);
  };
  if (splits_.size() + 1 > kNumLevels) fail("too many split points");
  for (std::size_t i = 1; i < splits_.size(); ++i)
    if (!(splits_[i - 1] < splits_[i])) fail("split points must be strictly increasing");
  if (labels_ != labels_for_bins(splits_.size() + 1)) fail("bin labels do not match split count");
  if (reps_.size() != labels_.size()) fail("one representative per bin required");
  if (!(lo_ < hi_)) fail("invalid range");
  for (double r : reps_)
    if (!std::isfinite(r) || r < lo_ || r > hi_) fail("representative outside range");
}

std::size_t Discretizer::bin_of(double x) const {
  if (std::isnan(x)) throw Error("discretize: NaN value for '" + parameter_ + "'");
  return static_cast<std::size_t>(std::upper_bound(splits_.begin(), splits_.end(), x) - splits_.begin());
}

const std::string& Discretizer::discretize(double x) const { return labels_[bin_of(x)]; }

double Discretizer::representative(std::string_view level) const {
  auto want = level_ordinal(level);
  if (!want) throw Error("parameter '" + parameter_ + "': unknown level '" + std::string(level) + "'");
  std::size_t best = 0;
  std::size_t best_gap = kNumLevels + 1;
  for (std::size_t b = 0; b < labels_.size(); ++b) {
    const auto ord = *level_ordinal(labels_[b]);
    const std::size_t gap = ord > *want ? ord - *want : *want - ord;
    if (gap < best_gap) {
      best_gap = gap;
      best = b;
    }
  }
  return reps_[best];
}

}  // namespace expcopilot
