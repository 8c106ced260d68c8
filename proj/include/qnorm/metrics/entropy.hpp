#pragma once

// Binned Shannon entropy of trait values on [0, 1], in nats.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnorm/agents/dynamics.hpp"
#include "qnorm/error.hpp"
#include "qnorm/social/behavior.hpp"

namespace qnorm::metrics {

// B equal-width bins on [0, 1]; the last bin includes 1.
struct HistogramSpec {
  int bins = 10;

  void validate() const { qnorm::detail::require(bins >= 2, "histogram: bins must be >= 2"); }

  std::size_t bin_of(double v) const {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("histogram: value " + std::to_string(v) + " outside [0, 1]");
    const auto k = static_cast<std::size_t>(v * bins);
    return std::min(k, static_cast<std::size_t>(bins - 1));
  }
};

inline std::vector<std::size_t> bin_counts(std::span<const double> values, const HistogramSpec& spec) {
  spec.validate();
  std::vector<std::size_t> counts(static_cast<std::size_t>(spec.bins), 0);
  for (double v : values) ++counts[spec.bin_of(v)];
  return counts;
}

inline std::vector<double> bin_distribution(std::span<const double> values, const HistogramSpec& spec) {
  if (values.empty()) throw ConfigError("bin_distribution: empty value list");
  const auto counts = bin_counts(values, spec);
  std::vector<double> p(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    p[k] = static_cast<double>(counts[k]) / static_cast<double>(values.size());
  }
  return p;
}

// H = -sum p_k ln p_k with 0 ln 0 = 0.
inline double shannon_entropy(std::span<const double> values, const HistogramSpec& spec = {}) {
  if (values.empty()) throw ConfigError("shannon_entropy: empty value list");
  double h = 0.0;
  for (double p : bin_distribution(values, spec)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

using RoleEntropies = std::array<std::optional<double>, 3>;

// One entropy per role present; absent roles stay empty.
inline RoleEntropies entropy_by_role(std::span<const double> values, std::span<const agents::Role> roles,
                                     const HistogramSpec& spec = {}) {
  if (values.size() != roles.size()) {
    throw ConfigError("entropy_by_role: " + std::to_string(values.size()) + " values but " +
                      std::to_string(roles.size()) + " roles");
  }
  RoleEntropies out;
  for (auto role : agents::kRoles) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (roles[i] == role) subset.push_back(values[i]);
    }
    if (!subset.empty()) out[agents::index_of(role)] = shannon_entropy(subset, spec);
  }
  return out;
}

struct OutcomeCounts {
  int conforming = 0;
  int breaking = 0;
};

inline OutcomeCounts outcome_counts(std::span<const social::MeasuredBehavior> measured) {
  OutcomeCounts c;
  for (auto m : measured) {
    if (m == social::MeasuredBehavior::RoleConforming) {
      ++c.conforming;
    } else {
      ++c.breaking;
    }
  }
  return c;
}

enum class Trait { Compliance, Trust };

struct EntropyRow {
  int step = 0;
  double pooled = 0.0;
  RoleEntropies by_role;
};

inline std::vector<EntropyRow> entropy_series(const agents::TrajectoryRecord& rec, const HistogramSpec& spec = {},
                                              Trait trait = Trait::Compliance) {
  const auto& matrix = trait == Trait::Compliance ? rec.compliance : rec.trust;
  std::vector<EntropyRow> rows;
  rows.reserve(matrix.size());
  for (std::size_t s = 0; s < matrix.size(); ++s) {
    rows.push_back({static_cast<int>(s), shannon_entropy(matrix[s], spec), entropy_by_role(matrix[s], rec.roles, spec)});
  }
  return rows;
}

}  // namespace qnorm::metrics
