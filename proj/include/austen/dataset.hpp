#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace austen {

/// Observed outcome, binary treatment and named covariate columns.
struct Dataset {
  std::vector<double> y;
  std::vector<int> t;
  std::vector<std::string> covariate_names;
  std::vector<std::vector<double>> covariates;  // one vector per column

  std::size_t size() const noexcept { return y.size(); }

  /// Throws InputError on ragged columns, duplicate names, non-finite values
  /// or t outside {0,1}.
  void validate() const;

  /// Index of a named column; throws InputError when absent.
  std::size_t column_index(const std::string& name) const;
};

}  // namespace austen
