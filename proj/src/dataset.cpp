#include "austen/dataset.hpp"

#include <cmath>
#include <set>

#include "austen/errors.hpp"

namespace austen {

void Dataset::validate() const {
  const std::size_t n = y.size();
  if (t.size() != n) throw InputError("dataset: y and t differ in length");
  if (covariates.size() != covariate_names.size()) {
    throw InputError("dataset: covariate names and columns differ in count");
  }
  std::set<std::string> seen;
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (!seen.insert(covariate_names[j]).second) {
      throw InputError("dataset: duplicate covariate name '" + covariate_names[j] + "'");
    }
    if (covariates[j].size() != n) {
      throw InputError("dataset: column '" + covariate_names[j] + "' has wrong length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(covariates[j][i])) {
        throw InputError("dataset: non-finite value in row " + std::to_string(i) + ", column '" +
                         covariate_names[j] + "'");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) throw InputError("dataset: non-finite y in row " + std::to_string(i));
    if (t[i] != 0 && t[i] != 1) {
      throw InputError("dataset: t must be 0 or 1 in row " + std::to_string(i));
    }
  }
}

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < covariate_names.size(); ++j) {
    if (covariate_names[j] == name) return j;
  }
  throw InputError("dataset has no covariate column '" + name + "'");
}

}  // namespace austen
