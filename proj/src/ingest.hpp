#pragma once

#include <array>
#include <istream>
#include <string>
#include <vector>

#include "model.hpp"

namespace genheck {

struct ModelConfig {
  std::string outcome;
  std::string selection;
  std::vector<std::string> outcome_covariates;
  std::vector<std::string> selection_covariates;
  std::vector<std::string> dispersion_covariates;
  std::vector<std::string> correlation_covariates;
  // Prepend an intercept column to the outcome, selection, dispersion and
  // correlation designs respectively.
  std::array<bool, 4> intercepts{true, true, true, true};
};

/// Splits RFC-4180 text into records. Throws ParseError naming the line.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

/// Builds a Dataset from CSV text with a header row. Missing markers (empty or
/// "NA") are allowed in the outcome only where the selection value is 0.
Dataset ingest(std::istream& in, const ModelConfig& config);
Dataset ingest_file(const std::string& path, const ModelConfig& config);

/// CSV with y and u followed by every distinct named design column other than
/// the intercept; unobserved outcomes are written as NA.
std::string dataset_to_csv(const Dataset& data);

}  // namespace genheck
