#pragma once

#include <stdexcept>
#include <string>

namespace recpipe {

// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration file problems: schema violations, unknown strategy /
// metric / model names, malformed search domains.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data problems: missing files, malformed TSV lines, empty datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// Splitting problems: missing timestamps, overlapping fixed splits,
// empty train or test partitions.
class SplitError : public Error {
 public:
  using Error::Error;
};

// Model problems: unknown kind, invalid hyperparameter values.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Statistical test problems (insufficient paired data).
class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace recpipe
