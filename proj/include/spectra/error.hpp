#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectra {

enum class ErrorKind {
  invalid_input,
  config,
  parse,
  length_mismatch,
  insufficient_data,
  too_small_corpus,
  io,
  infeasible_shift,
  zero_variance,
  degenerate_threshold,
  incompatible_summaries,
  divergence,
  undefined_auc,
  bridge_protocol,
  bridge_timeout,
  bridge_dimension,
  bridge_process,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the toolkit; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_bridge() const noexcept {
    return kind_ == ErrorKind::bridge_protocol || kind_ == ErrorKind::bridge_timeout ||
           kind_ == ErrorKind::bridge_dimension || kind_ == ErrorKind::bridge_process;
  }

 private:
  ErrorKind kind_;
};

}  // namespace spectra
