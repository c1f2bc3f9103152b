#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collapse {

enum class Errc {
  empty_vector,
  negative_entry,
  sum_not_one,
  dimension_mismatch,
  invalid_generation,
  invalid_schedule,
  empty_training_set,
  no_collapsed_replicates,
  out_of_range,
  shape_mismatch,
  empty_context,
  non_convergence,
  infeasible_target,
  parse_error,
  validation_error,
  unknown_figure,
  io_error,
};

std::string_view to_string(Errc code);

/// Validation-class errors map to CLI exit code 1, everything else to 2.
bool is_validation_error(Errc code);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace collapse
