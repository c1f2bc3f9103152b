#include "collapse/error.hpp"

namespace collapse {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::empty_vector: return "EmptyVector";
    case Errc::negative_entry: return "NegativeEntry";
    case Errc::sum_not_one: return "SumNotOne";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_generation: return "InvalidGeneration";
    case Errc::invalid_schedule: return "InvalidSchedule";
    case Errc::empty_training_set: return "EmptyTrainingSet";
    case Errc::no_collapsed_replicates: return "NoCollapsedReplicates";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_context: return "EmptyContext";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::infeasible_target: return "InfeasibleTarget";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::unknown_figure: return "UnknownFigure";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) {
  switch (code) {
    case Errc::empty_vector:
    case Errc::negative_entry:
    case Errc::sum_not_one:
    case Errc::dimension_mismatch:
    case Errc::invalid_schedule:
    case Errc::out_of_range:
    case Errc::infeasible_target:
    case Errc::parse_error:
    case Errc::validation_error:
    case Errc::unknown_figure:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

} // namespace collapse
