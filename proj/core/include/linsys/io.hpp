#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linsys/closure.hpp"
#include "linsys/designs.hpp"
#include "linsys/moments.hpp"
#include "linsys/testkit.hpp"

namespace linsys {

// Malformed input (bad JSON, bad CSV, schema violation, unreadable file).
// line/column are 1-based when known, 0 when not applicable.
class io_error : public std::runtime_error {
 public:
  io_error(const std::string& msg, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_ = 0, column_ = 0;
};

// JSON text <-> objects. Serialized doubles round-trip exactly.
Triple parse_triple_json(const std::string& text);
std::string triple_to_json(const Triple& t);
MomentModel parse_model_json(const std::string& text);
std::string model_to_json(const MomentModel& m);
std::string report_to_json(const MembershipReport& r);
TestOutcome parse_outcome_json(const std::string& text);
std::string outcome_to_json(const TestOutcome& o);
ConfidenceSet parse_confidence_json(const std::string& text);
std::string confidence_to_json(const ConfidenceSet& c);

// Scalar summary row (vector diagnostics live in the JSON form).
std::string outcome_to_csv(const TestOutcome& o);
ConfidenceSet parse_confidence_csv(const std::string& text);
std::string confidence_to_csv(const ConfidenceSet& c);

// Observation tables as plain CSV with a header of feature names.
Dataset parse_dataset_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& d);

// Header is fixed: value,reject_direct,se_direct,reject_screening,
// se_screening,reps,n. One row per grid point, grid order preserved.
RejectionCurve parse_curve_csv(const std::string& text);
std::string curve_to_csv(const RejectionCurve& c);

// Minimal standalone SVG: solid polyline (direct), dashed (screening),
// optional shaded vertical band, axes with ticks. Output is a pure
// function of the inputs.
std::string curve_to_svg(const RejectionCurve& c,
                         std::optional<std::pair<double, double>> band);

// "lo:hi:step" (inclusive endpoints, step > 0) or a single number.
std::vector<double> parse_grid(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace linsys
