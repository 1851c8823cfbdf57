#pragma once

#include "passivity/hamiltonian.hpp"
#include "passivity/model.hpp"
#include "passivity/verifier.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace passivity {

/// Malformed or invalid input. The message names the byte offset for syntax
/// errors and the JSON path of the offending field otherwise.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

// Models. Residues may be given as {re, im} objects or plain numbers.
PoleResidueModel model_from_json(const nlohmann::json& doc);
PoleResidueModel parse_model(std::string_view text);
PoleResidueModel load_model(const std::filesystem::path& path);
nlohmann::json model_to_json(const PoleResidueModel& model);

/// Rescales a model given in Hz to rad/s.
PoleResidueModel hz_to_rad(const PoleResidueModel& model);

/// Infinity is written as the string "inf".
nlohmann::json number_to_json(double value);
double number_from_json(const nlohmann::json& value, const std::string& path);

nlohmann::json band_to_json(const ViolationBand& band);
nlohmann::json bands_to_json(const std::vector<ViolationBand>& bands);

/// Verdict, bands and counts. Timing lives under "timing" only when asked
/// for, so reports without it are reproducible byte for byte.
nlohmann::json report_to_json(const PassivityReport& report, bool with_timing = true);
/// Restores the fields written by report_to_json; samples and trace are not
/// part of the report document.
PassivityReport report_from_json(const nlohmann::json& doc);

/// omega,zeta,phi,subband,is_violation with %.17g numbers.
std::string samples_csv(const PassivityReport& report);

nlohmann::json control_points_to_json(const ControlPointSet& points);
nlohmann::json crossings_to_json(const CrossingSet& crossings);
nlohmann::json verdict_to_json(const OracleVerdict& verdict);

/// One JSON object per line, per subband in order.
std::string trace_jsonl(const PassivityReport& report);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace passivity
