#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace railagent {

enum class ObservationKind { Success, ErrorInfo };

/// Machine-readable failure codes attached to ErrorInfo observations. They
/// travel with the trace (not the prompt) so evaluation can classify
/// failures even when the prompt only carries bare "no result" text.
namespace errc {
inline constexpr const char* kStationNotFound = "StationNotFound";
inline constexpr const char* kNoDirectService = "NoDirectService";
inline constexpr const char* kNoService = "NoService";
inline constexpr const char* kTimeWindowEmpty = "TimeWindowEmpty";
inline constexpr const char* kInvalidTime = "InvalidTime";
inline constexpr const char* kUnresolvableDate = "UnresolvableDate";
inline constexpr const char* kDateInPast = "DateInPast";
inline constexpr const char* kUnknownCity = "UnknownCity";
inline constexpr const char* kForecastUnavailable = "ForecastUnavailable";
inline constexpr const char* kProviderError = "ProviderError";
inline constexpr const char* kSlotExtractionFailed = "SlotExtractionFailed";
inline constexpr const char* kTransportError = "TransportError";
inline constexpr const char* kNoUserUtterance = "NoUserUtterance";
inline constexpr const char* kEmptyRecommendation = "EmptyRecommendation";
inline constexpr const char* kToolException = "ToolException";
}  // namespace errc

struct ObservationResult {
  ObservationKind kind = ObservationKind::Success;
  std::string text;
  std::string error_code;  // empty on Success
  std::optional<nlohmann::ordered_json> payload;

  bool ok() const { return kind == ObservationKind::Success; }

  static ObservationResult success(std::string text,
                                   std::optional<nlohmann::ordered_json> payload = std::nullopt) {
    return {ObservationKind::Success, std::move(text), {}, std::move(payload)};
  }
  static ObservationResult error(std::string code, std::string text,
                                 std::optional<nlohmann::ordered_json> payload = std::nullopt) {
    return {ObservationKind::ErrorInfo, std::move(text), std::move(code), std::move(payload)};
  }

  friend bool operator==(const ObservationResult&, const ObservationResult&) = default;
};

}  // namespace railagent
