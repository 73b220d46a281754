#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "railagent/clock.hpp"
#include "railagent/config.hpp"
#include "railagent/metrics.hpp"
#include "railagent/platform.hpp"
#include "railagent/qtao.hpp"
#include "railagent/recommender.hpp"

namespace railagent {

class ScenarioLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioTask { Ticketing, Weather, Recommendation };
std::string_view task_name(ScenarioTask t);

/// One evaluation case. `expected` depends on the task:
///   ticketing       {"trains": [...], "slots"?: {from, to, date, time}}
///   weather         {"city", "date", "slots"?: {place, time}}
///   recommendation  {"item_id"}
struct Scenario {
  std::string scenario_id;
  ScenarioTask task = ScenarioTask::Ticketing;
  std::vector<std::string> turns;
  nlohmann::ordered_json expected;
  std::optional<LocalTime> clock;
  nlohmann::json script;  // backend fixture, resolved to inline entries
  bool error_info = true;
  PassengerProfile profile;
  std::uint64_t seed = 0;
  int turn_budget = 3;
};

Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Every *.json file under `dir`, sorted by scenario_id.
std::vector<Scenario> load_scenarios(const std::filesystem::path& dir);

struct ScenarioResult {
  std::string scenario_id;
  ScenarioTask task = ScenarioTask::Ticketing;
  bool error_info = true;
  bool success = false;
  int qtao_iterations = 0;
  std::optional<FailureCause> failure_cause;
  std::string outcome;
  std::optional<std::string> error;  // crash message
  std::vector<std::string> trace_records;

  // Recommendation only. One entry per recommender call.
  std::vector<std::vector<std::string>> preliminary_lists;
  std::vector<std::vector<std::string>> aligned_lists;
  std::vector<std::string> final_preliminary_ids;  // exact-name mapping, "" when absent
  std::vector<std::string> final_aligned_ids;
  std::string ground_truth;
  int dialogue_turns = 0;

  OutcomeRecord record() const { return {success, qtao_iterations, failure_cause}; }
};

using BackendFactory = std::function<std::unique_ptr<LlmBackend>(const Scenario&)>;
/// Builds a ScriptedBackend from the scenario's script.
std::unique_ptr<LlmBackend> scripted_backend_for(const Scenario& s);

struct SuiteContext {
  const SharedStores& stores;
  AppConfig config;
  BackendFactory backend = scripted_backend_for;
  int k_max = 10;
};

ScenarioResult run_scenario(const Scenario& s, const SuiteContext& ctx);
/// Scenarios run in parallel; results are returned ordered by scenario_id.
std::vector<ScenarioResult> run_suite(const std::vector<Scenario>& scenarios, const SuiteContext& ctx);
std::vector<ScenarioResult> run_suite_serial(const std::vector<Scenario>& scenarios, const SuiteContext& ctx);

/// Maps a failed round to Station/City/Date/Time from its ErrorInfo codes
/// (first in trace order), falling back to a comparison of the last tool
/// input against the expected slots. Unclassifiable otherwise.
FailureCause classify_failure(const QtaoTrace& trace, const Scenario& scenario);

/// Column groups of the iteration and failure tables.
inline constexpr const char* kGroupTicketingWithout = "ticketing_wo_error_info";
inline constexpr const char* kGroupTicketingWith = "ticketing_w_error_info";
inline constexpr const char* kGroupWeather = "weather";
std::string group_of(const ScenarioResult& r);

struct ReportOptions {
  std::string model = "scripted";
  std::vector<int> ks = {1, 5, 10};
};

/// Machine-readable report; deterministic for a fixed result list.
nlohmann::ordered_json build_report(const std::vector<ScenarioResult>& results, const Corpus& corpus,
                                    const ReportOptions& options = {});
/// Human-readable tables: accuracy and #QTAO, iteration distribution,
/// failure causes, Prop@k and Recall@k.
std::string render_tables(const nlohmann::ordered_json& report);

}  // namespace railagent
