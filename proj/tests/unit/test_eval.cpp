#include <doctest.h>

#include <fstream>
#include <sstream>

#include "railagent/eval.hpp"
#include "railagent/simulator.hpp"
#include "test_support.hpp"

using namespace railagent;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const SharedStores& stores() {
  static const auto s = load_stores(AppConfig::defaults(testsupport::data_dir()));
  return s;
}

const std::vector<ScenarioResult>& pack_results() {
  static const auto r = [] {
    SuiteContext ctx{stores(), AppConfig::defaults(testsupport::data_dir())};
    return run_suite(load_scenarios(testsupport::data_dir() / "scenarios"), ctx);
  }();
  return r;
}

const ordered_json& pack_report() {
  static const auto r = build_report(pack_results(), *stores().corpus);
  return r;
}

QtaoStep tool_step(int n, ToolName tool, SlotMap input, ObservationResult obs) {
  return {n, "t", ToolCall{tool, std::move(input)}, std::move(obs)};
}

Scenario ticket_scenario(ordered_json expected) {
  Scenario s;
  s.scenario_id = "x";
  s.task = ScenarioTask::Ticketing;
  s.turns = {"q"};
  s.expected = std::move(expected);
  s.clock = testsupport::at("2025-01-01T09:00");
  return s;
}

}  // namespace

TEST_CASE("accuracy and mean iterations") {
  std::vector<OutcomeRecord> r = {{true, 1, {}}, {true, 3, {}}, {false, 5, FailureCause::Date}, {true, 2, {}}};
  CHECK(accuracy(r) == 0.75);
  CHECK(mean_qtao(r, false) == 11.0 / 4.0);
  CHECK(mean_qtao(r, true) == 2.0);
  CHECK(accuracy(std::vector<OutcomeRecord>{}) == 0.0);
}

TEST_CASE("iteration distribution counts successes in four buckets") {
  std::vector<OutcomeRecord> r = {{true, 1, {}}, {true, 1, {}}, {true, 2, {}}, {true, 3, {}}, {false, 1, {}}};
  auto d = iteration_distribution(r);
  CHECK(d.total == 4);
  CHECK(d.fraction(0) == 0.5);
  CHECK(d.fraction(1) == 0.25);
  CHECK(d.fraction(2) == 0.25);
  CHECK(d.fraction(3) == 0.0);
  CHECK(mean_qtao(r, true) == 1.75);
  std::vector<OutcomeRecord> long_runs = {{true, 4, {}}, {true, 9, {}}};
  CHECK(iteration_distribution(long_runs).counts[3] == 2);
}

TEST_CASE("cause distribution excludes unclassifiable failures") {
  std::vector<OutcomeRecord> r = {{false, 2, FailureCause::Station}, {false, 2, FailureCause::Date},
                                  {false, 2, FailureCause::Date},    {false, 2, FailureCause::Unclassifiable},
                                  {false, 2, std::nullopt},          {true, 1, {}}};
  auto d = cause_distribution(r);
  CHECK(d.classified() == 3);
  CHECK(d.unclassifiable == 2);
  CHECK(d.fraction(FailureCause::Station) == doctest::Approx(1.0 / 3.0));
  CHECK(d.fraction(FailureCause::Date) == doctest::Approx(2.0 / 3.0));
  CHECK(d.fraction(FailureCause::City) == 0.0);
  for (auto c : kTableCauses) CHECK(parse_cause(cause_name(c)) == c);
}

TEST_CASE("Prop@k") {
  const auto& c = *stores().corpus;
  std::vector<std::vector<std::string>> lists = {
      {"Chongqing Noodle", "Spicy Chicken Burger", "Moon Cake", "Mango Pomelo Sago", "shanghai soup dumplings",
       "Not A Dish"}};
  CHECK(prop_at_k(lists, c, 5) == doctest::Approx(0.8));
  CHECK(prop_at_k(lists, c, 1) == 1.0);
  CHECK(prop_at_k(lists, c, 10) == doctest::Approx(4.0 / 6.0));
  lists.push_back({});
  CHECK(prop_at_k(lists, c, 5) == doctest::Approx(0.4));
}

TEST_CASE("Recall@k") {
  std::vector<RankedSession> s = {{{"a", "b", "c", "d", "e", "f", "gt", "h"}, "gt"}};
  CHECK(recall_at_k(s, 5) == 0.0);
  CHECK(recall_at_k(s, 7) == 1.0);
  CHECK(recall_at_k(s, 10) == 1.0);
  s.push_back({{"gt2"}, "gt2"});
  s.push_back({{"", "", ""}, "gt3"});
  CHECK(recall_at_k(s, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(recall_at_k(s, 10) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("failure classification from error codes") {
  auto s = ticket_scenario({{"trains", {"G8505"}}});
  QtaoTrace t;
  t.steps.push_back(tool_step(1, ToolName::Ticketing, {{"date", "someday"}},
                              ObservationResult::error("UnresolvableDate", "no matching trains found")));
  CHECK(classify_failure(t, s) == FailureCause::Date);

  QtaoTrace first;
  first.steps.push_back(tool_step(1, ToolName::Ticketing, {}, ObservationResult::error("StationNotFound", "x")));
  first.steps.push_back(tool_step(2, ToolName::Ticketing, {}, ObservationResult::error("TimeWindowEmpty", "x")));
  CHECK(classify_failure(first, s) == FailureCause::Station);

  QtaoTrace missing;
  missing.steps.push_back(tool_step(1, ToolName::Ticketing, {},
                                    ObservationResult::error("SlotExtractionFailed", "x",
                                                             ordered_json{{"missing", {"time"}}})));
  CHECK(classify_failure(missing, s) == FailureCause::Time);
  auto w = s;
  w.task = ScenarioTask::Weather;
  w.expected = {{"city", "Beijing"}, {"date", "2025-01-02"}};
  missing.steps[0].action = ToolCall{ToolName::Weather, {}};
  CHECK(classify_failure(missing, w) == FailureCause::Date);

  QtaoTrace city;
  city.steps.push_back(tool_step(1, ToolName::Weather, {}, ObservationResult::error("UnknownCity", "x")));
  CHECK(classify_failure(city, w) == FailureCause::City);
}

TEST_CASE("failure classification falls back to the last tool input") {
  auto s = ticket_scenario({{"trains", {"G8505"}},
                            {"slots", {{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "tomorrow"},
                                       {"time", "afternoon"}}}});
  auto trace_with = [](SlotMap input) {
    QtaoTrace t;
    t.steps.push_back(tool_step(1, ToolName::Ticketing, std::move(input), ObservationResult::success("ok", ordered_json::object())));
    t.steps.push_back({2, "t", FinalAnswer{"a"}, std::nullopt});
    return t;
  };
  CHECK(classify_failure(trace_with({{"from", "Chongqing West"}, {"to", "Chengdu East"}, {"date", "tomorrow"}}), s) ==
        FailureCause::Station);
  CHECK(classify_failure(trace_with({{"from", "Chongqing North station"}, {"to", "Chengdu East"},
                                     {"date", "2025-01-03"}, {"time", "afternoon"}}),
                         s) == FailureCause::Date);
  CHECK(classify_failure(trace_with({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "2025-01-02"},
                                     {"time", "morning"}}),
                         s) == FailureCause::Time);
  CHECK(classify_failure(trace_with({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "2025-01-02"},
                                     {"time", "12:00-18:00"}}),
                         s) == FailureCause::Unclassifiable);
  CHECK(classify_failure(QtaoTrace{}, s) == FailureCause::Unclassifiable);
  auto no_slots = ticket_scenario({{"trains", {"G8505"}}});
  CHECK(classify_failure(trace_with({{"from", "Chongqing West"}}), no_slots) == FailureCause::Unclassifiable);
}

TEST_CASE("scenario loading errors") {
  auto base = json{{"scenario_id", "a"}, {"task", "weather"}, {"turns", {"q"}}, {"clock", "2025-01-01T09:00"},
                   {"expected", {{"city", "Beijing"}, {"date", "2025-01-02"}}}, {"script", json::array()}};
  CHECK_NOTHROW(parse_scenario(base, "."));
  auto broken = [&](auto mutate) {
    auto j = base;
    mutate(j);
    return j;
  };
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["task"] = "flights"; }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j.erase("clock"); }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["clock"] = "tomorrow"; }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["turns"] = json::array(); }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["expected"] = {{"city", "X"}}; }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["script"] = "missing.json"; }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(broken([](json& j) { j["profile"] = {{"age", -1}}; }), "."), ScenarioLoadError);
  CHECK_THROWS_AS(parse_scenario(json::array(), "."), ScenarioLoadError);

  auto dir = testsupport::temp_dir("scenarios");
  std::ofstream(dir / "one.json") << base.dump();
  std::ofstream(dir / "two.json") << json::array({base}).dump();
  CHECK_THROWS_AS(load_scenarios(dir), ScenarioLoadError);
  std::ofstream(dir / "two.json") << "{";
  CHECK_THROWS_AS(load_scenarios(dir), ScenarioLoadError);
  std::filesystem::remove(dir / "two.json");
  CHECK(load_scenarios(dir).size() == 1);
  CHECK_THROWS_AS(load_scenarios(dir / "nope"), ScenarioLoadError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a crashing scenario is an unclassifiable failure") {
  auto s = parse_scenario(
      json{{"scenario_id", "boom"}, {"task", "weather"}, {"turns", {"q"}}, {"clock", "2025-01-01T09:00"},
           {"expected", {{"city", "Beijing"}, {"date", "2025-01-02"}}}, {"script", json::array()}},
      ".");
  SuiteContext ctx{stores(), AppConfig::defaults(testsupport::data_dir())};
  auto r = run_scenario(s, ctx);
  CHECK_FALSE(r.success);
  CHECK(r.error);
  CHECK(r.failure_cause == FailureCause::Unclassifiable);
}

TEST_CASE("scenario pack per-group results") {
  const auto& g = pack_report()["groups"];
  CHECK(g[kGroupTicketingWith]["scenarios"] == 10);
  CHECK(g[kGroupTicketingWith]["successes"] == 4);
  CHECK(g[kGroupTicketingWithout]["scenarios"] == 6);
  CHECK(g[kGroupTicketingWithout]["successes"] == 2);
  CHECK(g[kGroupWeather]["scenarios"] == 9);
  CHECK(g[kGroupWeather]["successes"] == 4);
  for (const auto& r : pack_results()) {
    if (r.task == ScenarioTask::Recommendation) continue;
    CHECK_MESSAGE(!r.error, r.scenario_id);
    CHECK(r.success == !r.failure_cause.has_value());
  }
}

TEST_CASE("recommendation pack matches the hand tally") {
  const auto& rec = pack_report()["recommendation"];
  CHECK(rec["sessions"] == 25);
  CHECK(rec["accepted"] == 23);
  CHECK(rec["recall_at_k"]["aligned"]["1"].get<double>() == doctest::Approx(0.20));
  CHECK(rec["recall_at_k"]["aligned"]["5"].get<double>() == doctest::Approx(0.60));
  CHECK(rec["recall_at_k"]["aligned"]["10"].get<double>() == doctest::Approx(0.92));
  CHECK(rec["recall_at_k"]["zero_shot"]["1"].get<double>() == doctest::Approx(0.12));
  CHECK(rec["recall_at_k"]["zero_shot"]["5"].get<double>() == doctest::Approx(0.36));
  CHECK(rec["recall_at_k"]["zero_shot"]["10"].get<double>() == doctest::Approx(0.56));
  for (const char* k : {"1", "5", "10"}) CHECK(rec["prop_at_k"]["aligned"][k] == 1.0);
}

TEST_CASE("parallel and serial suite runs agree") {
  SuiteContext ctx{stores(), AppConfig::defaults(testsupport::data_dir())};
  auto scenarios = load_scenarios(testsupport::data_dir() / "scenarios");
  auto serial = run_suite_serial(scenarios, ctx);
  CHECK(build_report(serial, *stores().corpus).dump() == pack_report().dump());
}

TEST_CASE("golden report is byte-stable") {
  std::ifstream in(testsupport::data_dir() / "golden" / "report.json");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == pack_report().dump(2) + "\n");
}

TEST_CASE("report schema") {
  const auto& r = pack_report();
  for (const char* key : {"model", "ks", "scenario_count", "scenarios", "groups", "recommendation"})
    CHECK(r.contains(key));
  for (const char* grp : {kGroupTicketingWithout, kGroupTicketingWith, kGroupWeather})
    for (const char* key : {"scenarios", "successes", "accuracy", "mean_qtao_all", "mean_qtao_success", "qtao_counts",
                            "qtao_distribution", "failure_counts", "failure_distribution", "unclassifiable"})
      CHECK(r["groups"][grp].contains(key));
  auto tables = render_tables(r);
  for (int t = 1; t <= 5; ++t) CHECK(tables.find("Table " + std::to_string(t) + ".") != std::string::npos);
}

TEST_CASE("user simulator") {
  const auto& c = *stores().corpus;
  for (const auto& item : c.items()) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      for (int budget = 1; budget <= 5; ++budget) {
        UserSimulator a(item, c.legend(), seed, budget), b(item, c.legend(), seed, budget);
        CHECK(a.preference_statements() == b.preference_statements());
        std::string all;
        int turns = 0;
        while (auto u = a.next_utterance({})) {
          CHECK(*u == *b.next_utterance({}));
          all += *u;
          ++turns;
        }
        CHECK(turns == budget);
        for (const auto& fact : a.preference_statements()) CHECK(all.find(fact) != std::string::npos);
        CHECK(all.rfind("Hi,", 0) == 0);
      }
    }
  }
  const auto& target = *c.find_id("D002");
  UserSimulator sim(target, c.legend(), 1);
  std::vector<std::string> ranked = {"D001", "D003", "D002"};
  CHECK(sim.accepts(ranked, 3));
  CHECK_FALSE(sim.accepts(ranked, 2));
  CHECK_THROWS_AS(UserSimulator(target, c.legend(), 1, 0), std::invalid_argument);
  auto& facts = sim.preference_statements();
  CHECK(std::find(facts.begin(), facts.end(), "My budget is up to 30 yuan.") != facts.end());
}
