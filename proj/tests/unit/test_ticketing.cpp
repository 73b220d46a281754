#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "railagent/ticketing.hpp"
#include "test_support.hpp"

using namespace railagent;
using nlohmann::json;

namespace {

const ScheduleStore& store() {
  static const auto s = ScheduleStore::load(testsupport::data_dir() / "timetable" / "sample_timetable.jsonl");
  return s;
}

const FixedClock& clock0() {
  static const FixedClock c(testsupport::at("2025-01-01T09:00"));
  return c;
}

std::vector<std::string> shown_trains(const ObservationResult& obs) {
  std::vector<std::string> out;
  for (const auto& t : obs.payload->at("trains")) out.push_back(t.at("train_no").get<std::string>());
  return out;
}

// Independent recount straight from the fixture file: departure-time order,
// ties broken by train number, first three.
std::vector<std::string> oracle_top3(const std::string& dep, const std::string& arr, const std::string& date,
                                     const std::string& from_hhmm, const std::string& to_hhmm) {
  std::ifstream in(testsupport::data_dir() / "timetable" / "sample_timetable.jsonl");
  std::vector<std::pair<std::string, std::string>> hits;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line);
    if (j["kind"] != "service" || j["dep"] != dep || j["arr"] != arr) continue;
    auto dt = j["dep_time"].get<std::string>();
    if (dt.substr(0, 10) != date) continue;
    auto hm = dt.substr(11, 5);
    if (hm < from_hhmm || hm >= to_hhmm) continue;
    hits.emplace_back(dt, j["train_no"].get<std::string>());
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> out;
  for (size_t i = 0; i < hits.size() && i < 3; ++i) out.push_back(hits[i].second);
  return out;
}

std::string hhmm(int m) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", m / 60, m % 60);
  return buf;
}

}  // namespace

TEST_CASE("station resolution") {
  auto exact = store().resolve_station("Chongqing North Station");
  CHECK(exact.kind == StationResolution::Kind::Exact);
  CHECK(exact.stations[0]->station_id == "CQN");
  auto group = store().resolve_station("Chengdu Station");
  CHECK(group.kind == StationResolution::Kind::CityGroup);
  CHECK(group.stations.size() == 2);
  CHECK(store().resolve_station("Atlantis").kind == StationResolution::Kind::NotFound);
  CHECK(store().resolve_station("").kind == StationResolution::Kind::NotFound);
}

TEST_CASE("time windows") {
  CHECK(parse_time_window("afternoon") == TimeWindow{720, 1080});
  CHECK(parse_time_window("Evening") == TimeWindow{1080, 1440});
  CHECK(parse_time_window("08:30-11:00") == TimeWindow{510, 660});
  CHECK_FALSE(parse_time_window(""));
  CHECK_FALSE(parse_time_window("any"));
  CHECK_THROWS_AS(parse_time_window("11:00-08:00"), std::invalid_argument);
  CHECK_THROWS_AS(parse_time_window("teatime"), std::invalid_argument);
  TimeWindow w{720, 1080};
  CHECK(w.contains(720));
  CHECK_FALSE(w.contains(1080));
}

TEST_CASE("afternoon Chongqing North to Chengdu East shows the top three by departure") {
  auto obs = ticketing_from_slots({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "tomorrow"},
                                   {"time", "afternoon"}},
                                  store(), clock0(), true);
  REQUIRE(obs.ok());
  CHECK(shown_trains(obs) == oracle_top3("CQN", "CDE", "2025-01-02", "12:00", "18:00"));
  CHECK(shown_trains(obs) == std::vector<std::string>{"G8505", "G8507", "G8509"});
  CHECK(obs.text.rfind("Found 4 train(s) from Chongqing North to Chengdu East", 0) == 0);
}

TEST_CASE("random windows agree with the file recount") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    int a = static_cast<int>(rng() % 1440);
    int b = a + 1 + static_cast<int>(rng() % (1440 - a));
    auto expected = oracle_top3("CQN", "CDE", "2025-01-02", hhmm(a), b == 1440 ? "24:00" : hhmm(b));
    TicketQuery q{"Chongqing North", "Chengdu East", *parse_date("2025-01-02"), TimeWindow{a, b}};
    auto obs = query_tickets(q, store(), true);
    if (obs.ok()) {
      CHECK(shown_trains(obs) == expected);
    } else {
      CHECK(expected.empty());
      CHECK((obs.error_code == "TimeWindowEmpty" || obs.error_code == "NoDirectService"));
    }
  }
}

TEST_CASE("city-level names get the nearest alternative route") {
  auto obs = ticketing_from_slots({{"from", "Chongqing Station"}, {"to", "Chengdu Station"}, {"date", "tomorrow"},
                                   {"time", "afternoon"}},
                                  store(), clock0(), true);
  CHECK(obs.error_code == "NoDirectService");
  CHECK(obs.text.find("no direct train service exists") != std::string::npos);
  CHECK(obs.payload->at("suggestion")["from"] == "Chongqing North");
  CHECK(obs.payload->at("suggestion")["to"] == "Chengdu East");
  CHECK(obs.payload->at("suggestion")["services"] == 4);
}

TEST_CASE("error info off yields the bare text but keeps the code") {
  auto obs = ticketing_from_slots({{"from", "Chongqing Station"}, {"to", "Chengdu Station"}, {"date", "tomorrow"}},
                                  store(), clock0(), false);
  CHECK(obs.text == kBareNoTrains);
  CHECK(obs.error_code == "NoDirectService");
}

TEST_CASE("failure codes") {
  auto run = [](SlotMap s) { return ticketing_from_slots(s, store(), clock0(), true).error_code; };
  CHECK(run({{"from", "Atlantis"}, {"to", "Chengdu East"}, {"date", "tomorrow"}}) == "StationNotFound");
  CHECK(run({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "next month"}}) == "UnresolvableDate");
  CHECK(run({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "2024-12-31"}}) == "DateInPast");
  CHECK(run({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "tomorrow"}, {"time", "05:00-06:00"}}) ==
        "TimeWindowEmpty");
  CHECK(run({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "tomorrow"}, {"time", "teatime"}}) ==
        "InvalidTime");
  CHECK(run({{"from", "Beijing South"}, {"to", "Chengdu East"}, {"date", "tomorrow"}}) == "NoService");
  CHECK(run({{"from", "Chongqing North"}, {"to", "Chengdu East"}, {"date", "2025-01-02"}}).empty());
}

TEST_CASE("timetable loading rejects broken rows") {
  auto dir = testsupport::temp_dir("timetable");
  {
    std::ofstream out(dir / "t.jsonl");
    out << R"({"kind": "station", "station_id": "A", "name": "Alpha", "city": "X"})" << "\n"
        << R"({"kind": "service", "train_no": "T1", "dep": "A", "arr": "Z", "dep_time": "2025-01-02T07:10", "arr_time": "2025-01-02T08:00", "seats": []})"
        << "\n";
  }
  CHECK_THROWS_AS(ScheduleStore::load(dir / "t.jsonl"), TimetableError);
  CHECK_THROWS(ScheduleStore::load(dir / "missing.jsonl"));
  std::filesystem::remove_all(dir);
}
