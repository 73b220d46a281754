#include "railagent/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "railagent/simulator.hpp"
#include "railagent/text.hpp"
#include "railagent/ticketing.hpp"

namespace railagent {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view task_name(ScenarioTask t) {
  switch (t) {
    case ScenarioTask::Ticketing: return "ticketing";
    case ScenarioTask::Weather: return "weather";
    case ScenarioTask::Recommendation: return "recommendation";
  }
  return "ticketing";
}

namespace {

[[noreturn]] void load_fail(const std::string& where, const std::string& msg) {
  throw ScenarioLoadError(where + ": " + msg);
}

json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ScenarioLoadError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioLoadError(p.string() + ": " + e.what());
  }
}

}  // namespace

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  Scenario s;
  std::string where = base_dir.string();
  if (!j.is_object()) load_fail(where, "scenario must be an object");
  try {
    s.scenario_id = j.at("scenario_id").get<std::string>();
    where += " (" + s.scenario_id + ")";
    if (trim(s.scenario_id).empty()) load_fail(where, "empty scenario_id");

    auto task = j.at("task").get<std::string>();
    if (task == "ticketing")
      s.task = ScenarioTask::Ticketing;
    else if (task == "weather")
      s.task = ScenarioTask::Weather;
    else if (task == "recommendation")
      s.task = ScenarioTask::Recommendation;
    else
      load_fail(where, "unknown task \"" + task + "\"");

    if (j.contains("turns")) s.turns = j["turns"].get<std::vector<std::string>>();
    s.expected = ordered_json::parse(j.at("expected").dump());
    if (j.contains("clock") && !j["clock"].is_null()) {
      s.clock = parse_datetime(j["clock"].get<std::string>());
      if (!s.clock) load_fail(where, "bad clock \"" + j["clock"].get<std::string>() + "\"");
    }
    s.error_info = j.value("error_info", true);
    if (j.contains("profile")) s.profile = profile_from_json(j["profile"]);
    s.seed = j.value("seed", std::uint64_t{0});
    s.turn_budget = j.value("turn_budget", 3);

    const auto& script = j.at("script");
    if (script.is_string()) {
      std::filesystem::path p = script.get<std::string>();
      s.script = read_json_file(p.is_absolute() ? p : base_dir / p);
    } else {
      s.script = script;
    }
  } catch (const json::exception& e) {
    load_fail(where, e.what());
  } catch (const std::invalid_argument& e) {
    load_fail(where, e.what());
  }

  const auto& e = s.expected;
  switch (s.task) {
    case ScenarioTask::Ticketing:
      if (!e.contains("trains") || !e["trains"].is_array()) load_fail(where, "expected.trains must be an array");
      break;
    case ScenarioTask::Weather:
      if (!e.contains("city") || !e.contains("date") || !parse_date(e["date"].get<std::string>()))
        load_fail(where, "expected needs city and an ISO date");
      break;
    case ScenarioTask::Recommendation:
      if (!e.contains("item_id") || !e["item_id"].is_string()) load_fail(where, "expected.item_id must be a string");
      if (s.turn_budget < 1 || s.turn_budget > 5) load_fail(where, "turn_budget must be in 1..5");
      break;
  }
  if (s.task != ScenarioTask::Recommendation) {
    if (!s.clock) load_fail(where, "clock is required for date-bearing tasks");
    if (s.turns.empty()) load_fail(where, "turns must not be empty");
  }
  return s;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ScenarioLoadError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& de : std::filesystem::directory_iterator(dir))
    if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
  std::sort(files.begin(), files.end());

  std::vector<Scenario> out;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto j = read_json_file(f);
    auto add = [&](const json& item) {
      auto s = parse_scenario(item, f.parent_path());
      if (!ids.insert(s.scenario_id).second)
        throw ScenarioLoadError(f.string() + ": duplicate scenario_id " + s.scenario_id);
      out.push_back(std::move(s));
    };
    if (j.is_array())
      for (const auto& item : j) add(item);
    else
      add(j);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.scenario_id < b.scenario_id; });
  return out;
}

std::unique_ptr<LlmBackend> scripted_backend_for(const Scenario& s) {
  return std::unique_ptr<LlmBackend>(new ScriptedBackend(ScriptedBackend::from_json(s.script)));
}

namespace {

std::optional<FailureCause> cause_from_code(const ObservationResult& obs, ToolName tool) {
  const auto& c = obs.error_code;
  if (c == errc::kStationNotFound || c == errc::kNoDirectService) return FailureCause::Station;
  if (c == errc::kUnknownCity) return FailureCause::City;
  if (c == errc::kUnresolvableDate || c == errc::kDateInPast || c == errc::kNoService ||
      c == errc::kForecastUnavailable)
    return FailureCause::Date;
  if (c == errc::kTimeWindowEmpty || c == errc::kInvalidTime) return FailureCause::Time;
  if (c == errc::kSlotExtractionFailed && obs.payload && obs.payload->contains("missing")) {
    for (const auto& m : (*obs.payload)["missing"]) {
      auto slot = m.get<std::string>();
      if (slot == "from" || slot == "to") return FailureCause::Station;
      if (slot == "place") return FailureCause::City;
      if (slot == "date") return FailureCause::Date;
      if (slot == "time") return tool == ToolName::Weather ? FailureCause::Date : FailureCause::Time;
    }
  }
  return std::nullopt;
}

ToolName tool_for(ScenarioTask t) { return t == ScenarioTask::Weather ? ToolName::Weather : ToolName::Ticketing; }

const ToolCall* last_call(const QtaoTrace& trace, ToolName tool) {
  const ToolCall* found = nullptr;
  for (const auto& st : trace.steps)
    if (const auto* c = std::get_if<ToolCall>(&st.action); c && c->tool == tool) found = c;
  return found;
}

const ObservationResult* last_success(const QtaoTrace& trace, ToolName tool) {
  const ObservationResult* found = nullptr;
  for (const auto& st : trace.steps) {
    const auto* c = std::get_if<ToolCall>(&st.action);
    if (c && c->tool == tool && st.observation && st.observation->ok() && st.observation->payload)
      found = &*st.observation;
  }
  return found;
}

std::string slot_or_empty(const SlotMap& m, std::string_view key) {
  auto v = m.get(std::string(key));
  return v ? trim(*v) : std::string();
}

std::optional<Days> resolve_or_null(const std::string& expr, Days today) {
  return resolve_date_expression(expr, today);
}

std::optional<TimeWindow> window_or_null(const std::string& expr) {
  try {
    return parse_time_window(expr);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

FailureCause classify_failure(const QtaoTrace& trace, const Scenario& scenario) {
  const ToolName tool = tool_for(scenario.task);
  for (const auto& st : trace.steps) {
    if (!st.observation || st.observation->ok()) continue;
    const auto* c = std::get_if<ToolCall>(&st.action);
    if (auto cause = cause_from_code(*st.observation, c ? c->tool : tool)) return *cause;
  }

  const auto* call = last_call(trace, tool);
  if (!call || !scenario.clock) return FailureCause::Unclassifiable;
  const Days today = std::chrono::floor<std::chrono::days>(*scenario.clock);
  const auto& e = scenario.expected;

  if (scenario.task == ScenarioTask::Weather) {
    if (normalize_name(slot_or_empty(call->input, "place")) != normalize_name(e["city"].get<std::string>()))
      return FailureCause::City;
    if (resolve_or_null(slot_or_empty(call->input, "time"), today) != parse_date(e["date"].get<std::string>()))
      return FailureCause::Date;
    return FailureCause::Unclassifiable;
  }

  if (!e.contains("slots")) return FailureCause::Unclassifiable;
  const auto& want = e["slots"];
  for (const char* key : {"from", "to"})
    if (want.contains(key) && normalize_station_name(slot_or_empty(call->input, key)) !=
                                  normalize_station_name(want[key].get<std::string>()))
      return FailureCause::Station;
  if (want.contains("date") &&
      resolve_or_null(slot_or_empty(call->input, "date"), today) !=
          resolve_or_null(want["date"].get<std::string>(), today))
    return FailureCause::Date;
  if (want.contains("time") &&
      window_or_null(slot_or_empty(call->input, "time")) != window_or_null(want["time"].get<std::string>()))
    return FailureCause::Time;
  return FailureCause::Unclassifiable;
}

namespace {

bool judge_round(const QtaoTrace& trace, const Scenario& s) {
  if (trace.outcome != RoundOutcome::Answered) return false;
  const auto* obs = last_success(trace, tool_for(s.task));
  if (!obs) return false;
  const auto& p = *obs->payload;
  if (s.task == ScenarioTask::Ticketing) {
    std::set<std::string> got, want;
    for (const auto& t : p.at("trains")) got.insert(t.at("train_no").get<std::string>());
    for (const auto& t : s.expected["trains"]) want.insert(t.get<std::string>());
    return got == want;
  }
  return normalize_name(p.at("city").get<std::string>()) == normalize_name(s.expected["city"].get<std::string>()) &&
         p.at("date").get<std::string>() == s.expected["date"].get<std::string>();
}

void run_qtao_scenario(const Scenario& s, const SuiteContext& ctx, LlmBackend& backend, ScenarioResult& r) {
  FixedClock clock(*s.clock);
  AppConfig cfg = ctx.config;
  cfg.qtao.error_info_enabled = s.error_info;
  auto agent = build_agent(ctx.stores, cfg, backend, clock);

  SessionState session;
  session.session_id = s.scenario_id;
  session.profile = s.profile;
  session.created_at = *s.clock;
  for (const auto& turn : s.turns) agent.engine->run_round(session, turn);

  const auto& last = session.history.back();
  r.trace_records = session.trace_records;
  r.qtao_iterations = static_cast<int>(last.steps.size());
  r.outcome = std::string(outcome_name(last.outcome));
  r.success = judge_round(last, s);
  if (!r.success) r.failure_cause = classify_failure(last, s);
}

void run_recommendation_scenario(const Scenario& s, const SuiteContext& ctx, LlmBackend& backend,
                                 ScenarioResult& r) {
  const auto& corpus = *ctx.stores.corpus;
  r.ground_truth = s.expected["item_id"].get<std::string>();
  const auto* target = corpus.find_id(r.ground_truth);
  if (!target) throw std::runtime_error("ground-truth item " + r.ground_truth + " is not in the corpus");

  Recommender rec(corpus, backend, ctx.stores.rec_template);
  UserSimulator sim(*target, corpus.legend(), s.seed, s.turn_budget);
  std::vector<RecTurn> history;
  r.outcome = "NotAccepted";

  while (auto u = sim.next_utterance(history)) {
    history.push_back({Speaker::Passenger, *u, {}});
    std::vector<PreliminaryItem> prelim;
    try {
      prelim = rec.recommend_preliminary(s.profile, history, ctx.k_max).items;
    } catch (const EmptyRecommendation&) {
    }
    auto aligned = align(prelim, corpus, ctx.k_max);

    std::vector<std::string> names, aligned_names;
    r.final_preliminary_ids.clear();
    r.final_aligned_ids.clear();
    for (const auto& p : prelim) {
      names.push_back(p.name);
      const auto* hit = corpus.find_name(p.name);
      r.final_preliminary_ids.push_back(hit ? hit->item_id : std::string());
    }
    for (const auto& a : aligned) {
      aligned_names.push_back(a.matched->name);
      r.final_aligned_ids.push_back(a.matched->item_id);
    }
    r.preliminary_lists.push_back(names);
    r.aligned_lists.push_back(aligned_names);

    if (sim.accepts(r.final_aligned_ids, ctx.k_max)) {
      r.success = true;
      r.outcome = "Accepted";
      break;
    }
    RecTurn reply{Speaker::Agent, {}, aligned_names};
    reply.utterance = aligned_names.empty() ? "Sorry, I could not find a matching dish."
                                            : "How about " + join(aligned_names) + "?";
    history.push_back(std::move(reply));
  }
  r.dialogue_turns = sim.turns_taken();
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const SuiteContext& ctx) {
  ScenarioResult r;
  r.scenario_id = s.scenario_id;
  r.task = s.task;
  r.error_info = s.error_info;
  try {
    auto backend = ctx.backend(s);
    if (s.task == ScenarioTask::Recommendation)
      run_recommendation_scenario(s, ctx, *backend, r);
    else
      run_qtao_scenario(s, ctx, *backend, r);
  } catch (const std::exception& e) {
    r.success = false;
    r.error = e.what();
    r.outcome = "Crashed";
    if (s.task != ScenarioTask::Recommendation) r.failure_cause = FailureCause::Unclassifiable;
  }
  return r;
}

namespace {

std::vector<const Scenario*> ordered(const std::vector<Scenario>& scenarios) {
  std::vector<const Scenario*> v;
  for (const auto& s : scenarios) v.push_back(&s);
  std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->scenario_id < b->scenario_id; });
  return v;
}

}  // namespace

std::vector<ScenarioResult> run_suite(const std::vector<Scenario>& scenarios, const SuiteContext& ctx) {
  auto order = ordered(scenarios);
  std::vector<ScenarioResult> out(order.size());
  const auto n = static_cast<long>(order.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[static_cast<size_t>(i)] = run_scenario(*order[static_cast<size_t>(i)], ctx);
  return out;
}

std::vector<ScenarioResult> run_suite_serial(const std::vector<Scenario>& scenarios, const SuiteContext& ctx) {
  std::vector<ScenarioResult> out;
  for (const auto* s : ordered(scenarios)) out.push_back(run_scenario(*s, ctx));
  return out;
}

std::string group_of(const ScenarioResult& r) {
  switch (r.task) {
    case ScenarioTask::Ticketing: return r.error_info ? kGroupTicketingWith : kGroupTicketingWithout;
    case ScenarioTask::Weather: return kGroupWeather;
    case ScenarioTask::Recommendation: return "recommendation";
  }
  return {};
}

namespace {

constexpr const char* kIterationBuckets[] = {"1", "2", "3", ">3"};

ordered_json group_json(const std::vector<OutcomeRecord>& recs) {
  ordered_json g;
  g["scenarios"] = recs.size();
  g["successes"] = std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.success; });
  g["accuracy"] = accuracy(recs);
  g["mean_qtao_all"] = mean_qtao(recs, false);
  g["mean_qtao_success"] = mean_qtao(recs, true);
  auto dist = iteration_distribution(recs);
  ordered_json counts, fractions;
  for (size_t b = 0; b < 4; ++b) {
    counts[kIterationBuckets[b]] = dist.counts[b];
    fractions[kIterationBuckets[b]] = dist.fraction(b);
  }
  g["qtao_counts"] = counts;
  g["qtao_distribution"] = fractions;
  auto causes = cause_distribution(recs);
  ordered_json cc, cf;
  for (auto c : kTableCauses) {
    cc[std::string(cause_name(c))] = causes.counts[static_cast<size_t>(c)];
    cf[std::string(cause_name(c))] = causes.fraction(c);
  }
  g["failure_counts"] = cc;
  g["failure_distribution"] = cf;
  g["unclassifiable"] = causes.unclassifiable;
  return g;
}

}  // namespace

ordered_json build_report(const std::vector<ScenarioResult>& results, const Corpus& corpus,
                          const ReportOptions& options) {
  ordered_json report;
  report["model"] = options.model;
  report["ks"] = options.ks;
  report["scenario_count"] = results.size();

  auto rows = ordered_json::array();
  std::map<std::string, std::vector<OutcomeRecord>> groups = {
      {kGroupTicketingWithout, {}}, {kGroupTicketingWith, {}}, {kGroupWeather, {}}};
  std::vector<std::vector<std::string>> pre_lists, post_lists;
  std::vector<RankedSession> zero_shot, aligned;
  size_t rec_sessions = 0, rec_accepted = 0;

  for (const auto& r : results) {
    ordered_json row;
    row["scenario_id"] = r.scenario_id;
    row["task"] = task_name(r.task);
    row["error_info"] = r.error_info;
    row["success"] = r.success;
    row["qtao_iterations"] = r.qtao_iterations;
    row["outcome"] = r.outcome;
    row["failure_cause"] = r.failure_cause ? ordered_json(cause_name(*r.failure_cause)) : ordered_json(nullptr);
    if (r.error) row["error"] = *r.error;
    if (r.task == ScenarioTask::Recommendation) {
      row["ground_truth"] = r.ground_truth;
      row["dialogue_turns"] = r.dialogue_turns;
      row["final_aligned_ids"] = r.final_aligned_ids;
      ++rec_sessions;
      if (r.success) ++rec_accepted;
      pre_lists.insert(pre_lists.end(), r.preliminary_lists.begin(), r.preliminary_lists.end());
      post_lists.insert(post_lists.end(), r.aligned_lists.begin(), r.aligned_lists.end());
      zero_shot.push_back({r.final_preliminary_ids, r.ground_truth});
      aligned.push_back({r.final_aligned_ids, r.ground_truth});
    } else {
      groups[group_of(r)].push_back(r.record());
    }
    rows.push_back(row);
  }
  report["scenarios"] = rows;

  ordered_json g;
  for (const char* name : {kGroupTicketingWithout, kGroupTicketingWith, kGroupWeather})
    g[name] = group_json(groups[name]);
  report["groups"] = g;

  ordered_json rec;
  rec["sessions"] = rec_sessions;
  rec["accepted"] = rec_accepted;
  rec["accuracy"] = rec_sessions ? static_cast<double>(rec_accepted) / static_cast<double>(rec_sessions) : 0.0;
  rec["queries"] = pre_lists.size();
  ordered_json prop_pre, prop_post, recall_zero, recall_aligned;
  for (int k : options.ks) {
    auto key = std::to_string(k);
    prop_pre[key] = prop_at_k(pre_lists, corpus, k);
    prop_post[key] = prop_at_k(post_lists, corpus, k);
    recall_zero[key] = recall_at_k(zero_shot, k);
    recall_aligned[key] = recall_at_k(aligned, k);
  }
  rec["prop_at_k"] = {{"zero_shot", prop_pre}, {"aligned", prop_post}};
  rec["recall_at_k"] = {{"zero_shot", recall_zero}, {"aligned", recall_aligned}};
  report["recommendation"] = rec;
  return report;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(double v) { return fmt("%.2f%%", v * 100.0); }

std::string pad(std::string s, size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_tables(const ordered_json& report) {
  std::ostringstream out;
  const auto model = report.at("model").get<std::string>();
  const auto& g = report.at("groups");
  const char* groups[] = {kGroupTicketingWithout, kGroupTicketingWith, kGroupWeather};
  const char* titles[] = {"Ticketing w/o Error Info", "Ticketing w/ Error Info", "Weather Inquiries"};
  constexpr size_t W0 = 14, W = 30;

  out << "Table 1. Accuracy (Acc) and mean number of QTAO iterations (#QTAO)\n";
  out << pad("Model", W0);
  for (auto* t : titles) out << pad(t, W);
  out << "\n" << pad("", W0);
  for (size_t i = 0; i < 3; ++i) out << pad("Acc     #QTAO", W);
  out << "\n" << pad(model, W0);
  for (auto* grp : groups)
    out << pad(fmt("%.4f", g[grp]["accuracy"].get<double>()) + "  " + fmt("%.2f", g[grp]["mean_qtao_all"].get<double>()),
               W);
  out << "\n" << pad("(successes)", W0);
  for (auto* grp : groups) out << pad("        " + fmt("%.2f", g[grp]["mean_qtao_success"].get<double>()), W);
  out << "\n" << pad("(scenarios)", W0);
  for (auto* grp : groups) out << pad(std::to_string(g[grp]["scenarios"].get<size_t>()), W);
  out << "\n\n";

  out << "Table 2. Distribution of #QTAO iterations for successful retrievals (" << model << ")\n";
  out << pad("#QTAO", W0);
  for (auto* t : titles) out << pad(std::string(t) + " (%)", W);
  out << "\n";
  const char* bucket_labels[] = {"1 round", "2 rounds", "3 rounds", "> 3 rounds"};
  for (size_t b = 0; b < 4; ++b) {
    out << pad(bucket_labels[b], W0);
    for (auto* grp : groups) out << pad(pct(g[grp]["qtao_distribution"][kIterationBuckets[b]].get<double>()), W);
    out << "\n";
  }
  out << "\n";

  out << "Table 3. Distribution of failure causes (" << model << ")\n";
  out << pad("Cause", W0);
  for (auto* t : titles) out << pad(std::string(t) + " (%)", W);
  out << "\n";
  for (auto c : kTableCauses) {
    auto name = std::string(cause_name(c));
    out << pad(name, W0);
    for (auto* grp : groups) {
      auto count = g[grp]["failure_counts"][name].get<size_t>();
      out << pad(count == 0 ? "-" : pct(g[grp]["failure_distribution"][name].get<double>()), W);
    }
    out << "\n";
  }
  out << pad("Unclassified", W0);
  for (auto* grp : groups) out << pad(std::to_string(g[grp]["unclassifiable"].get<size_t>()), W);
  out << "\n\n";

  const auto& rec = report.at("recommendation");
  out << "Table 4. Proportion of top-k recommended items present in the catalog (Prop@k)\n";
  out << pad("Metrics", W0) << pad(model, W) << pad(model + " w/ Alignment", W) << "\n";
  for (const auto& k : report.at("ks")) {
    auto key = std::to_string(k.get<int>());
    out << pad("Prop@" + key, W0) << pad(pct(rec["prop_at_k"]["zero_shot"][key].get<double>()), W)
        << pad(pct(rec["prop_at_k"]["aligned"][key].get<double>()), W) << "\n";
  }
  out << "\n";

  out << "Table 5. Recommendation performance (Recall@k)\n";
  out << pad("Metrics", W0) << pad("Zero-shot", W) << pad("Zero-shot w/ Alignment", W) << "\n";
  out << pad("", W0) << pad(model, W) << pad(model, W) << "\n";
  for (const auto& k : report.at("ks")) {
    auto key = std::to_string(k.get<int>());
    out << pad("Recall@" + key, W0) << pad(pct(rec["recall_at_k"]["zero_shot"][key].get<double>()), W)
        << pad(pct(rec["recall_at_k"]["aligned"][key].get<double>()), W) << "\n";
  }
  out << pad("(sessions)", W0) << rec["sessions"].get<size_t>() << "\n";
  return out.str();
}

}  // namespace railagent
