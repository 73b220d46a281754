#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "railagent/config.hpp"
#include "railagent/corpus.hpp"
#include "railagent/eval.hpp"
#include "railagent/platform.hpp"
#include "railagent/service.hpp"
#include "railagent/session.hpp"
#include "railagent/text.hpp"
#include "railagent/ticketing.hpp"

#ifndef RAILAGENT_DATA_DIR
#define RAILAGENT_DATA_DIR "data"
#endif

using namespace railagent;

namespace {

AppConfig make_config(const std::string& config_path, const std::string& data_dir) {
  return config_path.empty() ? AppConfig::defaults(data_dir) : AppConfig::load(config_path, data_dir);
}

std::unique_ptr<Clock> make_clock(const std::string& iso) {
  if (iso.empty()) return std::make_unique<SystemClock>();
  auto t = parse_datetime(iso);
  if (!t)
    if (auto d = parse_date(iso)) t = LocalTime(*d);
  if (!t) throw CLI::ValidationError("--clock", "expected YYYY-MM-DD or YYYY-MM-DDTHH:MM");
  return std::make_unique<FixedClock>(*t);
}

std::vector<int> parse_ks(const std::string& csv) {
  std::vector<int> ks;
  for (const auto& part : split(csv, ',')) {
    auto t = trim(part);
    if (t.empty()) continue;
    int k = std::stoi(t);
    if (k < 1) throw CLI::ValidationError("--k", "values must be positive");
    ks.push_back(k);
  }
  if (ks.empty()) throw CLI::ValidationError("--k", "no values given");
  return ks;
}

ApiServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Railway passenger service agent"};
  app.require_subcommand(1);
  std::string data_dir = RAILAGENT_DATA_DIR;
  app.add_option("--data-dir", data_dir, "Directory holding the sample data")->capture_default_str();

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Dish catalog utilities");
  corpus_cmd->require_subcommand(1);
  std::string corpus_path;
  auto* validate = corpus_cmd->add_subcommand("validate", "Check a catalog file; non-zero exit on any violation");
  validate->add_option("path", corpus_path)->required()->check(CLI::ExistingFile);
  auto* stats = corpus_cmd->add_subcommand("stats", "Print catalog statistics");
  stats->add_option("path", corpus_path)->required()->check(CLI::ExistingFile);

  // tickets
  auto* tickets_cmd = app.add_subcommand("tickets", "Timetable queries");
  tickets_cmd->require_subcommand(1);
  auto* tq = tickets_cmd->add_subcommand("query", "Query train services");
  std::string from, to, date, window, timetable, clock_iso;
  bool no_error_info = false;
  tq->add_option("--from", from)->required();
  tq->add_option("--to", to)->required();
  tq->add_option("--date", date)->required();
  tq->add_option("--window", window, "morning|afternoon|evening|HH:MM-HH:MM");
  tq->add_option("--timetable", timetable, "Timetable JSONL (default: sample timetable)");
  tq->add_option("--clock", clock_iso, "Fixed current time for relative dates");
  tq->add_flag("--no-error-info", no_error_info, "Return bare failure text");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Scenario evaluation");
  eval_cmd->require_subcommand(1);
  auto* run = eval_cmd->add_subcommand("run", "Run a scenario pack and write the report");
  std::string scenarios_dir, report_path, tables_path, backend_kind = "scripted", ks_csv = "1,5,10",
                                                        config_path, model_label;
  bool serial = false;
  run->add_option("--scenarios", scenarios_dir)->required()->check(CLI::ExistingDirectory);
  run->add_option("--backend", backend_kind)->check(CLI::IsMember({"scripted", "live"}))->capture_default_str();
  run->add_option("--report", report_path, "Machine-readable report (JSON)")->required();
  run->add_option("--tables", tables_path, "Also write the human-readable tables here");
  run->add_option("--k", ks_csv, "Cutoffs for Prop@k and Recall@k")->capture_default_str();
  run->add_option("--config", config_path);
  run->add_option("--model", model_label, "Row label in the tables (default: backend kind or model id)");
  run->add_flag("--serial", serial, "Run scenarios one at a time");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP session API");
  int port = 8080;
  std::string host = "0.0.0.0", scenario_script, serve_backend = "scripted";
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--config", config_path);
  serve->add_option("--backend", serve_backend)->check(CLI::IsMember({"scripted", "live"}))->capture_default_str();
  serve->add_option("--scenario-script", scenario_script, "Script file for the scripted backend")
      ->check(CLI::ExistingFile);
  serve->add_option("--clock", clock_iso, "Fixed current time (default: system clock)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      auto c = load_corpus(corpus_path);
      std::cout << "ok: " << c.size() << " items\n";
      return 0;
    }
    if (stats->parsed()) {
      auto s = corpus_stats(load_corpus(corpus_path));
      std::cout << "items " << s.items << "\n";
      for (const auto& [city, n] : s.per_city) std::cout << "city " << city << " " << n << "\n";
      for (const auto& [cuisine, n] : s.per_cuisine) std::cout << "cuisine " << cuisine << " " << n << "\n";
      return 0;
    }
    if (tq->parsed()) {
      auto store = ScheduleStore::load(timetable.empty() ? AppConfig::defaults(data_dir).timetable_path
                                                         : std::filesystem::path(timetable));
      auto clock = make_clock(clock_iso);
      SlotMap slots;
      slots.set("from", from);
      slots.set("to", to);
      slots.set("date", date);
      if (!window.empty()) slots.set("time", window);
      auto obs = ticketing_from_slots(slots, store, *clock, !no_error_info);
      std::cout << obs.text << "\n";
      return obs.ok() ? 0 : 2;
    }
    if (run->parsed()) {
      auto config = make_config(config_path, data_dir);
      auto stores = load_stores(config);
      auto scenarios = load_scenarios(scenarios_dir);
      SuiteContext ctx{stores, config};
      ReportOptions opts;
      opts.ks = parse_ks(ks_csv);
      ctx.k_max = *std::max_element(opts.ks.begin(), opts.ks.end());
      opts.model = model_label.empty() ? (backend_kind == "live" ? config.llm.model_id : "scripted") : model_label;
      std::shared_ptr<LlmBackend> live;
      if (backend_kind == "live") {
        live = std::make_shared<OpenAiBackend>(config.llm, make_http_transport());
        ctx.backend = [live](const Scenario&) -> std::unique_ptr<LlmBackend> {
          struct Shared final : LlmBackend {
            std::shared_ptr<LlmBackend> inner;
            std::string complete(std::string_view p, const std::vector<std::string>& s) override {
              return inner->complete(p, s);
            }
          };
          auto b = std::make_unique<Shared>();
          b->inner = live;
          return b;
        };
      }
      auto results = serial ? run_suite_serial(scenarios, ctx) : run_suite(scenarios, ctx);
      auto report = build_report(results, *stores.corpus, opts);
      std::ofstream(report_path) << report.dump(2) << "\n";
      auto tables = render_tables(report);
      if (!tables_path.empty()) std::ofstream(tables_path) << tables;
      std::cout << tables;
      return 0;
    }
    if (serve->parsed()) {
      auto config = make_config(config_path, data_dir);
      auto stores = load_stores(config);
      auto clock = make_clock(clock_iso);
      std::unique_ptr<LlmBackend> backend;
      if (serve_backend == "live") {
        backend = std::make_unique<OpenAiBackend>(config.llm, make_http_transport());
      } else {
        if (scenario_script.empty()) throw CLI::ValidationError("--scenario-script", "required with --backend scripted");
        backend.reset(new ScriptedBackend(ScriptedBackend::from_file(scenario_script)));
      }
      auto agent = build_agent(stores, config, *backend, *clock);
      SessionManager sessions(*agent.engine, *clock, config.session_store_dir);
      ApiRouter router(sessions);
      ApiServer server(router);
      int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << host << ":" << bound << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
