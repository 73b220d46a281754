#include "railagent/platform.hpp"

#include <fstream>
#include <sstream>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SharedStores load_stores(const AppConfig& config) {
  SharedStores s;
  s.corpus = std::make_shared<const Corpus>(load_corpus(config.corpus_path));
  s.timetable = std::make_shared<const ScheduleStore>(ScheduleStore::load(config.timetable_path));
  if (config.weather.provider == "fixture")
    s.forecasts = std::make_shared<const ForecastTable>(load_forecasts(config.weather.fixture_path));
  s.base_preamble = config.base_prompt_path.empty() ? std::string(default_base_preamble())
                                                    : trim(read_text_file(config.base_prompt_path));
  s.rec_template = RecPromptTemplate::standard();
  if (!config.recommender.task_template_path.empty())
    s.rec_template.task_description = trim(read_text_file(config.recommender.task_template_path));
  if (!config.recommender.format_template_path.empty())
    s.rec_template.format_instruction = trim(read_text_file(config.recommender.format_template_path));
  s.rec_template.validate();
  return s;
}

namespace {

ObservationResult recommendation_observation(const RecommendationResult& r) {
  ordered_json payload;
  auto prelim = ordered_json::array();
  for (const auto& p : r.preliminary) prelim.push_back(p.name);
  payload["preliminary"] = prelim;
  auto recs = ordered_json::array();
  std::string text = "Recommended dishes from the railway catering catalog:";
  int i = 0;
  for (const auto& a : r.aligned) {
    recs.push_back(to_json(a));
    char price[32];
    std::snprintf(price, sizeof price, "%.1f", a.matched->price);
    text += "\n" + std::to_string(++i) + ". " + a.matched->name + " (" + a.matched->restaurant + ", " +
            a.matched->city + ", CNY " + price + ")";
  }
  payload["recommendations"] = recs;
  return ObservationResult::success(std::move(text), std::move(payload));
}

}  // namespace

Agent build_agent(const SharedStores& stores, const AppConfig& config, LlmBackend& backend,
                  const Clock& clock, std::shared_ptr<HttpTransport> transport) {
  Agent agent;
  if (config.weather.provider == "amap") {
    agent.weather = std::make_unique<AmapAdapter>(config.weather.amap,
                                                  transport ? transport : make_http_transport());
  } else {
    if (!stores.forecasts) throw std::runtime_error("fixture weather provider without forecast table");
    agent.weather = std::make_unique<FixtureProvider>(stores.forecasts, clock, config.weather.horizon_days);
  }

  ToolRegistry tools;
  auto timetable = stores.timetable;
  tools.register_tool({ToolName::Ticketing,
                       "search train services and remaining tickets; input from=<station or city>, "
                       "to=<station or city>, date=<today|tomorrow|weekday|YYYY-MM-DD>, "
                       "time=<morning|afternoon|evening|HH:MM-HH:MM>",
                       {"from", "to", "date"},
                       [timetable, &clock](const SlotMap& slots, const ToolContext& ctx) {
                         return ticketing_from_slots(slots, *timetable, clock, ctx.error_info);
                       }});

  auto* weather = agent.weather.get();
  tools.register_tool({ToolName::Weather,
                       "weather forecast for a city; input place=<city>, time=<today|tomorrow|weekday|YYYY-MM-DD>",
                       {"place", "time"},
                       [weather, &clock](const SlotMap& slots, const ToolContext&) {
                         return weather_from_slots(slots, *weather, clock);
                       }});

  auto corpus = stores.corpus;
  auto templ = stores.rec_template;
  auto rec_cfg = config.recommender;
  tools.register_tool(
      {ToolName::FoodDrink,
       "recommend on-board food and drink from the railway catering catalog; input query=<what the passenger wants>",
       {},
       [corpus, templ, rec_cfg, &backend](const SlotMap& slots, const ToolContext& ctx) {
         AlignOptions opts;
         if (rec_cfg.city_filter) opts.city_filter = slots.get("city");
         Recommender rec(*corpus, backend, templ, opts);
         PassengerProfile anonymous;
         const auto& profile = ctx.profile ? *ctx.profile : anonymous;
         try {
           return recommendation_observation(rec.recommend(profile, to_rec_turns(ctx.history), rec_cfg.k));
         } catch (const EmptyRecommendation& e) {
           return ObservationResult::error(errc::kEmptyRecommendation, std::string("Error: ") + e.what());
         } catch (const TransportError& e) {
           return ObservationResult::error(errc::kTransportError, std::string("Error: ") + e.what());
         }
       }});

  tools.register_tool({ToolName::ChitChat,
                       "casual conversation about anything the other tools do not cover; no input needed",
                       {},
                       [&backend](const SlotMap&, const ToolContext& ctx) {
                         try {
                           return ObservationResult::success(chitchat(ctx.history, backend));
                         } catch (const std::invalid_argument& e) {
                           return ObservationResult::error(errc::kNoUserUtterance, std::string("Error: ") + e.what());
                         } catch (const TransportError& e) {
                           return ObservationResult::error(errc::kTransportError, std::string("Error: ") + e.what());
                         }
                       }});

  agent.engine = std::make_unique<QtaoEngine>(stores.base_preamble, std::move(tools), backend, config.qtao);
  return agent;
}

}  // namespace railagent
