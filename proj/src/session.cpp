#include "railagent/session.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

std::string new_session_id() {
  static thread_local std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t w = rd();
    for (int b = 0; b < 8; ++b, w >>= 4) id.push_back(hex[w & 0xf]);
  }
  return id;
}

SessionManager::SessionManager(const QtaoEngine& engine, const Clock& clock,
                               std::optional<std::filesystem::path> store_dir)
    : engine_(engine), clock_(clock), store_dir_(std::move(store_dir)) {
  if (store_dir_) {
    std::filesystem::create_directories(*store_dir_);
    reload();
  }
}

std::string SessionManager::create_session(const PassengerProfile& profile, SessionOverrides overrides) {
  try {
    profile.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (overrides.max_iterations && *overrides.max_iterations < 1)
    throw ValidationError("max_iterations must be >= 1");

  auto entry = std::make_shared<Entry>();
  entry->state.profile = profile;
  entry->state.created_at = clock_.now();
  entry->state.max_iterations = overrides.max_iterations;
  entry->state.error_info = overrides.error_info;

  std::unique_lock lock(mutex_);
  std::string id;
  do id = new_session_id();
  while (sessions_.count(id));
  entry->state.session_id = id;
  persist(entry->state);
  sessions_.emplace(id, std::move(entry));
  return id;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound(id);
  return it->second;
}

PostResult SessionManager::post_message(const std::string& session_id, std::string_view text) {
  if (trim(text).empty()) throw ValidationError("text must not be empty");
  auto entry = find(session_id);
  std::unique_lock round(entry->round, std::try_to_lock);
  if (!round.owns_lock()) throw RoundInProgress(session_id);

  SessionState working;
  {
    std::lock_guard g(entry->state_mutex);
    working = entry->state;
  }
  auto trace = engine_.run_round(working, text);
  persist(working);
  {
    std::lock_guard g(entry->state_mutex);
    entry->state = std::move(working);
  }
  return {trace.answer, trace.outcome, trace.round_index};
}

std::string SessionManager::get_trace(const std::string& session_id, int round_index) const {
  auto entry = find(session_id);
  std::lock_guard g(entry->state_mutex);
  const auto& records = entry->state.trace_records;
  if (round_index < 1 || round_index > static_cast<int>(records.size()))
    throw TraceNotFound("no round " + std::to_string(round_index) + " in session " + session_id);
  return records[round_index - 1];
}

SessionState SessionManager::snapshot(const std::string& session_id) const {
  auto entry = find(session_id);
  std::lock_guard g(entry->state_mutex);
  return entry->state;
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

void SessionManager::persist(const SessionState& s) const {
  if (!store_dir_) return;
  ordered_json j;
  j["session_id"] = s.session_id;
  j["profile"] = to_json(s.profile);
  j["created_at"] = format_datetime(s.created_at);
  j["max_iterations"] = s.max_iterations ? ordered_json(*s.max_iterations) : ordered_json(nullptr);
  j["error_info"] = s.error_info ? ordered_json(*s.error_info) : ordered_json(nullptr);
  j["traces"] = s.trace_records;

  auto path = *store_dir_ / (s.session_id + ".json");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write session store " + tmp.string());
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

void SessionManager::reload() {
  for (const auto& de : std::filesystem::directory_iterator(*store_dir_)) {
    if (de.path().extension() != ".json") continue;
    std::ifstream in(de.path());
    auto j = ordered_json::parse(in);
    auto entry = std::make_shared<Entry>();
    auto& s = entry->state;
    s.session_id = j.at("session_id").get<std::string>();
    s.profile = profile_from_json(nlohmann::json::parse(j.at("profile").dump()));
    auto created = parse_datetime(j.at("created_at").get<std::string>());
    if (!created) throw std::runtime_error("corrupt session file " + de.path().string());
    s.created_at = *created;
    if (!j.at("max_iterations").is_null()) s.max_iterations = j["max_iterations"].get<int>();
    if (!j.at("error_info").is_null()) s.error_info = j["error_info"].get<bool>();
    for (const auto& r : j.at("traces")) {
      auto record = r.get<std::string>();
      s.history.push_back(trace_from_json(ordered_json::parse(record)));
      s.trace_records.push_back(std::move(record));
    }
    sessions_.emplace(s.session_id, std::move(entry));
  }
}

}  // namespace railagent
