#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include "railagent/clock.hpp"
#include "railagent/engine.hpp"

namespace railagent {

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SessionNotFound : public std::runtime_error {
 public:
  explicit SessionNotFound(const std::string& id) : std::runtime_error("session not found: " + id) {}
};

class RoundInProgress : public std::runtime_error {
 public:
  explicit RoundInProgress(const std::string& id)
      : std::runtime_error("a round is already in progress for session " + id) {}
};

class TraceNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionOverrides {
  std::optional<int> max_iterations;
  std::optional<bool> error_info;
};

struct PostResult {
  std::optional<std::string> answer;
  RoundOutcome outcome = RoundOutcome::BudgetExhausted;
  int round_index = 0;
};

/// Owns all sessions. Rounds are serialized per session; different sessions
/// run concurrently. With a store directory each session is mirrored to
/// `<dir>/<id>.json` and reloaded on construction.
class SessionManager {
 public:
  SessionManager(const QtaoEngine& engine, const Clock& clock,
                 std::optional<std::filesystem::path> store_dir = std::nullopt);

  std::string create_session(const PassengerProfile& profile, SessionOverrides overrides = {});
  PostResult post_message(const std::string& session_id, std::string_view text);
  /// Canonical record of round `round_index` (1-based), byte-identical to
  /// what the engine emitted.
  std::string get_trace(const std::string& session_id, int round_index) const;
  SessionState snapshot(const std::string& session_id) const;
  std::size_t size() const;

 private:
  struct Entry {
    std::mutex round;
    mutable std::mutex state_mutex;
    SessionState state;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void persist(const SessionState& state) const;
  void reload();

  const QtaoEngine& engine_;
  const Clock& clock_;
  std::optional<std::filesystem::path> store_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

std::string new_session_id();

}  // namespace railagent
