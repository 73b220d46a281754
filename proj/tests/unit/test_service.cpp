#include <doctest.h>

#include <future>
#include <set>
#include <thread>

#include "railagent/platform.hpp"
#include "railagent/service.hpp"
#include "test_support.hpp"

using namespace railagent;
using nlohmann::json;

namespace {

const SharedStores& stores() {
  static const auto s = load_stores(AppConfig::defaults(testsupport::data_dir()));
  return s;
}

const FixedClock& clock0() {
  static const FixedClock c(testsupport::at("2025-01-01T09:00"));
  return c;
}

struct Fixture {
  explicit Fixture(LlmBackend& backend)
      : agent(build_agent(stores(), AppConfig::defaults(testsupport::data_dir()), backend, clock0())) {}
  Agent agent;
};

const char* kFigureQuestion = "I want to go from Chongqing to Chengdu tomorrow afternoon. Which trains can I take?";

}  // namespace

TEST_CASE("session creation") {
  testsupport::FnBackend backend([](const std::string&, int) { return "Thought: t\nFinal Answer: a"; });
  Fixture f(backend);
  SessionManager sessions(*f.agent.engine, clock0());
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.insert(sessions.create_session({}));
  CHECK(ids.size() == 50);
  CHECK(sessions.size() == 50);
  CHECK(ids.begin()->size() == 32);
  PassengerProfile old;
  old.age = 200;
  CHECK_THROWS_AS(sessions.create_session(old), ValidationError);
  CHECK_THROWS_AS(sessions.create_session({}, {0, std::nullopt}), ValidationError);
  CHECK(sessions.size() == 50);
}

TEST_CASE("posting a ticket question stores a byte-identical trace") {
  auto backend = ScriptedBackend::from_file(testsupport::data_dir() / "scripts" / "figure1.json");
  Fixture f(backend);
  std::vector<std::string> emitted;
  f.agent.engine->set_trace_sink([&](const std::string& r) { emitted.push_back(r); });
  SessionManager sessions(*f.agent.engine, clock0());
  auto id = sessions.create_session({"p1", "male", 40, "Chongqing"});
  auto r = sessions.post_message(id, kFigureQuestion);
  CHECK(r.outcome == RoundOutcome::Answered);
  CHECK(r.round_index == 1);
  REQUIRE(r.answer);
  REQUIRE(emitted.size() == 1);
  CHECK(sessions.get_trace(id, 1) == emitted[0]);
  CHECK_THROWS_AS(sessions.get_trace(id, 99), TraceNotFound);
  CHECK_THROWS_AS(sessions.get_trace(id, 0), TraceNotFound);
  CHECK_THROWS_AS(sessions.get_trace("nope", 1), SessionNotFound);
  CHECK_THROWS_AS(sessions.post_message("nope", "hi"), SessionNotFound);
  CHECK_THROWS_AS(sessions.post_message(id, "  "), ValidationError);
}

TEST_CASE("session overrides reach the engine") {
  testsupport::FnBackend backend([](const std::string&, int) {
    return "Thought: again\nAction: Weather\nAction Input: place=Atlantis, time=today";
  });
  Fixture f(backend);
  SessionManager sessions(*f.agent.engine, clock0());
  auto id = sessions.create_session({}, {2, false});
  auto r = sessions.post_message(id, "weather?");
  CHECK(r.outcome == RoundOutcome::BudgetExhausted);
  CHECK_FALSE(r.answer);
  auto snap = sessions.snapshot(id);
  CHECK(snap.history.at(0).steps.size() == 2);
}

TEST_CASE("a second message while a round runs is rejected") {
  testsupport::BlockingBackend backend;
  Fixture f(backend);
  SessionManager sessions(*f.agent.engine, clock0());
  auto id = sessions.create_session({});
  auto other = sessions.create_session({});
  auto first = std::async(std::launch::async, [&] { return sessions.post_message(id, "one"); });
  backend.wait_for_caller();
  CHECK_THROWS_AS(sessions.post_message(id, "two"), RoundInProgress);
  auto parallel = std::async(std::launch::async, [&] { return sessions.post_message(other, "three"); });
  backend.release();
  CHECK(first.get().outcome == RoundOutcome::Answered);
  CHECK(parallel.get().outcome == RoundOutcome::Answered);
  CHECK(sessions.snapshot(id).history.size() == 1);
  CHECK(sessions.post_message(id, "four").round_index == 2);
}

TEST_CASE("sessions survive a restart") {
  auto dir = testsupport::temp_dir("sessions");
  testsupport::FnBackend backend([](const std::string& p, int) {
    return "Thought: t\nFinal Answer: echo " + p.substr(p.rfind("Question: ") + 10);
  });
  Fixture f(backend);
  std::string id, record;
  {
    SessionManager sessions(*f.agent.engine, clock0(), dir);
    id = sessions.create_session({"p9", std::nullopt, 8, std::nullopt}, {3, true});
    sessions.post_message(id, "hello");
    record = sessions.get_trace(id, 1);
  }
  SessionManager reloaded(*f.agent.engine, clock0(), dir);
  CHECK(reloaded.size() == 1);
  CHECK(reloaded.get_trace(id, 1) == record);
  auto snap = reloaded.snapshot(id);
  CHECK(snap.profile.age == 8);
  CHECK(snap.max_iterations == 3);
  CHECK(reloaded.post_message(id, "again").round_index == 2);
  CHECK(backend.prompts().back().find("Passenger: hello\nAgent: echo hello") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("router endpoints and error mapping") {
  auto backend = ScriptedBackend::from_file(testsupport::data_dir() / "scripts" / "figure1.json");
  Fixture f(backend);
  SessionManager sessions(*f.agent.engine, clock0());
  ApiRouter router(sessions);

  CHECK(router.handle("GET", "/api/health", "").body == R"({"status":"ok"})");
  auto created = router.handle("POST", "/api/sessions", R"({"profile": {"age": 30}, "config": {"max_iterations": 5}})");
  CHECK(created.status == 201);
  auto id = json::parse(created.body)["session_id"].get<std::string>();

  auto posted = router.handle("POST", "/api/sessions/" + id + "/messages", json{{"text", kFigureQuestion}}.dump());
  CHECK(posted.status == 200);
  auto pj = json::parse(posted.body);
  CHECK(pj["outcome"] == "Answered");
  CHECK(pj["round_index"] == 1);

  auto trace = router.handle("GET", "/api/sessions/" + id + "/traces/1", "");
  CHECK(trace.status == 200);
  CHECK(trace.body == sessions.get_trace(id, 1));

  auto code = [](const ApiResponse& r) { return json::parse(r.body)["code"].get<std::string>(); };
  auto bad_age = router.handle("POST", "/api/sessions", R"({"profile": {"age": 200}})");
  CHECK(bad_age.status == 400);
  CHECK(code(bad_age) == "validation_error");
  CHECK(router.handle("POST", "/api/sessions", "{not json").status == 400);
  auto empty = router.handle("POST", "/api/sessions/" + id + "/messages", R"({"text": ""})");
  CHECK(empty.status == 400);
  CHECK(code(empty) == "validation_error");
  auto missing = router.handle("GET", "/api/sessions/" + id + "/traces/99", "");
  CHECK(missing.status == 404);
  CHECK(code(missing) == "not_found");
  auto unknown = router.handle("POST", "/api/sessions/zzz/messages", R"({"text": "hi"})");
  CHECK(unknown.status == 404);
  CHECK(code(unknown) == "session_not_found");
  CHECK(router.handle("GET", "/api/sessions", "").status == 405);
  CHECK(router.handle("GET", "/api/nothing", "").status == 404);
  CHECK(router.handle("GET", "/api/sessions/" + id + "/traces/x", "").status == 400);
}

TEST_CASE("router maps backend outages to 502") {
  testsupport::FnBackend down([](const std::string&, int) -> std::string { throw TransportError("down"); });
  Fixture f(down);
  SessionManager sessions(*f.agent.engine, clock0());
  ApiRouter router(sessions);
  auto id = sessions.create_session({});
  auto r = router.handle("POST", "/api/sessions/" + id + "/messages", R"({"text": "hi"})");
  CHECK(r.status == 502);
  CHECK(json::parse(r.body)["code"] == "backend_unavailable");
}

TEST_CASE("HTTP round trip") {
  auto backend = ScriptedBackend::from_file(testsupport::data_dir() / "scripts" / "figure1.json");
  Fixture f(backend);
  SessionManager sessions(*f.agent.engine, clock0());
  ApiRouter router(sessions);
  ApiServer server(router);
  int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen(); });

  auto http = make_http_transport();
  auto base = "http://127.0.0.1:" + std::to_string(port);
  HttpRequest create;
  create.method = "POST";
  create.url = base + "/api/sessions";
  create.body = "{}";
  create.headers["Content-Type"] = "application/json";
  auto created = http->send(create);
  REQUIRE(created.status == 201);
  auto id = json::parse(created.body)["session_id"].get<std::string>();

  HttpRequest post = create;
  post.url = base + "/api/sessions/" + id + "/messages";
  post.body = json{{"text", kFigureQuestion}}.dump();
  auto posted = http->send(post);
  CHECK(posted.status == 200);
  CHECK(json::parse(posted.body)["outcome"] == "Answered");

  HttpRequest get;
  get.url = base + "/api/sessions/" + id + "/traces/1";
  auto trace = http->send(get);
  CHECK(trace.status == 200);
  CHECK(trace.body == sessions.get_trace(id, 1));

  server.stop();
  serving.join();
}
