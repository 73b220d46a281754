#pragma once

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "railagent/clock.hpp"
#include "railagent/corpus.hpp"
#include "railagent/http.hpp"
#include "railagent/llm_backend.hpp"
#include "railagent/recommender.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() { return RAILAGENT_DATA_DIR; }

inline railagent::LocalTime at(const char* iso) { return *railagent::parse_datetime(iso); }

/// Transport answering from a handler and recording every request.
class FakeTransport final : public railagent::HttpTransport {
 public:
  using Handler = std::function<railagent::HttpResponse(const railagent::HttpRequest&)>;
  explicit FakeTransport(Handler h) : handler_(std::move(h)) {}
  railagent::HttpResponse send(const railagent::HttpRequest& req) override {
    {
      std::lock_guard g(mu_);
      requests_.push_back(req);
    }
    return handler_(req);
  }
  std::vector<railagent::HttpRequest> requests() const {
    std::lock_guard g(mu_);
    return requests_;
  }

 private:
  Handler handler_;
  mutable std::mutex mu_;
  std::vector<railagent::HttpRequest> requests_;
};

/// Replays a fixed sequence of responses; a response with status -1 raises
/// TransportError instead.
inline FakeTransport::Handler sequence(std::vector<railagent::HttpResponse> responses) {
  auto queue = std::make_shared<std::deque<railagent::HttpResponse>>(responses.begin(), responses.end());
  auto mu = std::make_shared<std::mutex>();
  return [queue, mu](const railagent::HttpRequest&) {
    std::lock_guard g(*mu);
    if (queue->empty()) throw std::runtime_error("fake transport exhausted");
    auto r = queue->front();
    queue->pop_front();
    if (r.status == -1) throw railagent::TransportError("connection refused");
    return r;
  };
}

/// Backend answering from a function of the prompt; records every prompt.
class FnBackend final : public railagent::LlmBackend {
 public:
  using Fn = std::function<std::string(const std::string& prompt, int call)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(std::string_view prompt, const std::vector<std::string>& stop) override {
    std::string p(prompt);
    int n;
    {
      std::lock_guard g(mu_);
      prompts_.push_back(p);
      n = static_cast<int>(prompts_.size());
    }
    return railagent::truncate_at_stop(fn_(p, n), stop);
  }
  std::vector<std::string> prompts() const {
    std::lock_guard g(mu_);
    return prompts_;
  }

 private:
  Fn fn_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

/// Backend that parks every call until release() and then answers with a
/// fixed final answer.
class BlockingBackend final : public railagent::LlmBackend {
 public:
  std::string complete(std::string_view, const std::vector<std::string>&) override {
    std::unique_lock lk(mu_);
    ++waiting_;
    cv_.notify_all();
    cv_.wait(lk, [&] { return released_; });
    return "Thought: done\nFinal Answer: ok";
  }
  void wait_for_caller() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return waiting_ > 0; });
  }
  void release() {
    std::lock_guard g(mu_);
    released_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int waiting_ = 0;
  bool released_ = false;
};

inline railagent::DishItem random_item(std::size_t i, std::mt19937_64& rng, int cuisines = 3) {
  railagent::DishItem d;
  char id[32];
  std::snprintf(id, sizeof id, "R%05zu", i);
  d.item_id = id;
  d.name = "Item " + std::to_string(i);
  d.city = rng() % 2 ? "Chongqing" : "Shanghai";
  d.restaurant = "R" + std::to_string(rng() % 7);
  d.price = static_cast<double>(5 + rng() % 60);
  d.type_of_food = 1 + static_cast<int>(rng() % 2);
  d.cuisine = 1 + static_cast<int>(rng() % static_cast<unsigned>(cuisines));
  for (auto& m : d.meal_suitability) m = rng() % 2;
  d.meal_suitability[rng() % 4] = true;
  d.child_friendly = rng() % 2;
  if (rng() % 3 == 0) {
    d.spiciness[0] = true;
  } else {
    for (std::size_t s = 1; s < 5; ++s) d.spiciness[s] = rng() % 2;
    d.spiciness[1 + rng() % 4] = true;
  }
  return d;
}

/// Random catalog; ids are shuffled so corpus order differs from id order.
inline railagent::Corpus random_corpus(std::size_t n, std::mt19937_64& rng) {
  std::vector<railagent::DishItem> items;
  for (std::size_t i = 0; i < n; ++i) items.push_back(random_item(i, rng));
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng() % i]);
  return railagent::Corpus(railagent::Legend::standard(), std::move(items));
}

/// Brute-force similarity computed from item fields rather than encoded
/// vectors: per populated block, dot and squared norms of the indicator sets.
inline double oracle_similarity(const railagent::PartialFeatures& q, const railagent::DishItem& d,
                                const railagent::FeatureLayout& layout,
                                const railagent::BlockWeights& w = railagent::kUniformWeights) {
  double dot = 0, na = 0, nb = 0;
  auto add = [&](size_t block, double bd, double ba, double bb) {
    dot += w[block] * bd;
    na += w[block] * ba;
    nb += w[block] * bb;
  };
  auto known = [](const std::vector<int>& codes, int c) {
    return std::find(codes.begin(), codes.end(), c) != codes.end();
  };
  if (q.type_of_food && known(layout.type_codes, *q.type_of_food))
    add(0, *q.type_of_food == d.type_of_food, 1, 1);
  if (q.cuisine && known(layout.cuisine_codes, *q.cuisine)) add(1, *q.cuisine == d.cuisine, 1, 1);
  auto flags = [&](size_t block, const auto& a, const auto& b) {
    double bd = 0, ba = 0, bb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      bd += a[i] && b[i];
      ba += a[i];
      bb += b[i];
    }
    add(block, bd, ba, bb);
  };
  if (q.meal_suitability) flags(2, *q.meal_suitability, d.meal_suitability);
  if (q.child_friendly) add(3, *q.child_friendly && d.child_friendly, *q.child_friendly, d.child_friendly);
  if (q.spiciness) flags(4, *q.spiciness, d.spiciness);
  if (q.price && *q.price >= 0) add(5, layout.price_bin(*q.price) == layout.price_bin(d.price), 1, 1);
  if (na <= 0 || nb <= 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

/// Linear scan; scores within 1e-12 tie and the lowest item_id wins.
inline std::size_t oracle_argmax(const railagent::PartialFeatures& q, const railagent::Corpus& c,
                                 const railagent::BlockWeights& w = railagent::kUniformWeights) {
  std::vector<double> scores;
  for (const auto& item : c.items()) scores.push_back(oracle_similarity(q, item, c.layout(), w));
  double top = *std::max_element(scores.begin(), scores.end());
  std::size_t best = c.size();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (scores[i] >= top - 1e-12 && (best == c.size() || c.items()[i].item_id < c.items()[best].item_id))
      best = i;
  return best;
}

/// Random claimed-feature record; each field present with probability 1/2.
inline railagent::PartialFeatures random_claim(std::mt19937_64& rng, int cuisines = 3) {
  auto item = random_item(0, rng, cuisines);
  railagent::PartialFeatures f;
  if (rng() % 2) f.type_of_food = item.type_of_food;
  if (rng() % 2) f.cuisine = item.cuisine;
  if (rng() % 2) f.meal_suitability = item.meal_suitability;
  if (rng() % 2) f.child_friendly = item.child_friendly;
  if (rng() % 2) f.spiciness = item.spiciness;
  if (rng() % 2) f.price = item.price;
  if (!f.any()) f.cuisine = item.cuisine;
  return f;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  std::random_device rd;
  auto p = std::filesystem::temp_directory_path() / ("railagent-" + tag + "-" + std::to_string(rd()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
