#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "railagent/eval.hpp"
#include "railagent/platform.hpp"
#include "railagent/recommender.hpp"

using namespace railagent;

namespace {

Corpus random_corpus(std::size_t n, std::mt19937_64& rng) {
  std::vector<DishItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    DishItem d;
    char id[32];
    std::snprintf(id, sizeof id, "B%07zu", i);
    d.item_id = id;
    d.name = "Dish " + std::to_string(i) + " " + std::to_string(rng() % 97);
    d.city = rng() % 2 ? "Chongqing" : "Shanghai";
    d.price = 5.0 + static_cast<double>(rng() % 9500) / 100.0;
    d.type_of_food = 1 + static_cast<int>(rng() % 2);
    d.cuisine = 1 + static_cast<int>(rng() % 3);
    for (auto& m : d.meal_suitability) m = rng() % 2;
    d.meal_suitability[rng() % 4] = true;
    d.child_friendly = rng() % 2;
    if (rng() % 3 == 0) {
      d.spiciness[0] = true;
    } else {
      for (std::size_t s = 1; s < 5; ++s) d.spiciness[s] = rng() % 2;
      d.spiciness[1 + rng() % 4] = true;
    }
    items.push_back(std::move(d));
  }
  return Corpus(Legend::standard(), std::move(items));
}

template <typename F>
double seconds(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  std::mt19937_64 rng(42);
  std::printf("threads: %d\n", omp_get_max_threads());

  for (std::size_t n : {1000u, 20000u, 200000u}) {
    auto corpus = random_corpus(n, rng);
    std::vector<PartialVector> queries;
    for (int q = 0; q < 50; ++q)
      queries.push_back(encode_partial(PartialFeatures::from_item(corpus.items()[rng() % n]), corpus.layout()));
    std::size_t mismatches = 0;
    std::vector<std::size_t> par_idx, ser_idx;
    double tp = seconds([&] {
      for (const auto& q : queries) par_idx.push_back(feature_argmax(q, corpus, kUniformWeights).index);
    });
    double ts = seconds([&] {
      for (const auto& q : queries) ser_idx.push_back(feature_argmax_serial(q, corpus, kUniformWeights).index);
    });
    for (std::size_t i = 0; i < par_idx.size(); ++i) mismatches += par_idx[i] != ser_idx[i];
    std::printf("feature_argmax  n=%-7zu serial %8.4fs  parallel %8.4fs  speedup %5.2fx  mismatches %zu\n", n, ts,
                tp, ts / tp, mismatches);
  }

  auto config = AppConfig::defaults(RAILAGENT_DATA_DIR);
  auto stores = load_stores(config);
  auto base = load_scenarios(std::filesystem::path(RAILAGENT_DATA_DIR) / "scenarios");
  std::vector<Scenario> scenarios;
  for (int r = 0; r < 40; ++r)
    for (auto s : base) {
      s.scenario_id += "#" + std::to_string(r);
      scenarios.push_back(std::move(s));
    }
  SuiteContext ctx{stores, config};
  std::vector<ScenarioResult> par, ser;
  double tp = seconds([&] { par = run_suite(scenarios, ctx); });
  double ts = seconds([&] { ser = run_suite_serial(scenarios, ctx); });
  bool same = build_report(par, *stores.corpus).dump() == build_report(ser, *stores.corpus).dump();
  std::printf("run_suite       n=%-7zu serial %8.4fs  parallel %8.4fs  speedup %5.2fx  identical %s\n",
              scenarios.size(), ts, tp, ts / tp, same ? "yes" : "NO");
  return same ? 0 : 1;
}
