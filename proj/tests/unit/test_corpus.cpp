#include <doctest.h>

#include <random>
#include <sstream>

#include "railagent/corpus.hpp"
#include "test_support.hpp"

using namespace railagent;

namespace {

const char* kHeader = R"({"format": "dish-catalog-jsonl", "version": 1, "legend": {"cuisine": {"4": "Huaiyang"}}})";

std::string item_line(const std::string& id, const std::string& extra = "") {
  return R"({"item_id": ")" + id +
         R"(", "name": "Noodle", "city": "Chongqing", "restaurant": "R", "price": 12, "type_of_food": 1, "cuisine": 1, "meal_suitability": [0,1,1,0], "child_friendly": 1, "spiciness": [0,1,0,0,0])" +
         extra + "}";
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, "mem");
}

template <class E>
std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("sample corpus loads") {
  auto c = load_corpus(testsupport::data_dir() / "corpus" / "sample_corpus.jsonl");
  CHECK(c.size() == 40);
  CHECK(c.legend().cuisine.at(4) == "Huaiyang");
  CHECK(c.find_id("D002")->name == "Spicy Chicken Burger");
  CHECK(c.find_name("spicy chicken-burger")->item_id == "D002");
  auto stats = corpus_stats(c);
  CHECK(stats.per_city.at("Chongqing") == 20);
  CHECK(stats.per_city.at("Shanghai") == 20);
}

TEST_CASE("parse errors carry the row") {
  CHECK(error_of<FormatError>(std::string(kHeader) + "\n" + item_line("A") + "\n{oops").find("mem:3") == 0);
  CHECK(error_of<FormatError>(item_line("A")).find("mem:1") == 0);
  CHECK(error_of<FormatError>("").find("missing legend") != std::string::npos);
  auto bad_flags = std::string(kHeader) + "\n" + item_line("A", R"(, "meal_suitability": [0,1,2,0])");
  CHECK_THROWS_AS(parse(bad_flags), FormatError);
}

TEST_CASE("item invariants") {
  auto h = std::string(kHeader) + "\n";
  auto no_meal = h + item_line("A", R"(, "meal_suitability": [0,0,0,0])");
  CHECK(error_of<InvariantError>(no_meal).find("mem:2 (item A)") == 0);
  auto exclusive = h + item_line("A", R"(, "spiciness": [1,1,0,0,0])");
  CHECK(error_of<InvariantError>(exclusive).find("exclusivity") != std::string::npos);
  auto no_spice = h + item_line("A", R"(, "spiciness": [0,0,0,0,0])");
  CHECK_THROWS_AS(parse(no_spice), InvariantError);
  auto negative = h + item_line("A", R"(, "price": -1)");
  CHECK_THROWS_AS(parse(negative), InvariantError);
  auto dup = h + item_line("A") + "\n" + item_line("A");
  CHECK(error_of<InvariantError>(dup).find("duplicate") != std::string::npos);
  auto unknown_cuisine = h + item_line("A", R"(, "cuisine": 9)");
  CHECK_THROWS_AS(parse(unknown_cuisine), LegendError);
  auto redefine = std::string(R"({"format": "dish-catalog-jsonl", "version": 1, "legend": {"cuisine": {"1": "Hunan"}}})");
  CHECK_THROWS_AS(parse(redefine), FormatError);
}

TEST_CASE("feature layout and encoding") {
  auto c = parse(std::string(kHeader) + "\n" + item_line("A"));
  const auto& l = c.layout();
  CHECK(l.size[0] == 2);
  CHECK(l.size[1] == 4);
  CHECK(l.dim == 2 + 4 + 4 + 1 + 5 + 5);
  const auto& v = c.vectors()[0].values;
  std::vector<double> expected = {1, 0, 1, 0, 0, 0, 0, 1, 1, 0, 1, 0, 1, 0, 0, 0};
  expected.resize(l.dim, 0.0);
  expected[l.offset[5] + static_cast<size_t>(l.price_bin(12))] = 1;
  CHECK(v == expected);
}

TEST_CASE("price cuts are quantile boundaries") {
  Legend legend = Legend::standard();
  auto l = FeatureLayout::build(legend, {50, 10, 40, 20, 30, 60, 70, 80, 90, 100});
  CHECK(l.price_cuts == std::vector<double>{30, 50, 70, 90});
  CHECK(l.price_bin(10) == 0);
  CHECK(l.price_bin(30) == 1);
  CHECK(l.price_bin(89.9) == 3);
  CHECK(l.price_bin(1000) == 4);
}

TEST_CASE("encode/decode round trip on random items") {
  std::mt19937_64 rng(3);
  auto c = testsupport::random_corpus(300, rng);
  for (size_t i = 0; i < c.size(); ++i) {
    const auto& item = c.items()[i];
    auto d = decode_features(c.vectors()[i], c.layout());
    CHECK(d == DecodedCategoricals{item.type_of_food, item.cuisine, item.meal_suitability,
                                   item.child_friendly, item.spiciness});
  }
}

TEST_CASE("serialize round trip") {
  std::mt19937_64 rng(5);
  auto c = testsupport::random_corpus(50, rng);
  auto text = serialize_corpus(c);
  auto back = parse(text);
  CHECK(back.items() == c.items());
  CHECK(back.legend() == c.legend());
  CHECK(serialize_corpus(back) == text);
}

TEST_CASE("find_name picks the lowest id among duplicates") {
  auto h = std::string(kHeader) + "\n";
  auto c = parse(h + item_line("B") + "\n" + item_line("A") + "\n" + item_line("C"));
  CHECK(c.find_name("noodle")->item_id == "A");
  CHECK_FALSE(c.find_name("rice"));
}
