#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace railagent {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr std::string_view kCorpusFormat = "dish-catalog-jsonl";

inline constexpr std::array<std::string_view, 4> kMealFlags = {"breakfast", "lunch", "dinner",
                                                               "snack"};
inline constexpr std::array<std::string_view, 5> kSpicinessFlags = {
    "not_spicy", "mild", "medium", "very_spicy", "extra_spicy"};

using MealFlags = std::array<bool, kMealFlags.size()>;
using SpicinessFlags = std::array<bool, kSpicinessFlags.size()>;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class FormatError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};
class LegendError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};
class InvariantError : public CorpusError {
 public:
  using CorpusError::CorpusError;
};

/// Code tables for the categorical features. Codes 1/2 for type of food and
/// 1..3 for cuisine are fixed; corpora may declare further cuisine codes.
struct Legend {
  std::map<int, std::string> type_of_food;
  std::map<int, std::string> cuisine;
  int price_bins = 5;

  static Legend standard();
  std::optional<int> type_code(std::string_view name) const;
  std::optional<int> cuisine_code(std::string_view name) const;

  friend bool operator==(const Legend&, const Legend&) = default;
};

struct DishItem {
  std::string item_id;
  std::string name;
  std::string city;
  std::string restaurant;
  double price = 0.0;  // CNY
  std::optional<std::string> image_ref;
  int type_of_food = 1;
  int cuisine = 1;
  MealFlags meal_suitability{};
  bool child_friendly = false;
  SpicinessFlags spiciness{};

  friend bool operator==(const DishItem&, const DishItem&) = default;
};

/// Throws InvariantError / LegendError describing the first violation.
void validate_item(const DishItem& item, const Legend& legend);

enum class FeatureBlock : size_t { TypeOfFood, Cuisine, Meal, ChildFriendly, Spiciness, Price };
inline constexpr size_t kFeatureBlockCount = 6;
std::string_view block_name(FeatureBlock b);

/// Vector layout: [type one-hot | cuisine one-hot | meal multi-hot |
/// child 0/1 | spiciness multi-hot | price-bin one-hot]. Categorical
/// one-hot positions follow ascending legend code.
struct FeatureLayout {
  std::vector<int> type_codes;
  std::vector<int> cuisine_codes;
  std::vector<double> price_cuts;  // ascending quantile boundaries, size bins-1
  std::array<size_t, kFeatureBlockCount> offset{};
  std::array<size_t, kFeatureBlockCount> size{};
  size_t dim = 0;

  static FeatureLayout build(const Legend& legend, const std::vector<double>& prices);
  int price_bin(double price) const;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct FeatureVector {
  std::vector<double> values;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// A possibly incomplete feature record, e.g. one claimed by the model for a
/// dish that is not in the catalog.
struct PartialFeatures {
  std::optional<int> type_of_food;
  std::optional<int> cuisine;
  std::optional<MealFlags> meal_suitability;
  std::optional<bool> child_friendly;
  std::optional<SpicinessFlags> spiciness;
  std::optional<double> price;

  bool any() const {
    return type_of_food || cuisine || meal_suitability || child_friendly || spiciness || price;
  }
  static PartialFeatures from_item(const DishItem& item);
  friend bool operator==(const PartialFeatures&, const PartialFeatures&) = default;
};

struct PartialVector {
  FeatureVector vector;
  std::array<bool, kFeatureBlockCount> populated{};
};

FeatureVector encode_features(const DishItem& item, const FeatureLayout& layout);
/// Unknown categorical codes leave their block unpopulated.
PartialVector encode_partial(const PartialFeatures& f, const FeatureLayout& layout);

struct DecodedCategoricals {
  int type_of_food;
  int cuisine;
  MealFlags meal_suitability;
  bool child_friendly;
  SpicinessFlags spiciness;
  friend bool operator==(const DecodedCategoricals&, const DecodedCategoricals&) = default;
};
DecodedCategoricals decode_features(const FeatureVector& v, const FeatureLayout& layout);

/// Immutable dish catalog with precomputed feature vectors.
class Corpus {
 public:
  Corpus(Legend legend, std::vector<DishItem> items);

  const Legend& legend() const { return legend_; }
  const FeatureLayout& layout() const { return layout_; }
  const std::vector<DishItem>& items() const { return items_; }
  const std::vector<FeatureVector>& vectors() const { return vectors_; }
  size_t size() const { return items_.size(); }

  const DishItem* find_id(std::string_view item_id) const;
  /// Lowest item_id among items whose normalized name matches.
  const DishItem* find_name(std::string_view name) const;
  std::optional<size_t> index_of_name(std::string_view name) const;
  size_t index_of(const DishItem& item) const { return static_cast<size_t>(&item - items_.data()); }

 private:
  Legend legend_;
  std::vector<DishItem> items_;
  FeatureLayout layout_;
  std::vector<FeatureVector> vectors_;
  std::map<std::string, size_t, std::less<>> by_id_;
  std::map<std::string, size_t, std::less<>> by_name_;
};

Corpus parse_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

struct CorpusStats {
  size_t items = 0;
  std::map<std::string, size_t> per_city;
  std::map<std::string, size_t> per_cuisine;
};
CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace railagent
