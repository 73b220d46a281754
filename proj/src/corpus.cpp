#include "railagent/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

Legend Legend::standard() {
  Legend l;
  l.type_of_food = {{1, "Chinese"}, {2, "Western"}};
  l.cuisine = {{1, "Sichuan"}, {2, "Cantonese"}, {3, "Shandong"}};
  return l;
}

namespace {

std::optional<int> lookup_code(const std::map<int, std::string>& table, std::string_view name) {
  auto norm = normalize_name(name);
  for (const auto& [code, label] : table)
    if (normalize_name(label) == norm) return code;
  return std::nullopt;
}

}  // namespace

std::optional<int> Legend::type_code(std::string_view name) const {
  return lookup_code(type_of_food, name);
}
std::optional<int> Legend::cuisine_code(std::string_view name) const {
  return lookup_code(cuisine, name);
}

void validate_item(const DishItem& item, const Legend& legend) {
  if (item.item_id.empty()) throw InvariantError("item_id must be non-empty");
  if (item.name.empty()) throw InvariantError("name must be non-empty");
  if (!(item.price >= 0)) throw InvariantError("price must be >= 0");
  if (!legend.type_of_food.count(item.type_of_food))
    throw LegendError("type_of_food code " + std::to_string(item.type_of_food) + " not in legend");
  if (!legend.cuisine.count(item.cuisine))
    throw LegendError("cuisine code " + std::to_string(item.cuisine) + " not in legend");
  if (std::none_of(item.meal_suitability.begin(), item.meal_suitability.end(), [](bool b) { return b; }))
    throw InvariantError("at least one meal_suitability flag must be set");
  const auto& sp = item.spiciness;
  if (std::none_of(sp.begin(), sp.end(), [](bool b) { return b; }))
    throw InvariantError("at least one spiciness flag must be set");
  if (sp[0] && std::any_of(sp.begin() + 1, sp.end(), [](bool b) { return b; }))
    throw InvariantError("spiciness exclusivity violated: not_spicy set together with a spicy level");
}

std::string_view block_name(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::TypeOfFood: return "type_of_food";
    case FeatureBlock::Cuisine: return "cuisine";
    case FeatureBlock::Meal: return "meal_suitability";
    case FeatureBlock::ChildFriendly: return "child_friendly";
    case FeatureBlock::Spiciness: return "spiciness";
    case FeatureBlock::Price: return "price";
  }
  return "?";
}

FeatureLayout FeatureLayout::build(const Legend& legend, const std::vector<double>& prices) {
  if (legend.price_bins < 1) throw LegendError("price_bins must be >= 1");
  FeatureLayout l;
  for (const auto& [code, _] : legend.type_of_food) l.type_codes.push_back(code);
  for (const auto& [code, _] : legend.cuisine) l.cuisine_codes.push_back(code);

  std::vector<double> sorted = prices;
  std::sort(sorted.begin(), sorted.end());
  const auto bins = static_cast<size_t>(legend.price_bins);
  for (size_t i = 1; i < bins; ++i)
    l.price_cuts.push_back(sorted.empty() ? 0.0 : sorted[i * sorted.size() / bins]);

  l.size = {l.type_codes.size(), l.cuisine_codes.size(), kMealFlags.size(), 1,
            kSpicinessFlags.size(), bins};
  size_t at = 0;
  for (size_t b = 0; b < kFeatureBlockCount; ++b) {
    l.offset[b] = at;
    at += l.size[b];
  }
  l.dim = at;
  return l;
}

int FeatureLayout::price_bin(double price) const {
  return static_cast<int>(std::upper_bound(price_cuts.begin(), price_cuts.end(), price) -
                          price_cuts.begin());
}

PartialFeatures PartialFeatures::from_item(const DishItem& item) {
  return {item.type_of_food, item.cuisine,  item.meal_suitability,
          item.child_friendly, item.spiciness, item.price};
}

namespace {

std::optional<size_t> code_position(const std::vector<int>& codes, int code) {
  auto it = std::lower_bound(codes.begin(), codes.end(), code);
  if (it == codes.end() || *it != code) return std::nullopt;
  return static_cast<size_t>(it - codes.begin());
}

size_t off(const FeatureLayout& l, FeatureBlock b) { return l.offset[static_cast<size_t>(b)]; }

}  // namespace

PartialVector encode_partial(const PartialFeatures& f, const FeatureLayout& layout) {
  PartialVector pv;
  pv.vector.values.assign(layout.dim, 0.0);
  auto& v = pv.vector.values;
  auto mark = [&](FeatureBlock b) { pv.populated[static_cast<size_t>(b)] = true; };

  if (f.type_of_food)
    if (auto pos = code_position(layout.type_codes, *f.type_of_food)) {
      v[off(layout, FeatureBlock::TypeOfFood) + *pos] = 1.0;
      mark(FeatureBlock::TypeOfFood);
    }
  if (f.cuisine)
    if (auto pos = code_position(layout.cuisine_codes, *f.cuisine)) {
      v[off(layout, FeatureBlock::Cuisine) + *pos] = 1.0;
      mark(FeatureBlock::Cuisine);
    }
  if (f.meal_suitability) {
    for (size_t i = 0; i < kMealFlags.size(); ++i)
      v[off(layout, FeatureBlock::Meal) + i] = (*f.meal_suitability)[i] ? 1.0 : 0.0;
    mark(FeatureBlock::Meal);
  }
  if (f.child_friendly) {
    v[off(layout, FeatureBlock::ChildFriendly)] = *f.child_friendly ? 1.0 : 0.0;
    mark(FeatureBlock::ChildFriendly);
  }
  if (f.spiciness) {
    for (size_t i = 0; i < kSpicinessFlags.size(); ++i)
      v[off(layout, FeatureBlock::Spiciness) + i] = (*f.spiciness)[i] ? 1.0 : 0.0;
    mark(FeatureBlock::Spiciness);
  }
  if (f.price && *f.price >= 0) {
    v[off(layout, FeatureBlock::Price) + static_cast<size_t>(layout.price_bin(*f.price))] = 1.0;
    mark(FeatureBlock::Price);
  }
  return pv;
}

FeatureVector encode_features(const DishItem& item, const FeatureLayout& layout) {
  if (!code_position(layout.type_codes, item.type_of_food))
    throw LegendError("item " + item.item_id + ": type_of_food code " +
                      std::to_string(item.type_of_food) + " not in legend");
  if (!code_position(layout.cuisine_codes, item.cuisine))
    throw LegendError("item " + item.item_id + ": cuisine code " + std::to_string(item.cuisine) +
                      " not in legend");
  return encode_partial(PartialFeatures::from_item(item), layout).vector;
}

DecodedCategoricals decode_features(const FeatureVector& v, const FeatureLayout& layout) {
  if (v.values.size() != layout.dim) throw LegendError("vector dimensionality does not match layout");
  auto hot = [&](FeatureBlock b, const std::vector<int>& codes) {
    for (size_t i = 0; i < codes.size(); ++i)
      if (v.values[off(layout, b) + i] != 0.0) return codes[i];
    throw LegendError(std::string("no bit set in block ") + std::string(block_name(b)));
  };
  DecodedCategoricals d{};
  d.type_of_food = hot(FeatureBlock::TypeOfFood, layout.type_codes);
  d.cuisine = hot(FeatureBlock::Cuisine, layout.cuisine_codes);
  for (size_t i = 0; i < kMealFlags.size(); ++i)
    d.meal_suitability[i] = v.values[off(layout, FeatureBlock::Meal) + i] != 0.0;
  d.child_friendly = v.values[off(layout, FeatureBlock::ChildFriendly)] != 0.0;
  for (size_t i = 0; i < kSpicinessFlags.size(); ++i)
    d.spiciness[i] = v.values[off(layout, FeatureBlock::Spiciness) + i] != 0.0;
  return d;
}

Corpus::Corpus(Legend legend, std::vector<DishItem> items)
    : legend_(std::move(legend)), items_(std::move(items)) {
  std::vector<double> prices;
  prices.reserve(items_.size());
  for (size_t i = 0; i < items_.size(); ++i) {
    validate_item(items_[i], legend_);
    if (!by_id_.emplace(items_[i].item_id, i).second)
      throw InvariantError("duplicate item_id " + items_[i].item_id);
    prices.push_back(items_[i].price);
  }
  for (size_t i = 0; i < items_.size(); ++i) {
    auto key = normalize_name(items_[i].name);
    auto [it, inserted] = by_name_.emplace(key, i);
    if (!inserted && items_[i].item_id < items_[it->second].item_id) it->second = i;
  }
  layout_ = FeatureLayout::build(legend_, prices);
  vectors_.reserve(items_.size());
  for (const auto& item : items_) vectors_.push_back(encode_features(item, layout_));
}

const DishItem* Corpus::find_id(std::string_view item_id) const {
  auto it = by_id_.find(item_id);
  return it == by_id_.end() ? nullptr : &items_[it->second];
}

std::optional<size_t> Corpus::index_of_name(std::string_view name) const {
  auto it = by_name_.find(normalize_name(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const DishItem* Corpus::find_name(std::string_view name) const {
  auto idx = index_of_name(name);
  return idx ? &items_[*idx] : nullptr;
}

namespace {

template <size_t N>
std::array<bool, N> read_flags(const ordered_json& j, std::string_view field) {
  if (!j.is_array() || j.size() != N)
    throw FormatError(std::string(field) + " must be an array of " + std::to_string(N) + " flags");
  std::array<bool, N> out{};
  for (size_t i = 0; i < N; ++i) {
    int v = j[i].get<int>();
    if (v != 0 && v != 1) throw FormatError(std::string(field) + " flags must be 0 or 1");
    out[i] = v == 1;
  }
  return out;
}

template <size_t N>
ordered_json write_flags(const std::array<bool, N>& flags) {
  auto j = ordered_json::array();
  for (bool b : flags) j.push_back(b ? 1 : 0);
  return j;
}

std::map<int, std::string> read_code_table(const ordered_json& j, std::string_view field) {
  std::map<int, std::string> table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int code = 0;
    try {
      code = std::stoi(it.key());
    } catch (const std::exception&) {
      throw FormatError("legend." + std::string(field) + ": code \"" + it.key() + "\" is not an integer");
    }
    table[code] = it.value().get<std::string>();
  }
  return table;
}

Legend read_legend(const ordered_json& header) {
  if (header.value("format", "") != kCorpusFormat)
    throw FormatError("line 1: expected header with format \"" + std::string(kCorpusFormat) + "\"");
  int version = header.value("version", 0);
  if (version != kCorpusFormatVersion)
    throw FormatError("line 1: unsupported corpus format version " + std::to_string(version));
  Legend legend = Legend::standard();
  if (header.contains("legend")) {
    const auto& jl = header.at("legend");
    if (jl.contains("type_of_food")) {
      for (const auto& [code, label] : read_code_table(jl.at("type_of_food"), "type_of_food")) {
        auto fixed = legend.type_of_food.find(code);
        if (fixed != legend.type_of_food.end() && normalize_name(fixed->second) != normalize_name(label))
          throw LegendError("legend redefines fixed type_of_food code " + std::to_string(code));
        legend.type_of_food[code] = label;
      }
    }
    if (jl.contains("cuisine")) {
      for (const auto& [code, label] : read_code_table(jl.at("cuisine"), "cuisine")) {
        auto fixed = legend.cuisine.find(code);
        if (fixed != legend.cuisine.end() && normalize_name(fixed->second) != normalize_name(label))
          throw LegendError("legend redefines fixed cuisine code " + std::to_string(code));
        legend.cuisine[code] = label;
      }
    }
    legend.price_bins = jl.value("price_bins", legend.price_bins);
  }
  return legend;
}

DishItem read_item(const ordered_json& j) {
  DishItem d;
  d.item_id = j.at("item_id").get<std::string>();
  d.name = j.at("name").get<std::string>();
  d.city = j.at("city").get<std::string>();
  d.restaurant = j.value("restaurant", "");
  d.price = j.at("price").get<double>();
  if (j.contains("image_ref") && !j.at("image_ref").is_null())
    d.image_ref = j.at("image_ref").get<std::string>();
  d.type_of_food = j.at("type_of_food").get<int>();
  d.cuisine = j.at("cuisine").get<int>();
  d.meal_suitability = read_flags<kMealFlags.size()>(j.at("meal_suitability"), "meal_suitability");
  auto child = j.at("child_friendly");
  d.child_friendly = child.is_boolean() ? child.get<bool>() : child.get<int>() != 0;
  d.spiciness = read_flags<kSpicinessFlags.size()>(j.at("spiciness"), "spiciness");
  return d;
}

ordered_json write_item(const DishItem& d) {
  ordered_json j;
  j["item_id"] = d.item_id;
  j["name"] = d.name;
  j["city"] = d.city;
  j["restaurant"] = d.restaurant;
  j["price"] = d.price;
  if (d.image_ref) j["image_ref"] = *d.image_ref;
  j["type_of_food"] = d.type_of_food;
  j["cuisine"] = d.cuisine;
  j["meal_suitability"] = write_flags(d.meal_suitability);
  j["child_friendly"] = d.child_friendly ? 1 : 0;
  j["spiciness"] = write_flags(d.spiciness);
  return j;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source) {
  std::string line;
  size_t lineno = 0;
  std::optional<Legend> legend;
  std::vector<DishItem> items;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto where = source + ":" + std::to_string(lineno);
    ordered_json j;
    try {
      j = ordered_json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": malformed record: " + e.what());
    }
    if (!legend) {
      try {
        legend = read_legend(j);
      } catch (const CorpusError& e) {
        throw FormatError(where + ": " + e.what());
      }
      continue;
    }
    DishItem item;
    try {
      item = read_item(j);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": malformed item: " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    auto tag = where + " (item " + item.item_id + "): ";
    try {
      validate_item(item, *legend);
    } catch (const LegendError& e) {
      throw LegendError(tag + e.what());
    } catch (const InvariantError& e) {
      throw InvariantError(tag + e.what());
    }
    if (!ids.insert(item.item_id).second) throw InvariantError(tag + "duplicate item_id");
    items.push_back(std::move(item));
  }
  if (!legend) throw FormatError(source + ": missing legend header");
  return Corpus(std::move(*legend), std::move(items));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus " + path.string());
  return parse_corpus(in, path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  ordered_json header;
  header["format"] = kCorpusFormat;
  header["version"] = kCorpusFormatVersion;
  ordered_json legend;
  ordered_json types, cuisines;
  for (const auto& [code, label] : corpus.legend().type_of_food) types[std::to_string(code)] = label;
  for (const auto& [code, label] : corpus.legend().cuisine) cuisines[std::to_string(code)] = label;
  legend["type_of_food"] = types;
  legend["cuisine"] = cuisines;
  legend["price_bins"] = corpus.legend().price_bins;
  header["legend"] = legend;
  std::ostringstream out;
  out << header.dump() << "\n";
  for (const auto& item : corpus.items()) out << write_item(item).dump() << "\n";
  return out.str();
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.items = corpus.size();
  for (const auto& item : corpus.items()) {
    ++s.per_city[item.city];
    ++s.per_cuisine[corpus.legend().cuisine.at(item.cuisine)];
  }
  return s;
}

}  // namespace railagent
