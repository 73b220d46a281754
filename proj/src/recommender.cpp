#include "railagent/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "railagent/text.hpp"

namespace railagent {

using nlohmann::ordered_json;

void PassengerProfile::validate() const {
  if (age && (*age < 0 || *age > 130)) throw std::invalid_argument("age must be within 0..130");
}

std::string PassengerProfile::describe() const {
  std::string out;
  auto add = [&](std::string_view key, const std::string& value) {
    if (!out.empty()) out += "; ";
    out += std::string(key) + ": " + value;
  };
  if (gender) add("gender", *gender);
  if (age) add("age", std::to_string(*age));
  if (place_of_birth) add("place of birth", *place_of_birth);
  return out.empty() ? "unknown" : out;
}

ordered_json to_json(const PassengerProfile& p) {
  ordered_json j;
  j["passenger_id"] = p.passenger_id;
  j["gender"] = p.gender ? ordered_json(*p.gender) : ordered_json(nullptr);
  j["age"] = p.age ? ordered_json(*p.age) : ordered_json(nullptr);
  j["place_of_birth"] = p.place_of_birth ? ordered_json(*p.place_of_birth) : ordered_json(nullptr);
  return j;
}

PassengerProfile profile_from_json(const nlohmann::json& j) {
  PassengerProfile p;
  if (!j.is_object()) throw std::invalid_argument("profile must be an object");
  p.passenger_id = j.value("passenger_id", "");
  if (j.contains("gender") && !j["gender"].is_null()) p.gender = j["gender"].get<std::string>();
  if (j.contains("age") && !j["age"].is_null()) {
    if (!j["age"].is_number_integer()) throw std::invalid_argument("age must be an integer");
    p.age = j["age"].get<int>();
  }
  if (j.contains("place_of_birth") && !j["place_of_birth"].is_null())
    p.place_of_birth = j["place_of_birth"].get<std::string>();
  p.validate();
  return p;
}

std::vector<RecTurn> to_rec_turns(const ConversationHistory& history) {
  std::vector<RecTurn> turns;
  for (const auto& u : history) turns.push_back({u.speaker, u.text, {}});
  return turns;
}

RecPromptTemplate RecPromptTemplate::standard() {
  return {
      "You are a railway catering assistant. Recommend {k} food and drink items that the "
      "passenger may enjoy on board, based on the conversation and the passenger profile "
      "(gender, age, place of birth).",
      "Answer with a numbered list of exactly {k} items and nothing else. Each line must read:\n"
      "N. <dish name> (type=<Chinese|Western>, cuisine=<one of: {cuisines}>, "
      "meal=<breakfast/lunch/dinner/snack>, child_friendly=<yes|no>, "
      "spiciness=<not_spicy/mild/medium/very_spicy/extra_spicy>, price=<CNY>)"};
}

void RecPromptTemplate::validate() const {
  for (std::string_view field : {"type=", "cuisine=", "meal=", "child_friendly=", "spiciness=", "price="})
    if (format_instruction.find(field) == std::string::npos)
      throw std::invalid_argument("format instruction does not name feature field " +
                                  std::string(field.substr(0, field.size() - 1)));
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string render_turns(const std::vector<RecTurn>& history) {
  std::string out;
  for (const auto& t : history) {
    out += t.speaker == Speaker::Passenger ? "Passenger: " : "Agent: ";
    out += t.utterance;
    if (!t.mentioned_items.empty()) {
      out += " [items:";
      for (const auto& i : t.mentioned_items) out += " " + i;
      out += "]";
    }
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace

std::string RecPromptTemplate::render(const PassengerProfile& profile,
                                      const std::vector<RecTurn>& history, int k,
                                      const Legend& legend) const {
  std::string cuisines;
  for (const auto& [code, label] : legend.cuisine) cuisines += (cuisines.empty() ? "" : "/") + label;
  auto hist = render_turns(history);
  auto prof = profile.describe();
  auto subst = [&](std::string s) {
    replace_all(s, "{k}", std::to_string(k));
    replace_all(s, "{profile}", prof);
    replace_all(s, "{history}", hist);
    replace_all(s, "{cuisines}", cuisines);
    return s;
  };
  return subst(task_description) + "\n\n" + subst(format_instruction) + "\n\nConversation:\n" + hist +
         "\n\nPassenger profile: " + prof;
}

namespace {

std::optional<double> first_number(std::string_view s) {
  static const std::regex re(R"((\d+(?:\.\d+)?))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(s.begin(), s.end(), m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

template <size_t N>
std::optional<std::array<bool, N>> parse_flag_list(std::string_view value,
                                                   const std::array<std::string_view, N>& names) {
  std::array<bool, N> flags{};
  bool any = false;
  std::string v(value);
  for (char& c : v)
    if (c == '|' || c == '+' || c == '&') c = '/';
  for (const auto& part : split(v, '/')) {
    auto norm = normalize_name(part);
    for (size_t i = 0; i < N; ++i)
      if (norm == normalize_name(names[i])) {
        flags[i] = true;
        any = true;
      }
  }
  return any ? std::optional(flags) : std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view v) {
  auto norm = normalize_name(v);
  if (norm == "yes" || norm == "true" || norm == "1" || norm == "y") return true;
  if (norm == "no" || norm == "false" || norm == "0" || norm == "n") return false;
  return std::nullopt;
}

}  // namespace

std::optional<PartialFeatures> parse_claimed_features(std::string_view tuple, const Legend& legend) {
  PartialFeatures f;
  std::string t(tuple);
  for (char& c : t)
    if (c == ';') c = ',';
  for (const auto& raw : split(t, ',')) {
    auto part = trim(raw);
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string::npos) eq = part.find(':');
    if (eq != std::string::npos) {
      auto key = normalize_name(part.substr(0, eq));
      auto value = trim(std::string_view(part).substr(eq + 1));
      if (key == "type" || key == "type of food") {
        if (auto c = legend.type_code(value)) f.type_of_food = c;
      } else if (key == "cuisine") {
        if (auto c = legend.cuisine_code(value)) f.cuisine = c;
      } else if (key == "meal" || key == "meal suitability") {
        if (auto m = parse_flag_list(value, kMealFlags)) f.meal_suitability = m;
      } else if (key == "child friendly" || key == "child") {
        if (auto b = parse_yes_no(value)) f.child_friendly = b;
      } else if (key == "spiciness" || key == "spice") {
        if (auto s = parse_flag_list(value, kSpicinessFlags)) f.spiciness = s;
      } else if (key == "price") {
        if (auto p = first_number(value)) f.price = p;
      }
      continue;
    }
    // bare positional tokens: type / cuisine / spiciness labels
    if (auto c = legend.type_code(part)) {
      f.type_of_food = c;
    } else if (auto c2 = legend.cuisine_code(part)) {
      f.cuisine = c2;
    } else if (auto s = parse_flag_list(part, kSpicinessFlags)) {
      f.spiciness = s;
    } else if (normalize_name(part) == "child friendly") {
      f.child_friendly = true;
    }
  }
  if (!f.any()) return std::nullopt;
  return f;
}

ParsedRecommendations parse_recommendation_list(std::string_view text, const Legend& legend, int k) {
  static const std::regex item_re(R"(^\s*(\d+)\s*[.)]\s*(.*)$)");
  ParsedRecommendations out;
  int lineno = 0;
  for (auto line : split_lines(text)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, item_re)) {
      out.warnings.push_back("line " + std::to_string(lineno) + ": not a numbered item: " + trim(line));
      continue;
    }
    std::string body = m[2].str();
    replace_all(body, "**", "");
    std::string name = body;
    std::optional<PartialFeatures> features;
    if (auto open = body.find('('); open != std::string::npos) {
      name = body.substr(0, open);
      auto close = body.rfind(')');
      auto inner = body.substr(open + 1, close == std::string::npos || close < open
                                             ? std::string::npos
                                             : close - open - 1);
      features = parse_claimed_features(inner, legend);
    }
    name = trim(name);
    while (!name.empty() && (name.back() == '-' || name.back() == ':')) name = trim(name.substr(0, name.size() - 1));
    if (name.empty()) {
      out.warnings.push_back("line " + std::to_string(lineno) + ": item without a name");
      continue;
    }
    if (static_cast<int>(out.items.size()) < k) out.items.push_back({std::move(name), std::move(features)});
  }
  return out;
}

double weighted_block_cosine(std::span<const double> a, std::span<const double> b,
                             std::span<const BlockRange> blocks, std::span<const bool> populated,
                             std::span<const double> weights) {
  if (a.size() != b.size()) throw LegendMismatch("feature vectors differ in dimensionality");
  if (blocks.size() != populated.size() || blocks.size() != weights.size())
    throw LegendMismatch("block description does not match weights");
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (!populated[i] || weights[i] == 0.0) continue;
    if (weights[i] < 0) throw std::invalid_argument("block weights must be non-negative");
    if (blocks[i].offset + blocks[i].size > a.size()) throw LegendMismatch("block outside vector");
    double d = 0, sa = 0, sb = 0;
    for (size_t j = blocks[i].offset; j < blocks[i].offset + blocks[i].size; ++j) {
      d += a[j] * b[j];
      sa += a[j] * a[j];
      sb += b[j] * b[j];
    }
    dot += weights[i] * d;
    na += weights[i] * sa;
    nb += weights[i] * sb;
  }
  if (na <= 0 || nb <= 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

namespace {

std::array<BlockRange, kFeatureBlockCount> ranges(const FeatureLayout& layout) {
  std::array<BlockRange, kFeatureBlockCount> r{};
  for (size_t i = 0; i < kFeatureBlockCount; ++i) r[i] = {layout.offset[i], layout.size[i]};
  return r;
}

}  // namespace

double similarity(const PartialVector& a, const FeatureVector& b, const FeatureLayout& layout,
                  const BlockWeights& weights) {
  if (a.vector.values.size() != layout.dim || b.values.size() != layout.dim)
    throw LegendMismatch("vector does not follow the corpus layout");
  auto r = ranges(layout);
  return weighted_block_cosine(a.vector.values, b.values, r, a.populated, weights);
}

double similarity(const FeatureVector& a, const FeatureVector& b, const FeatureLayout& layout,
                  const BlockWeights& weights) {
  PartialVector pa{a, {}};
  pa.populated.fill(true);
  return similarity(pa, b, layout, weights);
}

std::string_view basis_name(MatchBasis b) {
  switch (b) {
    case MatchBasis::ExactName: return "exact_name";
    case MatchBasis::Feature: return "feature";
    case MatchBasis::LexicalFallback: return "lexical_fallback";
  }
  return "?";
}

ordered_json to_json(const AlignedRecommendation& r) {
  ordered_json j;
  j["source"] = r.source.name;
  j["item_id"] = r.matched->item_id;
  j["name"] = r.matched->name;
  j["restaurant"] = r.matched->restaurant;
  j["city"] = r.matched->city;
  j["price"] = r.matched->price;
  auto spice = ordered_json::array();
  for (size_t i = 0; i < kSpicinessFlags.size(); ++i)
    if (r.matched->spiciness[i]) spice.push_back(kSpicinessFlags[i]);
  j["spiciness"] = spice;
  j["score"] = r.similarity_score;
  j["basis"] = basis_name(r.match_basis);
  return j;
}

Recommender::Recommender(const Corpus& corpus, LlmBackend& backend, RecPromptTemplate templ,
                         AlignOptions options)
    : corpus_(corpus), backend_(backend), templ_(std::move(templ)), options_(std::move(options)) {
  templ_.validate();
}

ParsedRecommendations Recommender::recommend_preliminary(const PassengerProfile& profile,
                                                         const std::vector<RecTurn>& history,
                                                         int k) const {
  if (k < 1) throw std::invalid_argument("k must be positive");
  bool has_passenger = std::any_of(history.begin(), history.end(), [](const RecTurn& t) {
    return t.speaker == Speaker::Passenger && !trim(t.utterance).empty();
  });
  if (!has_passenger) throw std::invalid_argument("history needs at least one passenger turn");

  auto prompt = templ_.render(profile, history, k, corpus_.legend());
  auto parsed = parse_recommendation_list(backend_.complete(prompt, {}), corpus_.legend(), k);
  if (!parsed.items.empty()) return parsed;

  auto retry = parse_recommendation_list(
      backend_.complete(prompt + "\n\nReminder: reply only with the numbered list in the required format.", {}),
      corpus_.legend(), k);
  retry.warnings.insert(retry.warnings.begin(), parsed.warnings.begin(), parsed.warnings.end());
  if (retry.items.empty()) throw EmptyRecommendation("no recommendation could be parsed from the model output");
  return retry;
}

RecommendationResult Recommender::recommend(const PassengerProfile& profile,
                                            const std::vector<RecTurn>& history, int k) const {
  auto parsed = recommend_preliminary(profile, history, k);
  RecommendationResult r;
  r.aligned = align(parsed.items, corpus_, k, options_);
  r.preliminary = std::move(parsed.items);
  r.warnings = std::move(parsed.warnings);
  return r;
}

}  // namespace railagent
