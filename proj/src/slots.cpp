#include "railagent/slots.hpp"

#include <algorithm>
#include <stdexcept>

#include "railagent/text.hpp"

namespace railagent {

SlotMap::SlotMap(std::initializer_list<Entry> init) {
  for (const auto& [k, v] : init) set(k, v);
}

void SlotMap::set(std::string_view name, std::string value) {
  auto key = to_lower(trim(name));
  if (key.empty()) throw std::invalid_argument("slot name must be non-empty");
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Entry& e) { return e.first == key; });
  if (it != entries_.end())
    it->second = std::move(value);
  else
    entries_.emplace_back(std::move(key), std::move(value));
}

void SlotMap::fill(std::string_view name, std::string value) {
  if (!has(name)) set(name, std::move(value));
}

std::optional<std::string> SlotMap::get(std::string_view name) const {
  auto key = to_lower(trim(name));
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

bool SlotMap::has(std::string_view name) const { return get(name).has_value(); }

SlotMap parse_slot_line(std::string_view line) {
  SlotMap slots;
  auto text = trim(line);
  if (text.empty()) return slots;
  if (text.find('=') == std::string::npos) {
    slots.set("query", text);
    return slots;
  }
  for (const auto& part : split(text, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) continue;
    auto key = trim(std::string_view(part).substr(0, eq));
    if (key.empty()) continue;
    slots.set(key, trim(std::string_view(part).substr(eq + 1)));
  }
  return slots;
}

std::string format_slot_line(const SlotMap& slots) {
  std::string out;
  for (const auto& [k, v] : slots.entries()) {
    if (!out.empty()) out += ", ";
    out += k + "=" + v;
  }
  return out;
}

nlohmann::ordered_json to_json(const SlotMap& slots) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : slots.entries()) j[k] = v;
  return j;
}

SlotMap slots_from_json(const nlohmann::ordered_json& j) {
  SlotMap slots;
  for (auto it = j.begin(); it != j.end(); ++it) slots.set(it.key(), it.value().get<std::string>());
  return slots;
}

}  // namespace railagent
