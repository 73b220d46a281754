#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace railagent {

/// Tool arguments extracted from the model output. Keys are lower-cased,
/// insertion order is preserved and a repeated key overwrites in place.
class SlotMap {
 public:
  using Entry = std::pair<std::string, std::string>;

  SlotMap() = default;
  SlotMap(std::initializer_list<Entry> init);

  void set(std::string_view name, std::string value);
  /// Sets the slot only when it is not present yet.
  void fill(std::string_view name, std::string value);
  std::optional<std::string> get(std::string_view name) const;
  bool has(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }

  friend bool operator==(const SlotMap&, const SlotMap&) = default;

 private:
  std::vector<Entry> entries_;
};

/// "a=1, b=2" -> {a:1, b:2}. A line without '=' becomes the single slot
/// "query". Blank input yields an empty map.
SlotMap parse_slot_line(std::string_view line);
std::string format_slot_line(const SlotMap& slots);

nlohmann::ordered_json to_json(const SlotMap& slots);
SlotMap slots_from_json(const nlohmann::ordered_json& j);

}  // namespace railagent
