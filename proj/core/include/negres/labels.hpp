#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace negres {

/// Beat classes: normal, ventricular premature, supraventricular premature,
/// atrial fibrillation, electromagnetic interference, motion interference.
enum class Label : std::uint8_t { N = 0, V = 1, S = 2, A = 3, E = 4, Q = 5 };

inline constexpr std::array<Label, 6> kAllLabels{Label::N, Label::V, Label::S,
                                                 Label::A, Label::E, Label::Q};

char label_code(Label l) noexcept;
/// Throws DataError for anything but N/V/S/A/E/Q.
Label parse_label(std::string_view code);
std::optional<Label> try_parse_label(std::string_view code) noexcept;

/// Ordered label set. The full view has six classes; the merged view folds
/// E into Q and has five (N, V, S, A, Q).
class LabelTaxonomy {
 public:
  static LabelTaxonomy full() { return LabelTaxonomy(false); }
  static LabelTaxonomy merged() { return LabelTaxonomy(true); }

  bool is_merged() const noexcept { return merged_; }
  std::size_t size() const noexcept { return merged_ ? 5 : 6; }

  /// Class index of `l`; in the merged view E maps to Q's index.
  std::size_t index_of(Label l) const noexcept;
  Label label_at(std::size_t index) const;
  bool contains(Label l) const noexcept { return !merged_ || l != Label::E; }

  friend bool operator==(LabelTaxonomy, LabelTaxonomy) = default;

 private:
  explicit LabelTaxonomy(bool merged) : merged_(merged) {}
  bool merged_;
};

/// E -> Q, everything else unchanged.
constexpr Label merge_interference(Label l) noexcept {
  return l == Label::E ? Label::Q : l;
}

}  // namespace negres
