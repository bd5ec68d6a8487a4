#include "negres/labels.hpp"

#include "negres/error.hpp"

namespace negres {

char label_code(Label l) noexcept {
  static constexpr char kCodes[] = {'N', 'V', 'S', 'A', 'E', 'Q'};
  return kCodes[static_cast<std::size_t>(l)];
}

std::optional<Label> try_parse_label(std::string_view code) noexcept {
  if (code.size() != 1) return std::nullopt;
  switch (code[0]) {
    case 'N': return Label::N;
    case 'V': return Label::V;
    case 'S': return Label::S;
    case 'A': return Label::A;
    case 'E': return Label::E;
    case 'Q': return Label::Q;
    default: return std::nullopt;
  }
}

Label parse_label(std::string_view code) {
  if (auto l = try_parse_label(code)) return *l;
  throw DataError("unknown label '" + std::string(code) + "' (expected N/V/S/A/E/Q)");
}

std::size_t LabelTaxonomy::index_of(Label l) const noexcept {
  if (!merged_) return static_cast<std::size_t>(l);
  // Merged order: N V S A Q.
  return l == Label::E || l == Label::Q ? 4 : static_cast<std::size_t>(l);
}

Label LabelTaxonomy::label_at(std::size_t index) const {
  if (index >= size()) {
    throw DataError("class index " + std::to_string(index) + " outside taxonomy of " +
                    std::to_string(size()));
  }
  if (merged_ && index == 4) return Label::Q;
  return static_cast<Label>(index);
}

}  // namespace negres
