#include <algorithm>
#include <charconv>

#include "lem/error.hpp"
#include "lem/masking.hpp"

namespace lem {

bool MaskingRecipe::includes(EntityLabel label) const {
  return std::find(entity_classes.begin(), entity_classes.end(), label) !=
         entity_classes.end();
}

std::string MaskingRecipe::to_string() const {
  std::string out;
  for (auto c : entity_classes) {
    out += "100%";
    out += lem::to_string(c);
    out += '+';
  }
  char buf[32];
  const double pct = budget_fraction * 100.0;
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, pct);
  out.append(buf, end);
  out += '%';
  out += base_mode == BaseMode::kMLM ? "MLM" : "TLM";
  return out;
}

MaskingRecipe parse_recipe(std::string_view text) {
  MaskingRecipe recipe;
  recipe.entity_classes.clear();
  std::size_t pos = 0;

  auto parse_percent = [&](double& value) {
    const std::size_t begin = pos;
    while (pos < text.size() &&
           ((text[pos] >= '0' && text[pos] <= '9') || text[pos] == '.')) {
      ++pos;
    }
    if (pos == begin) throw ParseError("expected a percentage", begin);
    auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + pos, value);
    if (ec != std::errc() || ptr != text.data() + pos) {
      throw ParseError("malformed percentage '" +
                           std::string(text.substr(begin, pos - begin)) + "'",
                       begin);
    }
    if (pos >= text.size() || text[pos] != '%') throw ParseError("expected '%'", pos);
    ++pos;
    return begin;
  };

  for (;;) {
    double pct = 0.0;
    const std::size_t pct_pos = parse_percent(pct);
    const std::size_t word_pos = pos;
    std::size_t end = text.find('+', pos);
    const bool last = end == std::string_view::npos;
    if (last) end = text.size();
    const auto word = text.substr(pos, end - pos);

    if (last) {
      if (word == "MLM") {
        recipe.base_mode = BaseMode::kMLM;
      } else if (word == "TLM") {
        recipe.base_mode = BaseMode::kTLM;
      } else if (parse_entity_label(word)) {
        throw ParseError("recipe must end with an MLM or TLM term", word_pos);
      } else {
        throw ParseError("unknown objective '" + std::string(word) + "'", word_pos);
      }
      if (!(pct > 0.0 && pct <= 100.0)) {
        throw ParseError("budget percentage must lie in (0, 100]", pct_pos);
      }
      recipe.budget_fraction = pct / 100.0;
      return recipe;
    }

    const auto label = parse_entity_label(word);
    if (!label) {
      throw ParseError("unknown entity class '" + std::string(word) + "'", word_pos);
    }
    if (pct != 100.0) {
      throw ParseError("entity classes take 100%", pct_pos);
    }
    if (recipe.includes(*label)) {
      throw ParseError("entity class listed twice", word_pos);
    }
    recipe.entity_classes.push_back(*label);
    pos = end + 1;
  }
}

}  // namespace lem
