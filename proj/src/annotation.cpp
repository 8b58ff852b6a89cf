#include "lem/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <tuple>

#include <json.hpp>

#include "lem/error.hpp"

namespace lem {

std::string_view to_string(EntityLabel label) {
  switch (label) {
    case EntityLabel::kNE: return "NE";
    case EntityLabel::kVB: return "VB";
    case EntityLabel::kNN: return "NN";
  }
  return "?";
}

std::optional<EntityLabel> parse_entity_label(std::string_view text) {
  if (text == "NE") return EntityLabel::kNE;
  if (text == "VB") return EntityLabel::kVB;
  if (text == "NN") return EntityLabel::kNN;
  return std::nullopt;
}

TagsetConfig TagsetConfig::penn_english() {
  return {{"NN", "NNS", "NNP", "NNPS"}, {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}};
}

TagsetConfig TagsetConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  TagsetConfig cfg;
  for (const auto& t : doc.value("noun", nlohmann::json::array())) cfg.noun_tags.insert(t.get<std::string>());
  for (const auto& t : doc.value("verb", nlohmann::json::array())) cfg.verb_tags.insert(t.get<std::string>());
  return cfg;
}

namespace {

class SentenceBuilder {
 public:
  SentenceBuilder(TagScheme scheme, const TagsetConfig& tagset,
                  std::vector<std::string>& warnings)
      : scheme_(scheme), tagset_(tagset), warnings_(warnings) {}

  void add(std::string word, std::string_view tag, std::size_t line_no) {
    const std::size_t w = current_.words.size();
    current_.words.push_back(std::move(word));
    if (scheme_ == TagScheme::kPos) {
      if (tagset_.noun_tags.count(std::string(tag))) {
        current_.spans.push_back({EntityLabel::kNN, w, w});
      } else if (tagset_.verb_tags.count(std::string(tag))) {
        current_.spans.push_back({EntityLabel::kVB, w, w});
      }
      return;
    }
    if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
      const std::string cls(tag.substr(2));
      const bool continues = tag[0] == 'I' && open_ && open_class_ == cls;
      if (continues) {
        current_.spans.back().word_end = w;
        return;
      }
      if (tag[0] == 'I') {
        warnings_.push_back("line " + std::to_string(line_no) + ": " + std::string(tag) +
                            " without a preceding B-" + cls + "; starting a new span");
      }
      current_.spans.push_back({EntityLabel::kNE, w, w});
      open_ = true;
      open_class_ = cls;
      return;
    }
    if (tag != "O") {
      warnings_.push_back("line " + std::to_string(line_no) + ": unrecognised NER tag '" +
                          std::string(tag) + "' treated as O");
    }
    open_ = false;
  }

  TaggedSentence take() {
    open_ = false;
    return std::exchange(current_, {});
  }

 private:
  TagScheme scheme_;
  const TagsetConfig& tagset_;
  std::vector<std::string>& warnings_;
  TaggedSentence current_;
  bool open_ = false;
  std::string open_class_;
};

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

TagFileResult parse_tag_stream(std::istream& in, TagScheme scheme,
                               const TagsetConfig& tagset) {
  TagFileResult result;
  SentenceBuilder builder(scheme, tagset, result.warnings);
  std::string line;
  std::size_t line_no = 0;
  bool in_sentence = false;
  bool previous_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = rstrip(line);
    if (content.empty()) {
      if (in_sentence) {
        result.sentences.push_back(builder.take());
        in_sentence = false;
      } else if (previous_blank) {
        result.sentences.emplace_back();
      }
      previous_blank = true;
      continue;
    }
    previous_blank = false;
    const auto tab = content.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError("tag file line " + std::to_string(line_no) + " has no TAB", line_no);
    }
    builder.add(std::string(content.substr(0, tab)), rstrip(content.substr(tab + 1)),
                line_no);
    in_sentence = true;
  }
  if (in_sentence) result.sentences.push_back(builder.take());
  return result;
}

TagFileResult parse_tag_file(const std::filesystem::path& path, TagScheme scheme,
                             const TagsetConfig& tagset) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_tag_stream(in, scheme, tagset);
}

std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> spans,
                                         const TokenizedSentence& toks) {
  std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::tuple(a.label, a.token_start, a.token_end) <
           std::tuple(b.label, b.token_start, b.token_end);
  });
  std::vector<bool> taken(toks.tokens.size(), false);
  std::vector<EntitySpan> out;
  for (const auto& s : spans) {
    if (s.token_end >= toks.tokens.size()) {
      throw AlignmentError("span token range exceeds sentence length");
    }
    std::size_t pos = s.token_start;
    while (pos <= s.token_end) {
      while (pos <= s.token_end && taken[pos]) ++pos;
      if (pos > s.token_end) break;
      std::size_t end = pos;
      while (end + 1 <= s.token_end && !taken[end + 1]) ++end;
      EntitySpan piece = s;
      piece.token_start = pos;
      piece.token_end = end;
      piece.word_start = static_cast<std::size_t>(toks.tokens[pos].word_index);
      piece.word_end = static_cast<std::size_t>(toks.tokens[end].word_index);
      for (std::size_t i = pos; i <= end; ++i) taken[i] = true;
      out.push_back(piece);
      pos = end + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return a.token_start < b.token_start;
  });
  return out;
}

EntityDictionaryEntry align_spans(const std::vector<WordSpan>& spans,
                                  const TokenizedSentence& toks) {
  // first/last token of every word index present in the sentence
  std::vector<std::pair<std::size_t, std::size_t>> range;
  std::vector<bool> present;
  for (std::size_t i = 0; i < toks.tokens.size(); ++i) {
    const auto& t = toks.tokens[i];
    if (t.is_special) continue;
    const auto w = static_cast<std::size_t>(t.word_index);
    if (w >= range.size()) {
      range.resize(w + 1);
      present.resize(w + 1, false);
    }
    if (!present[w]) {
      range[w] = {i, i};
      present[w] = true;
    } else {
      range[w].second = i;
    }
  }

  std::vector<EntitySpan> aligned;
  aligned.reserve(spans.size());
  for (const auto& s : spans) {
    if (s.word_start > s.word_end) {
      throw AlignmentError("span word_start > word_end in sentence " +
                           std::to_string(toks.sentence_id));
    }
    for (std::size_t w = s.word_start; w <= s.word_end; ++w) {
      if (w >= present.size() || !present[w]) {
        throw AlignmentError("sentence " + std::to_string(toks.sentence_id) + ": word " +
                             std::to_string(w) + " has no tokens");
      }
    }
    aligned.push_back({s.label, s.word_start, s.word_end, range[s.word_start].first,
                       range[s.word_end].second});
  }
  return {toks.sentence_id, resolve_overlaps(std::move(aligned), toks)};
}

EntityDictionaryEntry shift_entry(const EntityDictionaryEntry& entry,
                                  std::size_t token_shift, std::size_t word_shift) {
  EntityDictionaryEntry out = entry;
  for (auto& s : out.spans) {
    s.token_start += token_shift;
    s.token_end += token_shift;
    s.word_start += word_shift;
    s.word_end += word_shift;
  }
  return out;
}

}  // namespace lem
