#include "lem/corpus.hpp"

#include <algorithm>

#include "lem/error.hpp"
#include "lem/rng.hpp"
#include "lem/unicode.hpp"

namespace lem {

namespace {

constexpr std::uint64_t kSampleStream = 0x53414d504c45ULL;

bool ascii_starts_with_ci(std::string_view s, std::size_t pos, std::string_view lit) {
  if (pos + lit.size() > s.size()) return false;
  for (std::size_t i = 0; i < lit.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != lit[i]) return false;
  }
  return true;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

void CleaningConfig::validate() const {
  if (!(min_text_ratio >= 0.0 && min_text_ratio <= 1.0)) {
    throw ConfigError("min_text_ratio must lie in [0, 1]");
  }
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kEmpty: return "empty";
    case DropReason::kHtml: return "html";
    case DropReason::kUrl: return "url";
    case DropReason::kLowTextRatio: return "low_text_ratio";
    case DropReason::kKeyword: return "keyword";
    case DropReason::kLanguage: return "lid";
  }
  return "unknown";
}

std::vector<char32_t> terminal_marks(std::string_view lang) {
  std::vector<char32_t> marks = {U'.', U'?', U'!', U'។', U'៕'};
  if (lang == "si") {
    marks.push_back(U'෴');  // kunddaliya
  } else if (lang == "ta" || lang == "hi" || lang == "ne" || lang == "mr" ||
             lang == "bn" || lang == "sa") {
    marks.push_back(U'।');
    marks.push_back(U'॥');
  } else if (lang.empty()) {
    marks.push_back(U'෴');
    marks.push_back(U'।');
    marks.push_back(U'॥');
  }
  return marks;
}

std::vector<std::string> segment_sentences(std::string_view document,
                                           std::string_view lang) {
  const auto marks = terminal_marks(lang);
  const auto cps = unicode::decode(document);
  std::vector<std::string> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    auto piece = unicode::trim(document.substr(begin, end - begin));
    if (!piece.empty()) out.emplace_back(piece);
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
    const bool terminal =
        std::find(marks.begin(), marks.end(), cps[i].value) != marks.end();
    if (terminal && unicode::is_whitespace(cps[i + 1].value)) {
      const std::size_t cut = cps[i].offset + cps[i].length;
      emit(start, cut);
      start = cut;
    }
  }
  emit(start, document.size());
  return out;
}

double text_ratio(std::string_view sentence) {
  std::size_t textual = 0;
  std::size_t visible = 0;
  for (const auto& cp : unicode::decode(sentence)) {
    if (unicode::is_whitespace(cp.value)) continue;
    ++visible;
    if (unicode::is_letter(cp.value) || unicode::is_mark(cp.value)) ++textual;
  }
  if (visible == 0) return 0.0;
  return static_cast<double>(textual) / static_cast<double>(visible);
}

bool contains_html_tag(std::string_view s) {
  // <[a-zA-Z/][^>]*>
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] != '<') continue;
    const char c = s[i + 1];
    if (!is_ascii_alpha(c) && c != '/') continue;
    if (s.find('>', i + 2) != std::string_view::npos) return true;
  }
  return false;
}

bool contains_url(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (ascii_starts_with_ci(s, i, "http://") || ascii_starts_with_ci(s, i, "https://") ||
        ascii_starts_with_ci(s, i, "www.")) {
      return true;
    }
  }
  return false;
}

SentenceCleaner::SentenceCleaner(CleaningConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& kw : cfg_.keyword_blocklist) {
    auto folded = unicode::case_fold(unicode::trim(kw));
    if (!folded.empty()) folded_keywords_.push_back(std::move(folded));
  }
}

CleanDecision SentenceCleaner::operator()(std::string_view sentence) const {
  const auto drop = [](DropReason r) { return CleanDecision{false, r}; };
  if (unicode::trim(sentence).empty()) return drop(DropReason::kEmpty);
  if (cfg_.drop_html && contains_html_tag(sentence)) return drop(DropReason::kHtml);
  if (cfg_.drop_urls && contains_url(sentence)) return drop(DropReason::kUrl);
  if (text_ratio(sentence) < cfg_.min_text_ratio) return drop(DropReason::kLowTextRatio);
  if (!folded_keywords_.empty()) {
    const auto folded = unicode::case_fold(sentence);
    for (const auto& kw : folded_keywords_) {
      if (folded.find(kw) != std::string::npos) return drop(DropReason::kKeyword);
    }
  }
  return {};
}

CleanDecision clean_sentence(std::string_view sentence, const CleaningConfig& cfg) {
  return SentenceCleaner(cfg)(sentence);
}

CleanResult clean_lines(const std::vector<std::string>& lines, std::string_view lang,
                        const CleaningConfig& cfg, const LidFilter* lid, bool segment) {
  const SentenceCleaner cleaner(cfg);
  CleanResult result;
  std::uint64_t next_id = 0;
  for (std::size_t line_no = 1; line_no <= lines.size(); ++line_no) {
    const auto& line = lines[line_no - 1];
    std::vector<std::string> pieces;
    if (segment) {
      pieces = segment_sentences(line, lang);
    } else if (auto t = unicode::trim(line); !t.empty()) {
      pieces.emplace_back(t);
    }

    std::optional<DropReason> line_reason;
    if (lid != nullptr) {
      const auto it = lid->labels.find(line_no);
      if (it == lid->labels.end() || it->second.lang != lang ||
          it->second.confidence < lid->min_confidence) {
        line_reason = DropReason::kLanguage;
      }
    }

    for (auto& piece : pieces) {
      const std::uint64_t id = next_id++;
      auto decision = cleaner(piece);
      if (decision.keep && line_reason) decision = {false, line_reason};
      if (decision.keep) {
        result.kept.push_back({id, std::string(lang), std::move(piece)});
      } else {
        result.dropped.push_back({id, *decision.reason});
      }
    }
  }
  return result;
}

CleanResult clean_records(const std::vector<SentenceRecord>& records,
                          const CleaningConfig& cfg) {
  const SentenceCleaner cleaner(cfg);
  CleanResult result;
  for (const auto& rec : records) {
    const auto decision = cleaner(rec.text);
    if (decision.keep) {
      SentenceRecord kept = rec;
      kept.text = std::string(unicode::trim(rec.text));
      result.kept.push_back(std::move(kept));
    } else {
      result.dropped.push_back({rec.id, *decision.reason});
    }
  }
  return result;
}

std::vector<SentenceRecord> build_mono_stack(const std::vector<SentenceRecord>& src,
                                             const std::vector<SentenceRecord>& tgt) {
  std::vector<SentenceRecord> out;
  out.reserve(src.size() + tgt.size());
  out.insert(out.end(), src.begin(), src.end());
  out.insert(out.end(), tgt.begin(), tgt.end());
  return out;
}

std::vector<SentenceRecord> sample_n(const std::vector<SentenceRecord>& corpus,
                                     std::size_t n, std::uint64_t seed) {
  if (n > corpus.size()) {
    throw InsufficientDataError("requested " + std::to_string(n) +
                                " sentences from a corpus of " +
                                std::to_string(corpus.size()));
  }
  // Selection sampling keeps the original order without a sort.
  auto rng = CounterRng::stream(seed, kSampleStream);
  std::vector<SentenceRecord> out;
  out.reserve(n);
  std::size_t needed = n;
  for (std::size_t i = 0; i < corpus.size() && needed > 0; ++i) {
    const std::size_t remaining = corpus.size() - i;
    if (rng.uniform_below(remaining) < needed) {
      out.push_back(corpus[i]);
      --needed;
    }
  }
  return out;
}

}  // namespace lem
