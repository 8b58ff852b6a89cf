#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lem {

struct SentenceRecord {
  std::uint64_t id = 0;
  std::string lang;
  std::string text;

  bool operator==(const SentenceRecord&) const = default;
};

struct ParallelPair {
  std::uint64_t id = 0;
  SentenceRecord src;
  SentenceRecord tgt;
};

struct CleaningConfig {
  double min_text_ratio = 0.6;
  std::vector<std::string> keyword_blocklist;
  bool drop_html = true;
  bool drop_urls = true;

  void validate() const;
};

enum class DropReason { kEmpty, kHtml, kUrl, kLowTextRatio, kKeyword, kLanguage };

std::string_view to_string(DropReason reason);

struct CleanDecision {
  bool keep = true;
  std::optional<DropReason> reason;
};

struct DropRecord {
  std::uint64_t id = 0;
  DropReason reason = DropReason::kEmpty;
};

// One line of an external language-identification label file.
struct LidLabel {
  std::string lang;
  double confidence = 0.0;
};

struct LidFilter {
  std::map<std::size_t, LidLabel> labels;  // keyed by 1-based input line
  double min_confidence = 0.5;
};

struct CleanResult {
  std::vector<SentenceRecord> kept;
  std::vector<DropRecord> dropped;
};

// Terminal punctuation recognised for `lang`; "." "?" "!" and the Khmer
// marks are always included.
std::vector<char32_t> terminal_marks(std::string_view lang);

// Splits after a terminal mark that is immediately followed by whitespace.
// Pieces are trimmed; empty pieces are discarded.
std::vector<std::string> segment_sentences(std::string_view document,
                                           std::string_view lang = {});

// Letters and combining marks over non-whitespace code points.
double text_ratio(std::string_view sentence);

bool contains_html_tag(std::string_view sentence);
bool contains_url(std::string_view sentence);

// Stateless filter with the blocklist folded once up front.
class SentenceCleaner {
 public:
  explicit SentenceCleaner(CleaningConfig cfg);

  CleanDecision operator()(std::string_view sentence) const;

  const CleaningConfig& config() const { return cfg_; }

 private:
  CleaningConfig cfg_;
  std::vector<std::string> folded_keywords_;
};

CleanDecision clean_sentence(std::string_view sentence, const CleaningConfig& cfg);

// Cleans raw input lines. Ids are assigned in order to every non-blank
// sentence (after optional segmentation), so kept + dropped covers all of
// them.
CleanResult clean_lines(const std::vector<std::string>& lines, std::string_view lang,
                        const CleaningConfig& cfg, const LidFilter* lid = nullptr,
                        bool segment = false);

// Re-applies the text filters to already-built records, preserving ids.
CleanResult clean_records(const std::vector<SentenceRecord>& records,
                          const CleaningConfig& cfg);

std::vector<SentenceRecord> build_mono_stack(const std::vector<SentenceRecord>& src,
                                             const std::vector<SentenceRecord>& tgt);

// Uniform sample of n records without replacement, in original order.
// Throws InsufficientDataError when n exceeds the corpus size.
std::vector<SentenceRecord> sample_n(const std::vector<SentenceRecord>& corpus,
                                     std::size_t n, std::uint64_t seed);

}  // namespace lem
