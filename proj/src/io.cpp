#include "lem/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lem/error.hpp"

namespace lem::io {

namespace {

using json = nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<SentenceRecord> read_records(const std::filesystem::path& path) {
  std::vector<SentenceRecord> out;
  for_each_json_line(path, [&](const json& j) {
    out.push_back({j.at("id").get<std::uint64_t>(), j.at("lang").get<std::string>(),
                   j.at("text").get<std::string>()});
  });
  return out;
}

void write_records(std::ostream& out, const std::vector<SentenceRecord>& records) {
  for (const auto& r : records) {
    out << json{{"id", r.id}, {"lang", r.lang}, {"text", r.text}}.dump() << '\n';
  }
}

void write_drops(std::ostream& out, const std::vector<DropRecord>& drops) {
  for (const auto& d : drops) {
    out << json{{"id", d.id}, {"reason", std::string(to_string(d.reason))}}.dump() << '\n';
  }
}

void write_tokenized(std::ostream& out, const TokenizedSentence& toks) {
  json ids = json::array();
  json words = json::array();
  json specials = json::array();
  for (const auto& t : toks.tokens) {
    ids.push_back(t.id);
    words.push_back(t.word_index);
    specials.push_back(t.is_special);
  }
  out << json{{"sentence_id", toks.sentence_id},
              {"ids", std::move(ids)},
              {"words", std::move(words)},
              {"specials", std::move(specials)}}
             .dump()
      << '\n';
}

std::vector<TokenizedSentence> read_tokenized(const std::filesystem::path& path) {
  std::vector<TokenizedSentence> out;
  for_each_json_line(path, [&](const json& j) {
    TokenizedSentence s;
    s.sentence_id = j.at("sentence_id").get<std::uint64_t>();
    const auto& ids = j.at("ids");
    const auto& words = j.at("words");
    const auto& specials = j.at("specials");
    if (ids.size() != words.size() || ids.size() != specials.size()) {
      throw FormatError("tokenized sentence " + std::to_string(s.sentence_id) +
                        " has ragged arrays");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      s.tokens.push_back({ids[i].get<TokenId>(), {}, words[i].get<std::int64_t>(),
                          specials[i].get<bool>()});
    }
    out.push_back(std::move(s));
  });
  return out;
}

void write_entry(std::ostream& out, const EntityDictionaryEntry& entry) {
  json spans = json::array();
  for (const auto& s : entry.spans) {
    spans.push_back({{"label", std::string(to_string(s.label))},
                     {"ws", s.word_start},
                     {"we", s.word_end},
                     {"ts", s.token_start},
                     {"te", s.token_end}});
  }
  out << json{{"sentence_id", entry.sentence_id}, {"spans", std::move(spans)}}.dump() << '\n';
}

std::vector<EntityDictionaryEntry> read_dictionary(const std::filesystem::path& path) {
  std::vector<EntityDictionaryEntry> out;
  for_each_json_line(path, [&](const json& j) {
    EntityDictionaryEntry e;
    e.sentence_id = j.at("sentence_id").get<std::uint64_t>();
    for (const auto& s : j.at("spans")) {
      const auto label = parse_entity_label(s.at("label").get<std::string>());
      if (!label) throw FormatError("unknown entity label in dictionary");
      e.spans.push_back({*label, s.at("ws").get<std::size_t>(), s.at("we").get<std::size_t>(),
                         s.at("ts").get<std::size_t>(), s.at("te").get<std::size_t>()});
    }
    out.push_back(std::move(e));
  });
  return out;
}

void write_masked(std::ostream& out, const MaskedExample& ex, const MaskingConfig& cfg) {
  json meta = {{"id", ex.id},
               {"strategy", std::string(to_string(cfg.strategy))},
               {"recipe", cfg.recipe.to_string()},
               {"k", cfg.tokens_per_entity},
               {"seed", cfg.seed},
               {"epoch", cfg.epoch}};
  if (ex.mode == MaskMode::kPara) meta["tgt_offset"] = ex.tgt_offset;
  out << json{{"ids", ex.input_ids},
              {"labels", ex.labels},
              {"mode", std::string(to_string(ex.mode))},
              {"meta", std::move(meta)}}
             .dump()
      << '\n';
}

std::unordered_map<std::uint64_t, PairText> read_pair_texts(const std::filesystem::path& path) {
  std::unordered_map<std::uint64_t, PairText> out;
  for_each_json_line(path, [&](const json& j) {
    const auto id = j.at("id").get<std::uint64_t>();
    if (!out.emplace(id, PairText{j.at("src").get<std::string>(), j.at("tgt").get<std::string>()})
             .second) {
      throw FormatError("duplicate pair id " + std::to_string(id));
    }
  });
  return out;
}

std::map<std::size_t, LidLabel> read_lid_labels(const std::filesystem::path& path) {
  std::map<std::size_t, LidLabel> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    try {
      if (cols.size() != 3) throw std::invalid_argument("columns");
      out[std::stoull(cols[0])] = {cols[1], std::stod(cols[2])};
    } catch (const std::exception&) {
      throw ParseError("LID label line " + std::to_string(line_no) +
                           " is not 'line TAB lang TAB confidence'",
                       line_no);
    }
  }
  return out;
}

std::vector<PairRef> read_pair_refs(const std::filesystem::path& path) {
  std::vector<PairRef> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    try {
      if (cols.size() != 3) throw std::invalid_argument("columns");
      out.push_back({std::stoull(cols[0]), std::stoull(cols[1]), std::stoull(cols[2])});
    } catch (const std::exception&) {
      throw ParseError("pair manifest line " + std::to_string(line_no) +
                           " is not 'pair_id TAB src_id TAB tgt_id'",
                       line_no);
    }
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string());
    out << content;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lem::io
