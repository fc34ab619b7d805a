#include "psa/preprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psa/errors.hpp"
#include "psa/utf8.hpp"

namespace psa {

namespace {

constexpr std::string_view kFoldingFile = "folding-v1.tsv";
constexpr std::string_view kSuffixFile = "suffixes-v1.txt";
constexpr std::string_view kSlangFile = "slang-v1.tsv";

bool is_ascii_digit(char32_t cp) noexcept { return cp >= U'0' && cp <= U'9'; }

bool is_persian_script(char32_t cp) noexcept {
  return (cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0x0750 && cp <= 0x077F) ||
         (cp >= 0xFB50 && cp <= 0xFDFF) || (cp >= 0xFE70 && cp <= 0xFEFF) ||
         cp == utf8::kZwnj;
}

// Word content: anything that is neither whitespace nor punctuation.
bool is_word_char(char32_t cp) noexcept { return !utf8::is_space(cp) && !is_punctuation(cp); }

// Maximal runs of word characters, with ZWNJ trimmed from both ends of each
// run. Shared by normalization (word-level rules) and tokenization so that
// both agree on what a word is.
template <typename GetCp>
std::vector<std::pair<std::size_t, std::size_t>> find_words(std::size_t n, GetCp cp_at) {
  std::vector<std::pair<std::size_t, std::size_t>> words;
  std::size_t i = 0;
  while (i < n) {
    if (!is_word_char(cp_at(i))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_word_char(cp_at(j))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && cp_at(b) == utf8::kZwnj) ++b;
    while (e > b && cp_at(e - 1) == utf8::kZwnj) --e;
    if (b < e) words.emplace_back(b, e);
    i = j;
  }
  return words;
}

std::vector<char32_t> to_cps(std::string_view s) {
  std::vector<char32_t> cps;
  for (const auto& c : utf8::decode(s)) cps.push_back(c.cp);
  return cps;
}

std::string trim_ascii(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

char32_t parse_codepoint(std::string_view field, std::size_t line) {
  if (field.size() < 3 || field.substr(0, 2) != "U+") {
    throw Error(ErrorKind::InvalidConfig, "expected U+XXXX codepoint", line);
  }
  unsigned long value = 0;
  try {
    value = std::stoul(std::string(field.substr(2)), nullptr, 16);
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidConfig, "bad codepoint '" + std::string(field) + "'", line);
  }
  return static_cast<char32_t>(value);
}

std::string format_codepoint(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

// Slang replacements must be fixed points of normalization, otherwise
// normalize() would stop being idempotent.
void check_slang_entry(const std::string& from, const std::string& to) {
  const auto bad = [&](const std::string& why) {
    throw Error(ErrorKind::InvalidConfig, "slang entry '" + from + "': " + why);
  };
  if (from.empty() || to.empty()) bad("empty field");
  for (char32_t cp : to_cps(to)) {
    if (!is_word_char(cp) || cp == utf8::kZwnj) bad("replacement must be a single word");
  }
}

PreprocessTables make_builtin() {
  PreprocessTables t;
  t.folding[0x064A] = 0x06CC;  // Arabic yeh -> Persian yeh
  t.folding[0x0643] = 0x06A9;  // Arabic kaf -> keheh
  t.folding[0x0629] = 0x0647;  // teh marbuta -> heh
  t.folding[0x0623] = 0x0627;  // alef variants -> alef
  t.folding[0x0625] = 0x0627;
  t.folding[0x0622] = 0x0627;
  t.folding[0x0624] = 0x0648;  // waw with hamza -> waw
  t.folding[0x0626] = 0x06CC;  // yeh with hamza -> Persian yeh
  for (char32_t d = 0; d < 10; ++d) {
    t.folding[0x0660 + d] = U'0' + d;
    t.folding[0x06F0 + d] = U'0' + d;
  }
  for (char32_t h = 0x064B; h <= 0x0652; ++h) t.folding[h] = std::nullopt;

  t.suffixes = {"ترین", "تر", "هایش", "هایم", "هایت", "های", "ها", "شان",
                "تان",  "مان", "اش",   "ام",   "ات",   "ی",   "ان", "ه"};

  t.slang = {{"gr8", "great"}, {"gooood", "good"}, {"going", "go"}};
  return t;
}

}  // namespace

bool is_punctuation(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x060C:  // ،
    case 0x061B:  // ؛
    case 0x061F:  // ؟
    case 0x00AB:  // «
    case 0x00BB:  // »
      return true;
    default:
      return false;
  }
}

const PreprocessTables& PreprocessTables::builtin() {
  static const PreprocessTables tables = make_builtin();
  return tables;
}

PreprocessTables PreprocessTables::load(const std::filesystem::path& dir) {
  PreprocessTables t;
  const auto open = [&](std::string_view name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + (dir / name).string());
    return in;
  };

  {
    auto in = open(kFoldingFile);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "folding row needs two columns", line_no);
      }
      const char32_t from = parse_codepoint(trim_ascii(line.substr(0, tab)), line_no);
      const std::string to = trim_ascii(line.substr(tab + 1));
      if (to.empty()) {
        t.folding[from] = std::nullopt;
      } else {
        t.folding[from] = parse_codepoint(to, line_no);
      }
    }
  }
  {
    auto in = open(kSuffixFile);
    std::string line;
    while (std::getline(in, line)) {
      line = trim_ascii(line);
      if (line.empty() || line[0] == '#') continue;
      t.suffixes.push_back(line);
    }
  }
  {
    auto in = open(kSlangFile);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "slang row needs two columns", line_no);
      }
      std::string from = trim_ascii(line.substr(0, tab));
      std::string to = trim_ascii(line.substr(tab + 1));
      check_slang_entry(from, to);
      t.slang[std::move(from)] = std::move(to);
    }
  }
  return t;
}

void PreprocessTables::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::vector<std::pair<char32_t, std::optional<char32_t>>> rows(folding.begin(), folding.end());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ofstream out(dir / kFoldingFile, std::ios::binary);
    out << "# folding table v1: source<TAB>target (empty target deletes)\n";
    for (const auto& [from, to] : rows) {
      out << format_codepoint(from) << '\t' << (to ? format_codepoint(*to) : "") << '\n';
    }
  }
  {
    std::ofstream out(dir / kSuffixFile, std::ios::binary);
    out << "# suffix list v1\n";
    for (const auto& s : suffixes) out << s << '\n';
  }
  {
    std::ofstream out(dir / kSlangFile, std::ios::binary);
    out << "# slang lexicon v1: surface<TAB>normal form\n";
    for (const auto& [from, to] : slang) out << from << '\t' << to << '\n';
  }
}

Preprocessor::Preprocessor() : Preprocessor(PreprocessTables::builtin()) {}

Preprocessor::Preprocessor(PreprocessTables tables) : tables_(std::move(tables)) {
  for (const auto& [from, to] : tables_.slang) check_slang_entry(from, to);
  for (const auto& s : tables_.suffixes) suffix_cps_.push_back(to_cps(s));
}

void Preprocessor::apply_word_rules(std::vector<SourceChar>& word) const {
  const auto words = find_words(word.size(), [&](std::size_t i) { return word[i].cp; });
  if (words.empty()) return;

  std::vector<SourceChar> out;
  out.reserve(word.size());
  std::size_t cursor = 0;
  for (const auto& [b, e] : words) {
    out.insert(out.end(), word.begin() + static_cast<std::ptrdiff_t>(cursor),
               word.begin() + static_cast<std::ptrdiff_t>(b));
    const std::size_t span_begin = word[b].begin;
    const std::size_t span_end = word[e - 1].end;

    const auto replace = [&](const std::string& with) {
      for (char32_t cp : to_cps(with)) out.push_back({cp, span_begin, span_end});
    };

    std::string surface;
    for (std::size_t i = b; i < e; ++i) utf8::append(surface, word[i].cp);
    if (auto hit = tables_.slang.find(surface); hit != tables_.slang.end()) {
      replace(hit->second);
    } else {
      // Elongation: three or more repeats of a letter collapse to one.
      std::vector<SourceChar> collapsed;
      std::size_t i = b;
      while (i < e) {
        std::size_t j = i + 1;
        while (j < e && word[j].cp == word[i].cp) ++j;
        const bool letter = !is_ascii_digit(word[i].cp) && word[i].cp != utf8::kZwnj;
        if (letter && j - i >= 3) {
          collapsed.push_back({word[i].cp, word[i].begin, word[j - 1].end});
        } else {
          collapsed.insert(collapsed.end(), word.begin() + static_cast<std::ptrdiff_t>(i),
                           word.begin() + static_cast<std::ptrdiff_t>(j));
        }
        i = j;
      }
      std::string folded;
      for (const auto& c : collapsed) utf8::append(folded, c.cp);
      if (auto hit2 = tables_.slang.find(folded); hit2 != tables_.slang.end()) {
        replace(hit2->second);
      } else {
        out.insert(out.end(), collapsed.begin(), collapsed.end());
      }
    }
    cursor = e;
  }
  out.insert(out.end(), word.begin() + static_cast<std::ptrdiff_t>(cursor), word.end());
  word = std::move(out);
}

std::vector<Preprocessor::SourceChar> Preprocessor::normalize_chars(std::string_view text) const {
  // Folding, diacritic removal and digit unification are all per-codepoint
  // and live in the same table.
  std::vector<SourceChar> folded;
  for (const auto& c : utf8::decode(text)) {
    char32_t cp = c.cp;
    if (auto it = tables_.folding.find(cp); it != tables_.folding.end()) {
      if (!it->second) continue;
      cp = *it->second;
    }
    folded.push_back({cp, c.begin, c.end});
  }

  std::vector<SourceChar> out;
  out.reserve(folded.size());
  std::size_t i = 0;
  while (i < folded.size()) {
    if (utf8::is_space(folded[i].cp)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < folded.size() && !utf8::is_space(folded[j].cp)) ++j;
    std::vector<SourceChar> word(folded.begin() + static_cast<std::ptrdiff_t>(i),
                                 folded.begin() + static_cast<std::ptrdiff_t>(j));
    apply_word_rules(word);
    if (!out.empty()) out.push_back({U' ', word.front().begin, word.front().begin});
    out.insert(out.end(), word.begin(), word.end());
    i = j;
  }
  return out;
}

std::string Preprocessor::normalize(std::string_view text) const {
  std::string out;
  for (const auto& c : normalize_chars(text)) utf8::append(out, c.cp);
  return out;
}

TokenSeq Preprocessor::tokenize(std::string_view normalized) const {
  const auto chars = utf8::decode(normalized);
  TokenSeq seq;
  for (const auto& [b, e] : find_words(chars.size(), [&](std::size_t i) { return chars[i].cp; })) {
    const std::size_t begin = chars[b].begin;
    const std::size_t end = chars[e - 1].end;
    seq.tokens.emplace_back(normalized.substr(begin, end - begin));
    seq.offsets.emplace_back(begin, end);
  }
  return seq;
}

std::string Preprocessor::stem(std::string_view token) const {
  const auto cps = to_cps(token);
  if (cps.empty()) return std::string(token);
  for (char32_t cp : cps) {
    if (!is_persian_script(cp)) return std::string(token);
  }

  const auto letters = [](auto first, auto last) {
    return static_cast<std::size_t>(
        std::count_if(first, last, [](char32_t cp) { return cp != utf8::kZwnj; }));
  };

  std::size_t best_len = 0;
  for (const auto& suffix : suffix_cps_) {
    if (suffix.size() <= best_len || suffix.size() > cps.size()) continue;
    if (!std::equal(suffix.begin(), suffix.end(), cps.end() - static_cast<std::ptrdiff_t>(suffix.size()))) {
      continue;
    }
    const auto stem_end = cps.end() - static_cast<std::ptrdiff_t>(suffix.size());
    if (letters(cps.begin(), stem_end) >= 2) best_len = suffix.size();
  }
  if (best_len == 0) return std::string(token);

  std::size_t keep = cps.size() - best_len;
  while (keep > 0 && cps[keep - 1] == utf8::kZwnj) --keep;
  return utf8::encode(std::vector<char32_t>(cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(keep)));
}

TokenSeq Preprocessor::run(std::string_view text) const {
  const auto chars = normalize_chars(text);
  TokenSeq seq;
  for (const auto& [b, e] : find_words(chars.size(), [&](std::size_t i) { return chars[i].cp; })) {
    std::string token;
    for (std::size_t i = b; i < e; ++i) utf8::append(token, chars[i].cp);
    seq.tokens.push_back(stem(token));
    seq.offsets.emplace_back(chars[b].begin, chars[e - 1].end);
  }
  return seq;
}

namespace {

const Preprocessor& shared() {
  static const Preprocessor p;
  return p;
}

}  // namespace

std::string normalize(std::string_view text) { return shared().normalize(text); }
TokenSeq tokenize(std::string_view normalized) { return shared().tokenize(normalized); }
std::string stem(std::string_view token) { return shared().stem(token); }
TokenSeq preprocess_pipeline(std::string_view text) { return shared().run(text); }

}  // namespace psa
