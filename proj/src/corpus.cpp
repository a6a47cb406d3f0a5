#include "cemaint/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "cemaint/csv.hpp"

namespace cemaint {

namespace fs = std::filesystem;

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Ov: return "ov";
    case Dimension::Rd: return "rd";
    case Dimension::Ud: return "ud";
    case Dimension::Cx: return "cx";
    case Dimension::Md: return "md";
  }
  return "?";
}

std::optional<Dimension> parse_dimension(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Dimension d : kAllDimensions) {
    if (dimension_name(d) == lower) return d;
  }
  return std::nullopt;
}

// --- UTF-8 ----------------------------------------------------------------

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Length of the valid UTF-8 sequence starting at `i`, or 0 if invalid.
std::size_t valid_sequence_length(const std::string& s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  const std::size_t left = s.size() - i;
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(s[i + k]); };
  if (b0 < 0x80) return 1;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    return left >= 2 && is_continuation(at(1)) ? 2 : 0;
  }
  if (b0 >= 0xE0 && b0 <= 0xEF) {
    if (left < 3) return 0;
    const unsigned char b1 = at(1);
    const unsigned char lo = b0 == 0xE0 ? 0xA0 : 0x80;
    const unsigned char hi = b0 == 0xED ? 0x9F : 0xBF;
    if (b1 < lo || b1 > hi || !is_continuation(at(2))) return 0;
    return 3;
  }
  if (b0 >= 0xF0 && b0 <= 0xF4) {
    if (left < 4) return 0;
    const unsigned char b1 = at(1);
    const unsigned char lo = b0 == 0xF0 ? 0x90 : 0x80;
    const unsigned char hi = b0 == 0xF4 ? 0x8F : 0xBF;
    if (b1 < lo || b1 > hi || !is_continuation(at(2)) || !is_continuation(at(3))) return 0;
    return 4;
  }
  return 0;
}

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; }

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

}  // namespace

std::size_t sanitize_utf8(std::string& text) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::size_t replaced = 0;
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = valid_sequence_length(text, i);
    if (len == 0) {
      out.append(kReplacement);
      ++replaced;
      ++i;
    } else {
      out.append(text, i, len);
      i += len;
    }
  }
  if (replaced > 0) text = std::move(out);
  return replaced;
}

// --- Comment stripping ----------------------------------------------------

namespace {

enum class ScanState { Code, LineComment, BlockComment, String, Char, TextBlock };

// Accumulates surviving lines; blank lines are dropped on flush.
class LineBuilder {
 public:
  void code(char c) {
    if (swallow_space_ && is_space(c)) return;
    swallow_space_ = false;
    if (need_separator_ && !is_space(c)) line_.push_back(' ');
    need_separator_ = false;
    line_.push_back(c);
  }

  void literal(char c) { line_.push_back(c); }

  void comment_begins() { had_comment_ = true; }

  // A removed block comment behaves like whitespace between tokens.
  void block_comment_ends() {
    had_comment_ = true;
    if (line_.empty() || is_space(line_.back())) {
      swallow_space_ = true;
    } else {
      need_separator_ = true;
    }
  }

  void end_line() {
    if (had_comment_) {
      while (!line_.empty() && is_space(line_.back())) line_.pop_back();
    }
    if (!is_blank(line_)) {
      if (!out_.empty()) out_.push_back('\n');
      out_.append(line_);
    }
    line_.clear();
    had_comment_ = false;
    swallow_space_ = false;
    need_separator_ = false;
  }

  std::string finish() {
    end_line();
    return std::move(out_);
  }

 private:
  std::string out_;
  std::string line_;
  bool had_comment_ = false;
  bool swallow_space_ = false;
  bool need_separator_ = false;
};

}  // namespace

std::string strip_comments(std::string_view raw_text, Warnings* warnings) {
  std::string text = normalize_newlines(raw_text);
  if (const std::size_t bad = sanitize_utf8(text); bad > 0) {
    warn(warnings, "replaced " + std::to_string(bad) + " invalid UTF-8 byte(s)");
  }

  LineBuilder out;
  ScanState state = ScanState::Code;
  std::size_t line_no = 1;
  std::size_t open_line = 0;  // where the current comment/literal began
  const std::size_t n = text.size();
  auto peek = [&](std::size_t i) { return i < n ? text[i] : '\0'; };

  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c == '\n') {
      out.end_line();
      ++line_no;
      if (state == ScanState::LineComment) {
        state = ScanState::Code;
      } else if (state == ScanState::BlockComment) {
        out.comment_begins();
      }
      continue;
    }

    switch (state) {
      case ScanState::Code:
        if (c == '/' && peek(i + 1) == '/') {
          out.comment_begins();
          state = ScanState::LineComment;
          ++i;
        } else if (c == '/' && peek(i + 1) == '*') {
          out.comment_begins();
          state = ScanState::BlockComment;
          open_line = line_no;
          ++i;
        } else if (c == '"' && peek(i + 1) == '"' && peek(i + 2) == '"') {
          out.code('"');
          out.literal('"');
          out.literal('"');
          state = ScanState::TextBlock;
          open_line = line_no;
          i += 2;
        } else if (c == '"') {
          out.code(c);
          state = ScanState::String;
          open_line = line_no;
        } else if (c == '\'') {
          out.code(c);
          state = ScanState::Char;
          open_line = line_no;
        } else {
          out.code(c);
        }
        break;

      case ScanState::LineComment:
        break;

      case ScanState::BlockComment:
        if (c == '*' && peek(i + 1) == '/') {
          out.block_comment_ends();
          state = ScanState::Code;
          ++i;
        }
        break;

      case ScanState::String:
      case ScanState::Char:
      case ScanState::TextBlock: {
        out.literal(c);
        if (c == '\\') {
          // The escaped character is taken verbatim unless it is a newline,
          // which must still split lines.
          if (i + 1 < n && text[i + 1] != '\n') out.literal(text[++i]);
          break;
        }
        if (state == ScanState::String && c == '"') {
          state = ScanState::Code;
        } else if (state == ScanState::Char && c == '\'') {
          state = ScanState::Code;
        } else if (state == ScanState::TextBlock && c == '"' && peek(i + 1) == '"' &&
                   peek(i + 2) == '"') {
          out.literal('"');
          out.literal('"');
          i += 2;
          state = ScanState::Code;
        }
        break;
      }
    }
  }

  const std::string where = " starting at line " + std::to_string(open_line);
  switch (state) {
    case ScanState::BlockComment:
      warn(warnings, "unterminated block comment" + where);
      break;
    case ScanState::String:
      warn(warnings, "unterminated string literal" + where);
      break;
    case ScanState::TextBlock:
      warn(warnings, "unterminated text block" + where);
      break;
    case ScanState::Char:
      warn(warnings, "unterminated char literal" + where);
      break;
    default:
      break;
  }
  return out.finish();
}

std::size_t count_lloc(std::string_view cleaned_text) {
  if (cleaned_text.empty()) return 0;
  const auto newlines = static_cast<std::size_t>(
      std::count(cleaned_text.begin(), cleaned_text.end(), '\n'));
  return cleaned_text.back() == '\n' ? newlines : newlines + 1;
}

SourceClass make_source_class(std::string id, std::string raw_text, Warnings* warnings) {
  SourceClass source;
  source.id = std::move(id);
  source.raw_text = std::move(raw_text);
  Warnings local;
  source.cleaned_text = strip_comments(source.raw_text, &local);
  source.lloc = count_lloc(source.cleaned_text);
  for (auto& message : local) warn(warnings, source.id + ": " + message);
  return source;
}

// --- Corpus ---------------------------------------------------------------

Corpus load_corpus(const fs::path& root, const std::vector<std::string>& extensions) {
  Corpus corpus;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw ConfigError("corpus directory not found: " + root.string());
  }

  std::vector<fs::path> candidates;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw ConfigError("cannot list corpus directory " + root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      corpus.warnings.push_back("directory walk: " + ec.message());
      ec.clear();
      continue;
    }
    const fs::directory_entry& entry = *it;
    std::error_code type_ec;
    if (entry.is_directory(type_ec)) continue;
    const std::string ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end()) continue;
    candidates.push_back(entry.path());
  }

  for (const fs::path& path : candidates) {
    std::string id = path.lexically_relative(root).generic_string();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      corpus.failures.push_back({std::move(id), "cannot open file"});
      continue;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
      corpus.failures.push_back({std::move(id), "read error"});
      continue;
    }
    corpus.files.push_back(make_source_class(std::move(id), buffer.str(), &corpus.warnings));
  }

  std::sort(corpus.files.begin(), corpus.files.end(),
            [](const SourceClass& a, const SourceClass& b) { return a.id < b.id; });
  std::sort(corpus.failures.begin(), corpus.failures.end(),
            [](const CorpusFailure& a, const CorpusFailure& b) { return a.id < b.id; });
  return corpus;
}

// --- Ratings --------------------------------------------------------------

const std::vector<std::string>& ratings_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"file"};
    for (Dimension d : kAllDimensions) {
      for (const char* answer : {"sa", "wa", "wd", "sd"}) {
        c.push_back(std::string(dimension_name(d)) + "_" + answer);
      }
    }
    return c;
  }();
  return columns;
}

std::vector<MaintainabilityRating> parse_ratings(std::string_view csv_text, Warnings* warnings) {
  const auto rows = csv::parse(csv_text);
  if (rows.size() <= 1) {
    warn(warnings, "no rows");
    return {};
  }

  const auto& header = rows.front().fields;
  const auto& columns = ratings_columns();
  std::vector<std::size_t> index(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto found = csv::column_index(header, columns[c]);
    if (!found) {
      throw IngestionError("ratings header (line 1): missing column '" + columns[c] + "'");
    }
    index[c] = *found;
  }

  std::vector<MaintainabilityRating> ratings;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::string where = "ratings row " + std::to_string(r) + " (line " +
                              std::to_string(row.line) + ")";
    auto field = [&](std::size_t c) -> const std::string& {
      if (index[c] >= row.fields.size()) {
        throw IngestionError(where + ": missing column '" + columns[c] + "'");
      }
      return row.fields[index[c]];
    };

    MaintainabilityRating rating;
    rating.file_id = field(0);
    if (rating.file_id.empty()) {
      throw IngestionError(where + ": empty value in column 'file'");
    }
    if (!seen.insert(rating.file_id).second) {
      throw IngestionError(where + ": duplicate file_id '" + rating.file_id +
                           "' in column 'file'");
    }

    std::size_t c = 1;
    for (Dimension d : kAllDimensions) {
      double* slots[4] = {&rating[d].strongly_agree, &rating[d].weakly_agree,
                          &rating[d].weakly_disagree, &rating[d].strongly_disagree};
      for (double* slot : slots) {
        const auto value = csv::to_double(field(c));
        if (!value) {
          throw IngestionError(where + ": non-numeric probability '" + field(c) +
                               "' in column '" + columns[c] + "'");
        }
        if (*value < 0.0 || *value > 1.0) {
          throw IngestionError(where + ": probability " + field(c) + " outside [0,1] in column '" +
                               columns[c] + "'");
        }
        *slot = *value;
        ++c;
      }
      const double sum = rating[d].sum();
      if (std::abs(sum - 1.0) > kProbabilitySumTolerance + 1e-12) {
        warn(warnings, where + " (" + rating.file_id + "): " + std::string(dimension_name(d)) +
                           " probabilities sum to " + csv::fixed(sum, 4));
      }
    }
    ratings.push_back(std::move(rating));
  }
  return ratings;
}

std::vector<MaintainabilityRating> load_ratings(const fs::path& path, Warnings* warnings) {
  return parse_ratings(csv::read_file(path), warnings);
}

namespace {

std::string shortest(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

}  // namespace

void write_ratings(const fs::path& path, const std::vector<MaintainabilityRating>& ratings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  const auto& columns = ratings_columns();
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& rating : ratings) {
    out << csv::escape(rating.file_id);
    for (Dimension d : kAllDimensions) {
      const auto& p = rating[d];
      for (double v : {p.strongly_agree, p.weakly_agree, p.weakly_disagree, p.strongly_disagree}) {
        out << ',' << shortest(v);
      }
    }
    out << '\n';
  }
}

}  // namespace cemaint
