#include "cemaint/ratings_adapter.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "cemaint/csv.hpp"

namespace cemaint {

namespace {

std::vector<std::string> words(std::string_view header) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto c = static_cast<unsigned char>(header[i]);
    if (std::isalnum(c)) {
      // camelCase boundary: "stronglyAgree" -> strongly, agree
      if (std::isupper(c) && !current.empty() &&
          std::islower(static_cast<unsigned char>(current.back()))) {
        flush();
      }
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool has(const std::vector<std::string>& w, std::string_view word) {
  return std::find(w.begin(), w.end(), word) != w.end();
}

bool has_prefix(const std::vector<std::string>& w, std::string_view prefix) {
  return std::any_of(w.begin(), w.end(),
                     [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
}

std::optional<Dimension> dimension_of(const std::vector<std::string>& w) {
  std::vector<Dimension> found;
  auto check = [&](Dimension d, bool hit) {
    if (hit) found.push_back(d);
  };
  check(Dimension::Ov, has_prefix(w, "overall") || has_prefix(w, "maintainab") || has(w, "ov"));
  check(Dimension::Rd, has_prefix(w, "readab") || has(w, "rd"));
  check(Dimension::Ud, has_prefix(w, "understandab") || has(w, "ud"));
  check(Dimension::Cx, has_prefix(w, "complex") || has(w, "cx"));
  check(Dimension::Md, has_prefix(w, "modular") || has(w, "md"));
  if (found.size() != 1) return std::nullopt;
  return found.front();
}

// 0..3 = sa, wa, wd, sd
std::optional<int> answer_of(const std::vector<std::string>& w) {
  for (int a = 0; a < 4; ++a) {
    static const char* const kShort[] = {"sa", "wa", "wd", "sd"};
    if (has(w, kShort[a])) return a;
  }
  const bool strongly = has(w, "strongly") || has(w, "strong");
  const bool weakly = has(w, "weakly") || has(w, "weak");
  const bool disagree = has(w, "disagree");
  const bool agree = has(w, "agree");
  if (strongly == weakly || agree == disagree) return std::nullopt;
  if (strongly) return disagree ? 3 : 0;
  return disagree ? 2 : 1;
}

bool is_file_column(const std::vector<std::string>& w) {
  return has(w, "file") || has(w, "filename") || has(w, "class") || has(w, "classname") ||
         has(w, "name") || has(w, "path");
}

char detect_delimiter(std::string_view text) {
  const std::string_view first = text.substr(0, text.find('\n'));
  char best = ',';
  std::size_t best_count = 0;
  for (char d : {',', ';', '\t'}) {
    const auto n = static_cast<std::size_t>(std::count(first.begin(), first.end(), d));
    if (n > best_count) {
      best = d;
      best_count = n;
    }
  }
  return best;
}

}  // namespace

AdaptedRatings adapt_ratings(std::string_view upstream_text) {
  AdaptedRatings result;
  result.delimiter = detect_delimiter(upstream_text);
  const auto rows = csv::parse(upstream_text, result.delimiter);
  if (rows.empty()) throw IngestionError("upstream ratings: empty input");

  const auto& header = rows.front().fields;
  const auto& columns = ratings_columns();
  std::vector<std::optional<std::size_t>> source(columns.size());
  auto assign = [&](std::size_t canonical, std::size_t upstream) {
    if (source[canonical]) {
      throw IngestionError("upstream ratings header: columns '" + header[*source[canonical]] +
                           "' and '" + header[upstream] + "' both map to '" +
                           columns[canonical] + "'");
    }
    source[canonical] = upstream;
  };
  for (std::size_t h = 0; h < header.size(); ++h) {
    const auto w = words(header[h]);
    const auto dim = dimension_of(w);
    const auto answer = answer_of(w);
    if (dim && answer) {
      assign(1 + 4 * static_cast<std::size_t>(*dim) + static_cast<std::size_t>(*answer), h);
    } else if (!source[0] && is_file_column(w)) {
      source[0] = h;
    } else {
      warn(&result.warnings, "upstream ratings header: ignoring column '" + header[h] + "'");
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (!source[c]) {
      throw IngestionError("upstream ratings header: no column maps to '" + columns[c] + "'");
    }
    result.mapping.emplace_back(columns[c], header[*source[c]]);
  }

  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::string value = *source[c] < fields.size() ? fields[*source[c]] : std::string();
      if (c == 0) {
        std::replace(value.begin(), value.end(), '\\', '/');
      } else if (result.delimiter != ',' && value.find(',') != std::string::npos &&
                 value.find('.') == std::string::npos) {
        std::replace(value.begin(), value.end(), ',', '.');
        result.decimal_comma = true;
      }
      out << (c ? "," : "") << csv::escape(value);
    }
    out << '\n';
  }
  result.canonical_csv = out.str();
  result.ratings = parse_ratings(result.canonical_csv, &result.warnings);
  return result;
}

}  // namespace cemaint
