#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cemaint/errors.hpp"

namespace cemaint {

/// A preprocessed source file. `cleaned_text` has comments and blank lines
/// removed; `lloc` is its line count.
struct SourceClass {
  std::string id;  // path relative to the corpus root, '/'-separated
  std::string raw_text;
  std::string cleaned_text;
  std::size_t lloc = 0;
};

/// Maintainability aspects rated in the expert dataset. Cx and Md are phrased
/// negatively ("this code is complex", "should be broken up").
enum class Dimension { Ov, Rd, Ud, Cx, Md };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::Ov, Dimension::Rd, Dimension::Ud, Dimension::Cx, Dimension::Md};

std::string_view dimension_name(Dimension d);  // "ov", "rd", ...
std::optional<Dimension> parse_dimension(std::string_view name);

/// Likert answer distribution for one statement.
struct LikertProbabilities {
  double strongly_agree = 0.0;
  double weakly_agree = 0.0;
  double weakly_disagree = 0.0;
  double strongly_disagree = 0.0;

  double sum() const {
    return strongly_agree + weakly_agree + weakly_disagree + strongly_disagree;
  }
};

struct MaintainabilityRating {
  std::string file_id;
  std::array<LikertProbabilities, 5> dimensions{};

  const LikertProbabilities& operator[](Dimension d) const {
    return dimensions[static_cast<std::size_t>(d)];
  }
  LikertProbabilities& operator[](Dimension d) {
    return dimensions[static_cast<std::size_t>(d)];
  }
};

/// Accepted deviation of a Likert vector's sum from 1.
inline constexpr double kProbabilitySumTolerance = 0.02;

// Preprocessing ------------------------------------------------------------

/// Replace invalid UTF-8 sequences with U+FFFD. Returns the number of
/// replacements made.
std::size_t sanitize_utf8(std::string& text);

/// Remove `//` and `/* */` comments and every blank line from Java-family
/// source. String, char and text-block literals are left intact. `\r\n` and
/// `\r` are normalized to `\n`, invalid UTF-8 is replaced. Unterminated
/// block comments and literals run to end of input and produce a warning.
///
/// The result never ends in a newline; surviving lines keep their content
/// except for trailing whitespace that preceded a removed comment.
std::string strip_comments(std::string_view raw_text, Warnings* warnings = nullptr);

/// Number of lines in comment-stripped text; 0 for the empty string. A final
/// newline terminates the last line rather than starting a new one.
std::size_t count_lloc(std::string_view cleaned_text);

SourceClass make_source_class(std::string id, std::string raw_text,
                              Warnings* warnings = nullptr);

// Corpus -------------------------------------------------------------------

struct CorpusFailure {
  std::string id;
  std::string reason;
};

struct Corpus {
  std::vector<SourceClass> files;  // sorted by id
  std::vector<CorpusFailure> failures;
  Warnings warnings;
};

/// Recursively collect files under `root` whose extension is listed
/// (e.g. ".java"). Files that cannot be read are recorded as failures.
Corpus load_corpus(const std::filesystem::path& root,
                   const std::vector<std::string>& extensions = {".java"});

// Ratings ------------------------------------------------------------------

/// Canonical ratings header, in column order.
const std::vector<std::string>& ratings_columns();

/// Load a ratings CSV in the canonical layout. Columns are located by header
/// name. Structural problems throw IngestionError naming row and column;
/// Likert vectors whose sum is off by more than the tolerance produce a
/// warning.
std::vector<MaintainabilityRating> load_ratings(const std::filesystem::path& path,
                                                Warnings* warnings = nullptr);
std::vector<MaintainabilityRating> parse_ratings(std::string_view csv_text,
                                                 Warnings* warnings = nullptr);

void write_ratings(const std::filesystem::path& path,
                   const std::vector<MaintainabilityRating>& ratings);

}  // namespace cemaint
