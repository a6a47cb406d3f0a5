#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cemaint/corpus.hpp"

namespace cemaint {

/// Result of converting an upstream ratings table into the canonical layout.
struct AdaptedRatings {
  std::vector<MaintainabilityRating> ratings;
  std::string canonical_csv;
  std::vector<std::pair<std::string, std::string>> mapping;  // canonical -> upstream header
  char delimiter = ',';
  bool decimal_comma = false;
  Warnings warnings;
};

/// Map an upstream ratings table onto the canonical columns.
///
/// The delimiter is whichever of ',', ';' and tab splits the header into the
/// most fields. With a non-comma delimiter, decimal commas are accepted.
/// Headers are matched case-insensitively on words: the file column is the
/// first header naming a file, class, name or path; a probability column
/// names one dimension (overall/maintainability, readability,
/// understandability, complexity, modularity or their two-letter
/// abbreviations) and one answer (strongly/weakly agree/disagree, or
/// sa/wa/wd/sd). Paths in the file column are reduced to '/' separators.
/// Throws IngestionError when a canonical column has no match or more than
/// one, and for every problem the canonical loader reports.
AdaptedRatings adapt_ratings(std::string_view upstream_text);

}  // namespace cemaint
