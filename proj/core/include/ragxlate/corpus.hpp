#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ragxlate {

enum class Lang { Fortran, Cpp };

// One Fortran/C++ translation pair. `fortran` doubles as the retrieval query
// text; `cpp` may be empty for unlabeled corpora.
struct CodePair {
  std::string id;
  std::string fortran;       // normalized source snippet
  std::string cpp;           // normalized target snippet ("" when unlabeled)
  std::string dataset;       // name of the dataset this pair came from
  std::size_t byte_len = 0;  // bytes of `fortran` after normalization
};

struct Dataset {
  std::string name;
  std::vector<CodePair> pairs;  // file order is preserved
  bool labeled = true;          // true iff every pair has a non-empty cpp
};

// Strip comments, expand tabs to 4 spaces, trim trailing whitespace per line,
// and collapse runs of >= 2 blank lines into one. Idempotent.
//
// Fortran: free-form `!` comments (quote-aware, so a `!` inside a character
// literal survives) plus fixed-form lines whose column-1 character is C, c
// or `*` (the whole line is dropped). C++: `//` and `/* ... */`, both
// string-aware. Throws NormalizationError on an unterminated `/*` block.
std::string normalize_code(const std::string& code, Lang lang);

// Lenient variant used inside the metric: an unterminated `/*` comments out
// the rest of the input instead of throwing. Model output is frequently
// malformed and the metric has to stay total.
std::string normalize_code_lenient(const std::string& code, Lang lang);

// Read a JSONL dataset (one object per line; fields `id`, `fortran`,
// optional `cpp`). Both code fields are normalized at load time; the
// normalized text is what flows through embedding, prompting and metrics.
// Errors: ParseError (malformed line, with line number), IntegrityError
// (duplicate id, or fortran empty after normalization).
Dataset load_dataset(const std::string& path, const std::string& name);

// Write JSONL with keys id, fortran and (when non-empty) cpp. Loading the
// saved file yields byte-identical pair contents (normalization is
// idempotent).
void save_dataset(const Dataset& ds, const std::string& path);

// Keep exactly the pairs with min_bytes <= byte_len <= max_bytes, order
// preserved, contents untouched. Throws ArgumentError if min > max.
Dataset filter_by_size(const Dataset& ds, std::size_t min_bytes,
                       std::size_t max_bytes);

// Default size window for raw scraped corpora.
inline constexpr std::size_t kDefaultMinBytes = 1000;
inline constexpr std::size_t kDefaultMaxBytes = 10000;

}  // namespace ragxlate
