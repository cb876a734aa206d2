#pragma once

#include <string>
#include <vector>

#include "whatif/core.hpp"

namespace whatif {

// CSV with a header row. `id` is required; `weight` defaults to 1; `rel` or `relation`
// names the relation (default R); every other column is an attribute, in order.
// Trailing empty attribute cells are dropped so relations of smaller arity can share a file.
std::vector<Tuple> read_tuples_csv(const std::string& path);
std::vector<Tuple> parse_tuples_csv(const std::string& text);

// CSV `id,f1,...,fd,target`; the target is the column named `target`, else the last one.
std::vector<RegRow> read_rows_csv(const std::string& path);
std::vector<RegRow> parse_rows_csv(const std::string& text);

struct HypothesesFile {
  HypotheticalSet set;
  std::vector<std::string> labels;
};

// {"k": k, "members": [[ids]...], "labels": [...]}, or a bare array of id arrays.
// Entries of "members" may also be {"label": ..., "members": [...]}.
HypothesesFile read_hypotheticals(const std::string& path);
HypothesesFile parse_hypotheticals(const std::string& text);

std::string read_file(const std::string& path);

}  // namespace whatif
