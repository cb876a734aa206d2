#include "whatif/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace whatif {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() > t.header.size())
      throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + " has more cells than the header");
    cells.resize(t.header.size());
    t.rows.emplace_back(lineno, std::move(cells));
  }
  if (t.header.empty()) throw Error(ErrorCode::InvalidArgument, "CSV input has no header row");
  return t;
}

template <typename T>
T parse_cell(const std::string& cell, std::size_t lineno, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size())
    throw Error(ErrorCode::InvalidArgument,
                "line " + std::to_string(lineno) + ": " + what + " '" + cell + "' is not a number");
  return v;
}

std::size_t column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
  for (std::size_t c = 0; c < header.size(); ++c)
    for (const char* n : names)
      if (header[c] == n) return c;
  return header.size();
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Tuple> parse_tuples_csv(const std::string& text) {
  const Table t = parse_table(text);
  const std::size_t id_col = column(t.header, {"id"});
  if (id_col == t.header.size()) throw Error(ErrorCode::InvalidArgument, "CSV header has no id column");
  const std::size_t w_col = column(t.header, {"weight"});
  const std::size_t rel_col = column(t.header, {"rel", "relation"});
  std::vector<Tuple> out;
  out.reserve(t.rows.size());
  for (const auto& [lineno, cells] : t.rows) {
    Tuple tu;
    tu.id = parse_cell<TupleId>(cells[id_col], lineno, "id");
    if (w_col < cells.size()) tu.weight = parse_cell<double>(cells[w_col], lineno, "weight");
    if (rel_col < cells.size() && !cells[rel_col].empty()) tu.relation = cells[rel_col];
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (c != id_col && c != w_col && c != rel_col) tu.attrs.push_back(cells[c]);
    while (!tu.attrs.empty() && tu.attrs.back().empty()) tu.attrs.pop_back();
    out.push_back(std::move(tu));
  }
  return out;
}

std::vector<Tuple> read_tuples_csv(const std::string& path) { return parse_tuples_csv(read_file(path)); }

std::vector<RegRow> parse_rows_csv(const std::string& text) {
  const Table t = parse_table(text);
  const std::size_t id_col = column(t.header, {"id"});
  if (id_col == t.header.size()) throw Error(ErrorCode::InvalidArgument, "CSV header has no id column");
  std::size_t target_col = column(t.header, {"target"});
  if (target_col == t.header.size()) target_col = t.header.size() - 1;
  if (target_col == id_col || t.header.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "regression CSV needs id, at least one feature, and a target");
  std::vector<RegRow> out;
  out.reserve(t.rows.size());
  for (const auto& [lineno, cells] : t.rows) {
    RegRow r;
    r.id = parse_cell<TupleId>(cells[id_col], lineno, "id");
    r.target = parse_cell<double>(cells[target_col], lineno, "target");
    r.features.resize(static_cast<Eigen::Index>(cells.size() - 2));
    Eigen::Index f = 0;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (c != id_col && c != target_col) r.features(f++) = parse_cell<double>(cells[c], lineno, "feature");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RegRow> read_rows_csv(const std::string& path) { return parse_rows_csv(read_file(path)); }

HypothesesFile parse_hypotheticals(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("hypotheticals file is not JSON: ") + e.what());
  }
  HypothesesFile out;
  const nlohmann::json* entries = &doc;
  if (doc.is_object()) {
    if (!doc.contains("members")) throw Error(ErrorCode::InvalidArgument, "hypotheticals file has no members");
    entries = &doc.at("members");
    if (doc.contains("labels"))
      for (const auto& l : doc.at("labels")) out.labels.push_back(l.get<std::string>());
  }
  if (!entries->is_array()) throw Error(ErrorCode::InvalidArgument, "hypothetical members must be an array");
  std::vector<std::vector<TupleId>> members;
  try {
    for (const auto& e : *entries) {
      if (e.is_object()) {
        members.push_back(e.at("members").get<std::vector<TupleId>>());
        if (e.contains("label")) {
          out.labels.resize(members.size() - 1);
          out.labels.push_back(e.at("label").get<std::string>());
        }
      } else {
        members.push_back(e.get<std::vector<TupleId>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad hypothetical entry: ") + e.what());
  }
  if (doc.is_object() && doc.contains("k") && doc.at("k").get<std::size_t>() != members.size())
    throw Error(ErrorCode::InvalidArgument, "hypotheticals file declares k=" + doc.at("k").dump() + " but lists " +
                                                std::to_string(members.size()));
  out.set = HypotheticalSet(std::move(members));
  if (!out.labels.empty()) {
    for (std::size_t i = out.labels.size(); i < out.set.k(); ++i) out.labels.push_back("h" + std::to_string(i + 1));
    out.labels.resize(out.set.k());
  }
  return out;
}

HypothesesFile read_hypotheticals(const std::string& path) { return parse_hypotheticals(read_file(path)); }

}  // namespace whatif
