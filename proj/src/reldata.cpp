#include "factordb/reldata.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "factordb/errors.hpp"

namespace factordb {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

size_t Relation::distinct_count() const {
  std::vector<const Tuple*> ts;
  ts.reserve(rows.size());
  for (const Row& r : rows) ts.push_back(&r.tuple);
  std::sort(ts.begin(), ts.end(),
            [](const Tuple* a, const Tuple* b) { return tuple_less(*a, *b); });
  size_t n = 0;
  for (size_t i = 0; i < ts.size(); ++i)
    if (i == 0 || tuple_less(*ts[i - 1], *ts[i])) ++n;
  return n;
}

int Relation::column_index(const std::string& column) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == column) return static_cast<int>(i);
  return -1;
}

const Relation& Database::at(const std::string& name) const {
  auto it = relations.find(name);
  if (it == relations.end())
    throw SchemaError("no relation named '" + name + "' in database");
  return it->second;
}

size_t Database::size() const {
  size_t n = 0;
  for (const auto& [_, rel] : relations) n += rel.rows.size();
  return n;
}

Relation parse_csv(const std::string& text, const std::string& name) {
  Relation rel;
  rel.name = name;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("relation '" + name + "': missing header row");
  line = strip_cr(line);
  std::vector<std::string> header = split_line(line);
  bool has_id = !header.empty() && header[0] == "_id";
  size_t first_col = has_id ? 1 : 0;
  for (size_t i = first_col; i < header.size(); ++i) {
    if (header[i].empty())
      throw FormatError("relation '" + name + "': empty column name in header");
    rel.columns.push_back(header[i]);
  }
  std::set<std::string> seen_cols(rel.columns.begin(), rel.columns.end());
  if (seen_cols.size() != rel.columns.size())
    throw FormatError("relation '" + name + "': duplicate column name");

  std::set<std::string> seen_ids;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() && in.eof()) break;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw FormatError("relation '" + name + "': row " +
                        std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    Row row;
    if (has_id) {
      row.id = cells[0];
      if (row.id.empty())
        throw IntegrityError("relation '" + name + "': empty _id in row " +
                             std::to_string(lineno));
    } else {
      row.id = name + "_" + std::to_string(rel.rows.size() + 1);
    }
    if (!seen_ids.insert(row.id).second)
      throw IntegrityError("relation '" + name + "': duplicate identifier '" +
                           row.id + "'");
    for (size_t i = first_col; i < cells.size(); ++i)
      row.tuple.push_back(Value::parse_cell(cells[i]));
    rel.rows.push_back(std::move(row));
  }
  return rel;
}

Relation load_csv(const std::string& path, const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), name);
}

std::string relation_to_csv(const Relation& rel) {
  std::string out = "_id";
  for (const std::string& c : rel.columns) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (const Row& r : rel.rows) {
    out += r.id;
    for (const Value& v : r.tuple) {
      out += ',';
      out += v.to_string();
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Relation& rel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << relation_to_csv(rel);
}

Database load_database_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir);
  Database db;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    std::string name = p.stem().string();
    db.relations.emplace(name, load_csv(p.string(), name));
  }
  return db;
}

DatabaseStats database_stats(const Database& db) {
  DatabaseStats st;
  for (const auto& [_, rel] : db.relations) {
    st.size += rel.size();
    st.distinct_total += rel.distinct_count();
    st.max_arity = std::max(st.max_arity, rel.columns.size());
  }
  return st;
}

}  // namespace factordb
