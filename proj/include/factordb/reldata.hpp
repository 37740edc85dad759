#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "factordb/value.hpp"

namespace factordb {

// One stored tuple plus its identifier. Identifiers come from an optional
// leading "_id" CSV column; otherwise they are synthesized as
// "<relation>_<row number>" (1-based), which keeps them globally unique.
struct Row {
  std::string id;
  Tuple tuple;
};

struct Relation {
  std::string name;
  std::vector<std::string> columns;
  std::vector<Row> rows;

  size_t size() const { return rows.size(); }
  size_t distinct_count() const;
  // Index of a column by name, -1 if absent.
  int column_index(const std::string& column) const;
};

// A named collection of relations. Bag semantics: duplicate tuples are kept
// and distinguished by their identifiers.
struct Database {
  std::map<std::string, Relation> relations;

  bool has(const std::string& name) const { return relations.count(name) > 0; }
  const Relation& at(const std::string& name) const;
  size_t size() const;  // total number of tuples
};

struct DatabaseStats {
  size_t size = 0;            // total tuples
  size_t distinct_total = 0;  // per-relation distinct tuples, summed
  size_t max_arity = 0;
};

// CSV format: UTF-8, comma separated, no quoting (cells must not contain
// commas or newlines), mandatory header row. A leading "_id" column supplies
// row identifiers.
Relation load_csv(const std::string& path, const std::string& name);
Relation parse_csv(const std::string& text, const std::string& name);
std::string relation_to_csv(const Relation& rel);
void write_csv(const Relation& rel, const std::string& path);

// Loads every "<name>.csv" in a directory as relation <name>.
Database load_database_dir(const std::string& dir);

DatabaseStats database_stats(const Database& db);

}  // namespace factordb
