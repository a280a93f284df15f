#pragma once

// Data model for duplicate-bearing integrated samples: records, schema,
// CSV ingestion and frequency profiling.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace unkml {

enum class ColumnKind { numeric, categorical };

/// A cell: a finite double for numeric columns, an opaque token otherwise.
using Value = std::variant<double, std::string>;

/// Shortest decimal string that round-trips to the same double. Negative zero
/// is normalized to "0".
std::string canonical_number(double value);
std::string format_value(const Value& value);

struct Schema {
  std::vector<std::string> feature_names;
  std::vector<ColumnKind> feature_kinds;
  std::string label_name;
  ColumnKind label_kind = ColumnKind::numeric;
  // Position of the label among the written columns, so output mirrors the
  // input column order.
  std::size_t label_position = 0;

  std::size_t dimension() const { return feature_names.size(); }
  bool is_classification() const { return label_kind == ColumnKind::categorical; }
  std::vector<std::size_t> numeric_features() const;
  std::optional<std::size_t> feature_index(const std::string& name) const;

  bool operator==(const Schema&) const = default;
};

/// One example. Immutable; the dedup key is computed once at construction and
/// is equal for two records iff every canonicalized field (label included) is.
class Record {
 public:
  Record(std::vector<Value> features, Value label);

  const std::vector<Value>& features() const noexcept { return features_; }
  const Value& label() const noexcept { return label_; }
  const std::string& dedup_key() const noexcept { return key_; }
  std::size_t dimension() const noexcept { return features_.size(); }

  // Throws Error(schema) when the addressed cell is categorical.
  double numeric(std::size_t feature) const;
  double numeric_label() const;

 private:
  std::vector<Value> features_;
  Value label_;
  std::string key_;
};

/// The integrated training multiset S before de-duplication.
class IntegratedSample {
 public:
  IntegratedSample() = default;
  // Validates that every record matches the schema's arity and column kinds.
  IntegratedSample(Schema schema, std::vector<Record> records);

  const Schema& schema() const noexcept { return schema_; }
  std::span<const Record> records() const noexcept { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  Schema schema_;
  std::vector<Record> records_;
};

/// Multiplicity histogram of a multiset of records.
struct FrequencyProfile {
  std::size_t distinct = 0;  // c
  std::size_t total = 0;     // n, duplicates included
  std::map<std::size_t, std::size_t> counts;  // i -> f_i, only nonzero entries

  std::size_t f(std::size_t multiplicity) const;
  std::size_t singletons() const { return f(1); }

  // Builds a profile from an f_i table, deriving c and n.
  static FrequencyProfile from_counts(std::map<std::size_t, std::size_t> counts);
};

FrequencyProfile frequency_profile(std::span<const Record> records);
FrequencyProfile frequency_profile(const IntegratedSample& sample);

/// One record per distinct key, first occurrence kept, first-occurrence order.
IntegratedSample deduplicate(const IntegratedSample& sample);
std::vector<Record> deduplicate(std::span<const Record> records);

struct SchemaSpec {
  std::string label_column;
  std::vector<std::string> categorical_columns;
  // Empty means every column except the label and the reserved
  // `weight` / `synthetic` annotation columns.
  std::vector<std::string> feature_columns;
};

/// A sample plus the optional annotation columns written by the correction
/// step.
struct AnnotatedSample {
  IntegratedSample sample;
  std::optional<std::vector<double>> weights;
  std::optional<std::vector<bool>> synthetic;
};

IntegratedSample load_csv(const std::filesystem::path& path, const SchemaSpec& spec);
IntegratedSample read_csv(std::istream& in, const SchemaSpec& spec);
AnnotatedSample load_annotated_csv(const std::filesystem::path& path, const SchemaSpec& spec);
AnnotatedSample read_annotated_csv(std::istream& in, const SchemaSpec& spec);

/// Feature vectors only (no label needed), read by the schema's feature
/// column names. Used for unlabeled test features.
std::vector<std::vector<Value>> read_feature_rows(std::istream& in, const Schema& schema);
std::vector<std::vector<Value>> load_feature_rows(const std::filesystem::path& path, const Schema& schema);

void write_csv(std::ostream& out, const IntegratedSample& sample,
               const std::vector<double>* weights = nullptr,
               const std::vector<bool>* synthetic = nullptr);
void write_csv(const std::filesystem::path& path, const IntegratedSample& sample,
               const std::vector<double>* weights = nullptr,
               const std::vector<bool>* synthetic = nullptr);

}  // namespace unkml
