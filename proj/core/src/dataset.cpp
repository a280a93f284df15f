#include "unkml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "unkml/error.hpp"

namespace unkml {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema: return "schema_error";
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::no_eligible_axis: return "no_eligible_axis";
    case ErrorKind::config: return "config_error";
    case ErrorKind::fit: return "fit_error";
    case ErrorKind::unsupported: return "unsupported_combination";
    case ErrorKind::io: return "io_error";
    case ErrorKind::internal: return "internal_error";
  }
  return "unknown_error";
}

namespace {

constexpr std::string_view kWeightColumn = "weight";
constexpr std::string_view kSyntheticColumn = "synthetic";

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), std::string_view::reverse_iterator(b), not_space).base();
  return std::string_view(b, static_cast<std::size_t>(e - b));
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

void append_key_part(std::string& key, const Value& v) {
  if (const double* d = std::get_if<double>(&v)) {
    key += 'n';
    key += canonical_number(*d);
  } else {
    const auto& s = std::get<std::string>(v);
    key += 'c';
    key += std::to_string(s.size());
    key += ':';
    key += s;
  }
  key += '|';
}

// Splits one logical CSV record; quoted fields may contain delimiters,
// doubled quotes and newlines. Returns false at end of input.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    if (!quoted) break;
    field += '\n';
    if (!std::getline(in, line)) break;
  }
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

bool blank_row(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string canonical_number(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorKind::internal, "number formatting failed");
  return std::string(buf, ptr);
}

std::string format_value(const Value& value) {
  if (const double* d = std::get_if<double>(&value)) return canonical_number(*d);
  return std::get<std::string>(value);
}

std::vector<std::size_t> Schema::numeric_features() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < feature_kinds.size(); ++j)
    if (feature_kinds[j] == ColumnKind::numeric) out.push_back(j);
  return out;
}

std::optional<std::size_t> Schema::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

Record::Record(std::vector<Value> features, Value label)
    : features_(std::move(features)), label_(std::move(label)) {
  for (const auto& v : features_) append_key_part(key_, v);
  key_ += '#';
  append_key_part(key_, label_);
}

double Record::numeric(std::size_t feature) const {
  const double* d = std::get_if<double>(&features_.at(feature));
  if (d == nullptr)
    throw Error(ErrorKind::schema, "feature " + std::to_string(feature) + " is categorical");
  return *d;
}

double Record::numeric_label() const {
  const double* d = std::get_if<double>(&label_);
  if (d == nullptr) throw Error(ErrorKind::schema, "label is categorical");
  return *d;
}

IntegratedSample::IntegratedSample(Schema schema, std::vector<Record> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  if (schema_.feature_names.size() != schema_.feature_kinds.size())
    throw Error(ErrorKind::schema, "schema names and kinds differ in length");
  if (schema_.dimension() == 0) throw Error(ErrorKind::schema, "schema has no feature columns");
  const auto kind_of = [](const Value& v) {
    return std::holds_alternative<double>(v) ? ColumnKind::numeric : ColumnKind::categorical;
  };
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (r.dimension() != schema_.dimension())
      throw Error(ErrorKind::schema, "record arity does not match schema", i);
    for (std::size_t j = 0; j < r.dimension(); ++j)
      if (kind_of(r.features()[j]) != schema_.feature_kinds[j])
        throw Error(ErrorKind::schema, "column '" + schema_.feature_names[j] + "' kind mismatch", i);
    if (kind_of(r.label()) != schema_.label_kind)
      throw Error(ErrorKind::schema, "label kind mismatch", i);
  }
}

std::size_t FrequencyProfile::f(std::size_t multiplicity) const {
  auto it = counts.find(multiplicity);
  return it == counts.end() ? 0 : it->second;
}

FrequencyProfile FrequencyProfile::from_counts(std::map<std::size_t, std::size_t> counts) {
  FrequencyProfile p;
  for (auto it = counts.begin(); it != counts.end();) {
    if (it->first == 0) throw Error(ErrorKind::config, "multiplicity must be >= 1");
    if (it->second == 0) {
      it = counts.erase(it);
      continue;
    }
    p.distinct += it->second;
    p.total += it->first * it->second;
    ++it;
  }
  p.counts = std::move(counts);
  return p;
}

FrequencyProfile frequency_profile(std::span<const Record> records) {
  if (records.empty()) throw Error(ErrorKind::empty_input, "frequency profile of an empty sample");
  std::unordered_map<std::string_view, std::size_t> multiplicity;
  multiplicity.reserve(records.size());
  for (const auto& r : records) ++multiplicity[r.dedup_key()];
  FrequencyProfile p;
  p.distinct = multiplicity.size();
  p.total = records.size();
  for (const auto& [key, m] : multiplicity) ++p.counts[m];
  return p;
}

FrequencyProfile frequency_profile(const IntegratedSample& sample) {
  return frequency_profile(sample.records());
}

std::vector<Record> deduplicate(std::span<const Record> records) {
  std::unordered_set<std::string_view> seen;
  std::vector<Record> out;
  for (const auto& r : records)
    if (seen.insert(r.dedup_key()).second) out.push_back(r);
  return out;
}

IntegratedSample deduplicate(const IntegratedSample& sample) {
  return IntegratedSample(sample.schema(), deduplicate(sample.records()));
}

AnnotatedSample read_annotated_csv(std::istream& in, const SchemaSpec& spec) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header) || blank_row(header))
    throw Error(ErrorKind::empty_input, "CSV input has no header row");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim(h));

  const auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::schema, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (spec.label_column.empty()) throw Error(ErrorKind::schema, "no label column given");
  const std::size_t label_col = column(spec.label_column);
  for (const auto& c : spec.categorical_columns) column(c);

  std::optional<std::size_t> weight_col;
  std::optional<std::size_t> synthetic_col;
  std::vector<std::size_t> feature_cols;
  if (spec.feature_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == label_col) continue;
      if (header[j] == kWeightColumn) { weight_col = j; continue; }
      if (header[j] == kSyntheticColumn) { synthetic_col = j; continue; }
      feature_cols.push_back(j);
    }
  } else {
    for (const auto& name : spec.feature_columns) feature_cols.push_back(column(name));
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == kWeightColumn) weight_col = j;
      if (header[j] == kSyntheticColumn) synthetic_col = j;
    }
  }

  const auto is_categorical = [&](const std::string& name) {
    return std::find(spec.categorical_columns.begin(), spec.categorical_columns.end(), name) !=
           spec.categorical_columns.end();
  };
  Schema schema;
  for (std::size_t j : feature_cols) {
    schema.feature_names.push_back(header[j]);
    schema.feature_kinds.push_back(is_categorical(header[j]) ? ColumnKind::categorical
                                                             : ColumnKind::numeric);
  }
  schema.label_name = header[label_col];
  schema.label_kind = is_categorical(schema.label_name) ? ColumnKind::categorical : ColumnKind::numeric;
  schema.label_position = static_cast<std::size_t>(
      std::count_if(feature_cols.begin(), feature_cols.end(), [&](std::size_t j) { return j < label_col; }));

  const auto cell = [&](const std::string& raw, ColumnKind kind, const std::string& name,
                        std::size_t row) -> Value {
    if (kind == ColumnKind::categorical) return std::string(trim(raw));
    auto v = parse_number(raw);
    if (!v)
      throw Error(ErrorKind::parse,
                  "row " + std::to_string(row) + ": column '" + name + "': not a number: '" + raw + "'",
                  row);
    return *v;
  };

  std::vector<Record> records;
  std::vector<double> weights;
  std::vector<bool> synthetic;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_csv_row(in, fields)) {
    if (blank_row(fields)) continue;
    if (fields.size() != header.size())
      throw Error(ErrorKind::parse,
                  "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()),
                  row);
    std::vector<Value> features;
    features.reserve(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      features.push_back(cell(fields[feature_cols[k]], schema.feature_kinds[k], schema.feature_names[k], row));
    Value label = cell(fields[label_col], schema.label_kind, schema.label_name, row);
    if (weight_col) {
      auto w = parse_number(fields[*weight_col]);
      if (!w || *w < 0.0)
        throw Error(ErrorKind::parse, "row " + std::to_string(row) + ": bad weight", row);
      weights.push_back(*w);
    }
    if (synthetic_col) {
      const auto t = trim(fields[*synthetic_col]);
      if (t != "0" && t != "1" && t != "true" && t != "false")
        throw Error(ErrorKind::parse, "row " + std::to_string(row) + ": bad synthetic flag", row);
      synthetic.push_back(t == "1" || t == "true");
    }
    records.emplace_back(std::move(features), std::move(label));
    ++row;
  }
  if (records.empty()) throw Error(ErrorKind::empty_input, "CSV input has no data rows");

  AnnotatedSample out{IntegratedSample(std::move(schema), std::move(records)), std::nullopt, std::nullopt};
  if (weight_col) out.weights = std::move(weights);
  if (synthetic_col) out.synthetic = std::move(synthetic);
  return out;
}

IntegratedSample read_csv(std::istream& in, const SchemaSpec& spec) {
  return std::move(read_annotated_csv(in, spec).sample);
}

AnnotatedSample load_annotated_csv(const std::filesystem::path& path, const SchemaSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return read_annotated_csv(in, spec);
}

IntegratedSample load_csv(const std::filesystem::path& path, const SchemaSpec& spec) {
  return std::move(load_annotated_csv(path, spec).sample);
}

std::vector<std::vector<Value>> read_feature_rows(std::istream& in, const Schema& schema) {
  std::vector<std::string> header;
  if (!read_csv_row(in, header) || blank_row(header))
    throw Error(ErrorKind::empty_input, "CSV input has no header row");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim(h));
  std::vector<std::size_t> cols;
  for (const auto& name : schema.feature_names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::schema, "missing column '" + name + "'");
    cols.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<Value>> rows;
  std::vector<std::string> fields;
  for (std::size_t row = 0; read_csv_row(in, fields);) {
    if (blank_row(fields)) continue;
    if (fields.size() != header.size())
      throw Error(ErrorKind::parse, "row " + std::to_string(row) + ": wrong field count", row);
    std::vector<Value> x;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (schema.feature_kinds[k] == ColumnKind::categorical) {
        x.emplace_back(std::string(trim(fields[cols[k]])));
        continue;
      }
      auto v = parse_number(fields[cols[k]]);
      if (!v)
        throw Error(ErrorKind::parse,
                    "row " + std::to_string(row) + ": column '" + schema.feature_names[k] + "': not a number", row);
      x.emplace_back(*v);
    }
    rows.push_back(std::move(x));
    ++row;
  }
  if (rows.empty()) throw Error(ErrorKind::empty_input, "CSV input has no data rows");
  return rows;
}

std::vector<std::vector<Value>> load_feature_rows(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return read_feature_rows(in, schema);
}

void write_csv(std::ostream& out, const IntegratedSample& sample, const std::vector<double>* weights,
               const std::vector<bool>* synthetic) {
  const Schema& s = sample.schema();
  if (weights && weights->size() != sample.size())
    throw Error(ErrorKind::internal, "weight column length mismatch");
  if (synthetic && synthetic->size() != sample.size())
    throw Error(ErrorKind::internal, "synthetic column length mismatch");

  const std::size_t columns = s.dimension() + 1;
  const auto emit_row = [&](auto&& field_at) {
    for (std::size_t c = 0, f = 0; c < columns; ++c) {
      if (c) out << ',';
      out << quote_if_needed(c == s.label_position ? field_at(std::nullopt) : field_at(f++));
    }
  };
  emit_row([&](std::optional<std::size_t> f) { return f ? s.feature_names[*f] : s.label_name; });
  if (weights) out << ',' << kWeightColumn;
  if (synthetic) out << ',' << kSyntheticColumn;
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Record& r = sample[i];
    emit_row([&](std::optional<std::size_t> f) {
      return format_value(f ? r.features()[*f] : r.label());
    });
    if (weights) out << ',' << canonical_number((*weights)[i]);
    if (synthetic) out << ',' << ((*synthetic)[i] ? "true" : "false");
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const IntegratedSample& sample,
               const std::vector<double>* weights, const std::vector<bool>* synthetic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  write_csv(out, sample, weights, synthetic);
  if (!out) throw Error(ErrorKind::io, "write to '" + path.string() + "' failed");
}

}  // namespace unkml
