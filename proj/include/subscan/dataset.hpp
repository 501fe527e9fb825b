#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "subscan/error.hpp"

namespace subscan {

using CategoryIndex = std::uint32_t;

// Ordered categorical features with their category labels. Categories are
// addressed by dense per-feature indices; labels live only here.
class Schema {
 public:
  struct Feature {
    std::string name;
    std::vector<std::string> categories;
  };

  Schema() = default;

  explicit Schema(std::vector<Feature> features) : features_(std::move(features)) {
    std::unordered_set<std::string> names;
    for (const auto& f : features_) {
      if (!names.insert(f.name).second) throw ContractError("duplicate feature name '" + f.name + "'");
      if (f.categories.empty()) throw ContractError("feature '" + f.name + "' has no categories");
      std::unordered_set<std::string> labels;
      for (const auto& c : f.categories) {
        if (!labels.insert(c).second) {
          throw ContractError("duplicate category '" + c + "' in feature '" + f.name + "'");
        }
      }
    }
  }

  std::size_t size() const noexcept { return features_.size(); }
  const Feature& feature(std::size_t f) const { return features_.at(f); }
  const std::vector<Feature>& features() const noexcept { return features_; }
  std::size_t cardinality(std::size_t f) const { return features_.at(f).categories.size(); }
  const std::string& label(std::size_t f, CategoryIndex v) const { return features_.at(f).categories.at(v); }

  std::optional<std::size_t> find_feature(std::string_view name) const {
    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (features_[f].name == name) return f;
    }
    return std::nullopt;
  }

  std::optional<CategoryIndex> find_category(std::size_t f, std::string_view label) const {
    const auto& cats = features_.at(f).categories;
    for (std::size_t v = 0; v < cats.size(); ++v) {
      if (cats[v] == label) return static_cast<CategoryIndex>(v);
    }
    return std::nullopt;
  }

  friend bool operator==(const Schema& a, const Schema& b) {
    if (a.features_.size() != b.features_.size()) return false;
    for (std::size_t i = 0; i < a.features_.size(); ++i) {
      if (a.features_[i].name != b.features_[i].name ||
          a.features_[i].categories != b.features_[i].categories) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Feature> features_;
};

// Immutable table of categorical codes plus a binary outcome per record.
//
// Codes are stored column-major (one vector per feature). Schema and columns
// are shared between copies, so deriving a dataset with redrawn outcomes is cheap.
class Dataset {
 public:
  using Column = std::vector<CategoryIndex>;

  Dataset(Schema schema, std::vector<Column> columns, std::vector<std::uint8_t> outcomes)
      : schema_(std::make_shared<const Schema>(std::move(schema))),
        columns_(std::make_shared<const std::vector<Column>>(std::move(columns))) {
    if (columns_->size() != schema_->size()) {
      throw ContractError("column count does not match schema");
    }
    for (std::size_t f = 0; f < columns_->size(); ++f) {
      const auto& col = (*columns_)[f];
      if (col.size() != outcomes.size()) throw ContractError("column length does not match outcome count");
      const auto card = schema_->cardinality(f);
      for (auto v : col) {
        if (v >= card) throw ContractError("category index out of range in feature '" + schema_->feature(f).name + "'");
      }
    }
    set_outcomes(std::move(outcomes));
  }

  // Row-major convenience constructor: rows[i][f] is record i's category for feature f.
  static Dataset from_rows(Schema schema, const std::vector<std::vector<CategoryIndex>>& rows,
                           std::vector<std::uint8_t> outcomes) {
    std::vector<Column> columns(schema.size(), Column(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != schema.size()) throw ContractError("row " + std::to_string(i) + " has wrong arity");
      for (std::size_t f = 0; f < rows[i].size(); ++f) columns[f][i] = rows[i][f];
    }
    return Dataset(std::move(schema), std::move(columns), std::move(outcomes));
  }

  // Same features, new outcome vector.
  Dataset with_outcomes(std::vector<std::uint8_t> outcomes) const {
    if (outcomes.size() != n_records()) throw ContractError("outcome count does not match dataset");
    Dataset copy = *this;
    copy.set_outcomes(std::move(outcomes));
    return copy;
  }

  const Schema& schema() const noexcept { return *schema_; }
  std::size_t n_records() const noexcept { return outcomes_.size(); }
  std::size_t n_features() const noexcept { return schema_->size(); }
  std::size_t n_positive() const noexcept { return n_positive_; }
  double global_mean() const noexcept { return global_mean_; }

  std::span<const CategoryIndex> column(std::size_t f) const { return (*columns_).at(f); }
  CategoryIndex value(std::size_t record, std::size_t f) const { return (*columns_)[f][record]; }
  std::span<const std::uint8_t> outcomes() const noexcept { return outcomes_; }
  bool outcome(std::size_t record) const { return outcomes_[record] != 0; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema() == b.schema() && *a.columns_ == *b.columns_ && a.outcomes_ == b.outcomes_;
  }

 private:
  void set_outcomes(std::vector<std::uint8_t> outcomes) {
    if (outcomes.empty()) throw ContractError("dataset must contain at least one record");
    std::size_t pos = 0;
    for (auto y : outcomes) {
      if (y > 1) throw ContractError("outcome values must be 0 or 1");
      pos += y;
    }
    outcomes_ = std::move(outcomes);
    n_positive_ = pos;
    global_mean_ = static_cast<double>(pos) / static_cast<double>(outcomes_.size());
  }

  std::shared_ptr<const Schema> schema_;
  std::shared_ptr<const std::vector<Column>> columns_;
  std::vector<std::uint8_t> outcomes_;
  std::size_t n_positive_ = 0;
  double global_mean_ = 0.0;
};

// Conjunction over features of disjunctions over category values.
// Features without an entry are unconstrained.
class SubsetDescriptor {
 public:
  using ValueSet = std::vector<CategoryIndex>;  // sorted, unique, nonempty

  SubsetDescriptor() = default;

  SubsetDescriptor& constrain(std::size_t feature, ValueSet values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty()) throw ContractError("constrained value set must be nonempty");
    constraints_[feature] = std::move(values);
    return *this;
  }

  SubsetDescriptor& release(std::size_t feature) {
    constraints_.erase(feature);
    return *this;
  }

  bool empty() const noexcept { return constraints_.empty(); }
  std::size_t size() const noexcept { return constraints_.size(); }
  bool constrains(std::size_t feature) const { return constraints_.contains(feature); }

  const ValueSet* values(std::size_t feature) const {
    auto it = constraints_.find(feature);
    return it == constraints_.end() ? nullptr : &it->second;
  }

  bool contains(std::size_t feature, CategoryIndex value) const {
    const auto* set = values(feature);
    return set == nullptr || std::binary_search(set->begin(), set->end(), value);
  }

  const std::map<std::size_t, ValueSet>& constraints() const noexcept { return constraints_; }

  void validate(const Schema& schema) const {
    for (const auto& [f, set] : constraints_) {
      if (f >= schema.size()) throw ContractError("descriptor feature index " + std::to_string(f) + " out of range");
      for (auto v : set) {
        if (v >= schema.cardinality(f)) {
          throw ContractError("descriptor value index " + std::to_string(v) + " out of range for feature '" +
                              schema.feature(f).name + "'");
        }
      }
    }
  }

  // Copy with every full-set (vacuous) constraint removed.
  SubsetDescriptor normalized(const Schema& schema) const {
    SubsetDescriptor out;
    for (const auto& [f, set] : constraints_) {
      if (set.size() < schema.cardinality(f)) out.constraints_.emplace(f, set);
    }
    return out;
  }

  friend bool operator==(const SubsetDescriptor&, const SubsetDescriptor&) = default;

 private:
  std::map<std::size_t, ValueSet> constraints_;
};

inline bool is_member(const Dataset& data, const SubsetDescriptor& d, std::size_t record) {
  for (const auto& [f, set] : d.constraints()) {
    if (!std::binary_search(set.begin(), set.end(), data.value(record, f))) return false;
  }
  return true;
}

// Record indices in the subgroup, ascending.
inline std::vector<std::size_t> membership(const Dataset& data, const SubsetDescriptor& d) {
  d.validate(data.schema());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.n_records(); ++i) {
    if (is_member(data, d, i)) out.push_back(i);
  }
  return out;
}

struct SubsetCounts {
  std::size_t n_subset = 0;
  std::size_t n_positive = 0;
  std::size_t n_total = 0;
  std::size_t total_positive = 0;

  std::size_t complement_size() const noexcept { return n_total - n_subset; }
  std::size_t complement_positive() const noexcept { return total_positive - n_positive; }
};

inline SubsetCounts count_subset(const Dataset& data, const SubsetDescriptor& d) {
  d.validate(data.schema());
  SubsetCounts c{0, 0, data.n_records(), data.n_positive()};
  for (std::size_t i = 0; i < data.n_records(); ++i) {
    if (is_member(data, d, i)) {
      ++c.n_subset;
      c.n_positive += data.outcomes()[i];
    }
  }
  return c;
}

// Number of (feature, value) memberships on which two descriptors disagree,
// treating an unconstrained feature as its full category set.
inline std::size_t value_difference(const Schema& schema, const SubsetDescriptor& a, const SubsetDescriptor& b) {
  std::size_t diff = 0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    for (CategoryIndex v = 0; v < schema.cardinality(f); ++v) {
      if (a.contains(f, v) != b.contains(f, v)) ++diff;
    }
  }
  return diff;
}

inline std::string to_string(const SubsetDescriptor& d, const Schema& schema) {
  if (d.empty()) return "(all records)";
  std::string out;
  for (const auto& [f, set] : d.constraints()) {
    if (!out.empty()) out += "; ";
    out += schema.feature(f).name + " in {";
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (k) out += ", ";
      out += schema.label(f, set[k]);
    }
    out += "}";
  }
  return out;
}

}  // namespace subscan
