#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "subscan/csv.hpp"
#include "subscan/rng.hpp"

namespace subscan {
namespace {

Dataset parse(const std::string& text, const std::string& outcome = "y", CsvOptions opts = {}) {
  std::istringstream in(text);
  return read_csv(in, outcome, opts);
}

std::string error_of(const std::string& text, CsvOptions opts = {}) {
  try {
    parse(text, "y", opts);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST(CsvTest, LoadsSmallFile) {
  const auto d = parse("Gender,Smoking,y\nF,Y,1\nM,N,0\nF,N,0\nM,Y,1\n");
  EXPECT_EQ(d.n_records(), 4u);
  EXPECT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.schema().feature(0).name, "Gender");
  EXPECT_EQ(d.schema().feature(0).categories, (std::vector<std::string>{"F", "M"}));
  EXPECT_EQ(d.n_positive(), 2u);
  EXPECT_EQ(d.value(2, 1), 1u);
}

TEST(CsvTest, OutcomeColumnMayBeAnywhere) {
  const auto d = parse("y,A\n1,a\n0,b\n");
  ASSERT_EQ(d.n_features(), 1u);
  EXPECT_EQ(d.schema().feature(0).name, "A");
  EXPECT_TRUE(d.outcome(0));
}

TEST(CsvTest, NonBinaryOutcomeNamesRow) {
  const auto msg = error_of("A,y\na,1\nb,2\n");
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'2'"), std::string::npos) << msg;
}

TEST(CsvTest, BooleanAliasesOnlyWhenEnabled) {
  EXPECT_FALSE(error_of("A,y\na,true\nb,false\n").empty());
  const auto d = parse("A,y\na,TRUE\nb,false\n", "y", CsvOptions{true});
  EXPECT_EQ(d.n_positive(), 1u);
}

TEST(CsvTest, StructuralErrors) {
  EXPECT_NE(error_of("A,B\na,1\n").find("outcome column 'y'"), std::string::npos);
  EXPECT_NE(error_of("A,y\na,1,extra\n").find("row 1"), std::string::npos);
  EXPECT_FALSE(error_of("").empty());
  EXPECT_FALSE(error_of("A,y\n").empty());
  EXPECT_FALSE(error_of("A,y\n\"a,1\n").empty());
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "y"), InputError);
}

TEST(CsvTest, QuotingAndMissingCells) {
  const auto d = parse("\"Region, US\",y\r\n\"West \"\"coast\"\"\",1\r\n,0\r\n\"multi\nline\",0\r\n");
  EXPECT_EQ(d.schema().feature(0).name, "Region, US");
  EXPECT_EQ(d.schema().label(0, 0), "West \"coast\"");
  EXPECT_EQ(d.schema().label(0, 1), std::string(kMissingLabel));
  EXPECT_EQ(d.schema().label(0, 2), "multi\nline");
}

// write_csv followed by read_csv reproduces the dataset exactly.
TEST(CsvProperty, RoundTrip) {
  const char* awkward[] = {"plain", "with,comma", "with \"quote\"", "line\nbreak", "<missing>", " padded "};
  Rng rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const auto base = fixtures::random_dataset(400 + trial, 60, {3, 2, 6}, 0.3);
    std::vector<Schema::Feature> features;
    for (std::size_t f = 0; f < base.n_features(); ++f) {
      Schema::Feature feat{base.schema().feature(f).name + (f == 1 ? ",x" : ""), {}};
      for (std::size_t v = 0; v < base.schema().cardinality(f); ++v) {
        feat.categories.push_back(std::string(awkward[(v + rng.below(6)) % 6]) + std::to_string(v));
      }
      features.push_back(std::move(feat));
    }
    // read_csv numbers categories by first appearance, so relabel through a round trip first.
    std::vector<Dataset::Column> cols;
    for (std::size_t f = 0; f < base.n_features(); ++f) {
      auto c = base.column(f);
      cols.emplace_back(c.begin(), c.end());
    }
    std::vector<std::uint8_t> y(base.outcomes().begin(), base.outcomes().end());
    const Dataset original(Schema(features), cols, y);

    std::stringstream first;
    write_csv(original, first, "outcome");
    const auto once = read_csv(first, "outcome");
    std::stringstream second;
    write_csv(once, second, "outcome");
    const auto twice = read_csv(second, "outcome");
    EXPECT_EQ(once, twice);
    ASSERT_EQ(once.n_records(), original.n_records());
    for (std::size_t i = 0; i < original.n_records(); ++i) {
      for (std::size_t f = 0; f < original.n_features(); ++f) {
        EXPECT_EQ(once.schema().label(f, once.value(i, f)), original.schema().label(f, original.value(i, f)));
      }
      EXPECT_EQ(once.outcome(i), original.outcome(i));
    }
  }
}

TEST(CsvTest, FileRoundTrip) {
  const auto d = fixtures::random_dataset(7, 40, {2, 3}, 0.5);
  const auto path = (std::filesystem::temp_directory_path() / "subscan_csv_test.csv").string();
  save_csv(d, path, "y");
  const auto e = load_csv(path, "y");
  std::filesystem::remove(path);
  EXPECT_EQ(e.n_records(), d.n_records());
  EXPECT_EQ(e.n_positive(), d.n_positive());
}

}  // namespace
}  // namespace subscan
