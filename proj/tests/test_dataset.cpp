#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "drrules/dataset.hpp"

using namespace drrules;

namespace {

RawTable table_from(const std::string& csv, const Schema& schema) {
  std::istringstream in(csv);
  return load_csv_stream(in, schema, "test.csv");
}

Schema label_y_schema() {
  Schema s;
  s.label_column = "y";
  return s;
}

// Small direct-construction helper for split tests.
BinaryDataset tiny_dataset(std::size_t n, std::size_t d) {
  BinaryDataset ds;
  ds.n = n;
  ds.d = d;
  ds.x.resize(n * d);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.y[i] = static_cast<std::uint8_t>(i % 2);
    for (std::size_t j = 0; j < d; ++j) ds.x[i * d + j] = (i >> j) & 1u;
  }
  for (std::size_t j = 0; j < d; ++j)
    ds.feature_meta.push_back({"b" + std::to_string(j), BinOp::EqCat, 0, "1"});
  return ds;
}

}  // namespace

TEST_CASE("decile binarization of 1..10 yields 9 threshold pairs") {
  std::string csv = "v,y\n";
  for (int i = 1; i <= 10; ++i) csv += std::to_string(i) + "," + std::to_string(i % 2) + "\n";
  RawTable t = table_from(csv, label_y_schema());
  BinaryDataset ds = binarize(t, 10);
  CHECK(ds.n == 10);
  CHECK(ds.d == 18);  // thresholds 1..9, two columns each

  // Pairs are (<=t, >t) and XOR to 1 on every non-null row.
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j + 1 < ds.d; j += 2) {
      CHECK(int(ds.at(i, j)) + int(ds.at(i, j + 1)) == 1);
    }
  }
  CHECK(ds.feature_meta[0].display_name() == "v<=1");
  CHECK(ds.feature_meta[17].display_name() == "v>9");
}

TEST_CASE("categorical column yields one eq/ne pair per category") {
  Schema s = label_y_schema();
  s.kinds["c"] = ColumnKind::Categorical;
  RawTable t = table_from("c,y\nred,0\nblue,1\nred,1\n", s);
  BinaryDataset ds = binarize(t, 10);
  CHECK(ds.d == 4);
  // Categories sort as {blue, red}.
  CHECK(ds.feature_meta[0].display_name() == "c==blue");
  CHECK(ds.feature_meta[1].display_name() == "c!=blue");
  CHECK(ds.feature_meta[2].display_name() == "c==red");
  CHECK(ds.feature_meta[3].display_name() == "c!=red");
  CHECK(ds.at(0, 2) == 1);  // row 0 is red
  CHECK(ds.at(1, 0) == 1);  // row 1 is blue
  CHECK(ds.at(0, 0) == 0);
  CHECK(ds.at(0, 1) == 1);
}

TEST_CASE("binary column passes through with a negation column") {
  Schema s = label_y_schema();
  s.kinds["b"] = ColumnKind::Binary;
  RawTable t = table_from("b,y\n0,0\n1,1\n1,0\n", s);
  BinaryDataset ds = binarize(t, 10);
  CHECK(ds.d == 2);
  CHECK(ds.at(0, 0) == 0);
  CHECK(ds.at(0, 1) == 1);
  CHECK(ds.at(1, 0) == 1);
  CHECK(ds.at(1, 1) == 0);
  CHECK_THROWS_WITH_AS(
      binarize(table_from("b,y\n2,0\n1,1\n", s), 10),
      doctest::Contains("binary column"), std::runtime_error);
}

TEST_CASE("constant numeric column produces no features") {
  RawTable t = table_from("v,w,y\n5,1,0\n5,2,1\n5,3,0\n5,4,1\n", label_y_schema());
  BinaryDataset ds = binarize(t, 10);
  for (const FeatureMeta& m : ds.feature_meta) CHECK(m.source != "v");
  CHECK(ds.d > 0);  // w still binarizes
}

TEST_CASE("binarize on a 0/1 numeric column reduces to identity plus negation") {
  RawTable t = table_from("v,y\n0,0\n1,1\n1,1\n0,0\n", label_y_schema());
  BinaryDataset ds = binarize(t, 10);
  CHECK(ds.d == 2);  // single threshold at 0
  for (std::size_t i = 0; i < ds.n; ++i) {
    CHECK(int(ds.at(i, 1)) == int(ds.y[i]));  // v>0 equals the source bit
    CHECK(int(ds.at(i, 0)) == 1 - int(ds.y[i]));
  }
}

TEST_CASE("missing cells zero both pair columns and raise the null indicator") {
  Schema s = label_y_schema();
  s.missing_values = {"?"};
  RawTable t = table_from("v,y\n1,0\n2,1\n?,1\n3,0\n", s);
  BinaryDataset ds = binarize(t, 4);
  REQUIRE(ds.feature_meta.back().op == BinOp::IsNull);
  const std::size_t null_col = ds.d - 1;
  CHECK(ds.at(2, null_col) == 1);
  CHECK(ds.at(0, null_col) == 0);
  for (std::size_t j = 0; j < null_col; ++j) CHECK(ds.at(2, j) == 0);
}

TEST_CASE("split sizes, determinism, and partition property") {
  BinaryDataset ds = tiny_dataset(10, 4);
  auto parts = split(ds, 0.7, 42);
  CHECK(parts.first.n == 7);
  CHECK(parts.second.n == 3);
  CHECK(parts.first.d == ds.d);

  auto parts2 = split(ds, 0.7, 42);
  CHECK(parts.first.x == parts2.first.x);
  CHECK(parts.second.y == parts2.second.y);

  auto parts3 = split(ds, 0.7, 43);
  CHECK(parts.first.x != parts3.first.x);  // different seed, different shuffle

  // Union of the parts is the original multiset of rows.
  auto row_key = [&](const BinaryDataset& p, std::size_t i) {
    std::string k(reinterpret_cast<const char*>(p.row(i)), p.d);
    k.push_back(static_cast<char>('0' + p.y[i]));
    return k;
  };
  std::vector<std::string> got, want;
  for (std::size_t i = 0; i < parts.first.n; ++i) got.push_back(row_key(parts.first, i));
  for (std::size_t i = 0; i < parts.second.n; ++i) got.push_back(row_key(parts.second, i));
  for (std::size_t i = 0; i < ds.n; ++i) want.push_back(row_key(ds, i));
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  CHECK(got == want);
}

TEST_CASE("split rejects degenerate inputs") {
  CHECK_THROWS_AS(split(tiny_dataset(1, 2), 0.7, 1), std::runtime_error);
  CHECK_THROWS_AS(split(tiny_dataset(4, 2), 0.0, 1), std::runtime_error);
  CHECK_THROWS_AS(split(tiny_dataset(4, 2), 1.0, 1), std::runtime_error);
  // Extreme fractions still leave at least one row on each side.
  auto parts = split(tiny_dataset(4, 2), 0.01, 1);
  CHECK(parts.first.n == 1);
  CHECK(parts.second.n == 3);
}

TEST_CASE("quoted fields, embedded commas and doubled quotes parse") {
  Schema s;
  s.label_column = "the label";
  s.kinds["name"] = ColumnKind::Categorical;
  RawTable t = table_from(
      "name,\"the label\"\n"
      "\"smith, john\",1\n"
      "\"say \"\"hi\"\"\",0\n",
      s);
  REQUIRE(t.n_rows() == 2);
  CHECK(t.cells[0][0] == "smith, john");
  CHECK(t.cells[1][0] == "say \"hi\"");
  CHECK(t.y[0] == 1);
  CHECK(t.y[1] == 0);
}

TEST_CASE("headerless files use schema names; an echoed header row is skipped") {
  Schema s;
  s.column_names = {"a", "b", "y"};
  s.label_column = "y";
  RawTable no_header = table_from("1,2,0\n3,4,1\n", s);
  CHECK(no_header.n_rows() == 2);
  RawTable with_header = table_from("a,b,y\n1,2,0\n3,4,1\n", s);
  CHECK(with_header.n_rows() == 2);
  CHECK(no_header.cells == with_header.cells);
}

TEST_CASE("label handling: maps, thresholds, and errors") {
  Schema s = label_y_schema();
  CHECK_THROWS_WITH_AS(table_from("v,y\n1,maybe\n", s), doctest::Contains("unknown label"),
                       std::runtime_error);

  Schema mapped = label_y_schema();
  mapped.label_map = {{"Bad", "1"}, {"Good", "0"}};
  RawTable t = table_from("v,y\n1,Bad\n2,Good\n", mapped);
  CHECK(t.y == std::vector<std::uint8_t>{1, 0});
  CHECK_THROWS_AS(table_from("v,y\n1,Ugly\n", mapped), std::runtime_error);

  Schema thresh = label_y_schema();
  thresh.label_positive_threshold = 2.0;
  RawTable t2 = table_from("v,y\n1,2\n2,2.5\n3,0\n", thresh);
  CHECK(t2.y == std::vector<std::uint8_t>{0, 1, 0});

  Schema wrong = label_y_schema();
  wrong.label_column = "absent";
  CHECK_THROWS_WITH_AS(table_from("v,y\n1,0\n", wrong), doctest::Contains("not found"),
                       std::runtime_error);
}

TEST_CASE("special value policies: drops, replacement, null marking") {
  SpecialValuePolicy pol;
  pol.rules.push_back({"-9", SpecialValuePolicy::Action::DropRowIfAll, "", {}});
  pol.rules.push_back({"-7", SpecialValuePolicy::Action::ReplaceWithMaxPlus1, "", {}});
  pol.rules.push_back({"-8", SpecialValuePolicy::Action::NullCategory, "", {}});

  RawTable t = table_from(
      "a,b,y\n"
      "-9,-9,0\n"  // all-sentinel row: dropped
      "1,-7,1\n"   // -7 -> column-b max of valid values {2,3} plus 1 = 4
      "5,2,0\n"
      "-8,3,1\n",  // -8 -> missing
      label_y_schema());
  RawTable out = apply_special_values(t, pol);
  REQUIRE(out.n_rows() == 3);
  CHECK(out.cells[0][1] == "4");
  CHECK(out.cells[2][0].empty());

  SpecialValuePolicy match;
  match.rules.push_back({"?", SpecialValuePolicy::Action::DropRowIfMatch, "", {"a"}});
  Schema s = label_y_schema();
  s.kinds["a"] = ColumnKind::Categorical;
  s.kinds["b"] = ColumnKind::Categorical;
  RawTable t2 = table_from("a,b,y\n?,1,0\n1,?,1\n2,2,0\n", s);
  RawTable out2 = apply_special_values(t2, match);
  REQUIRE(out2.n_rows() == 2);  // only the row with '?' in column a dropped
  CHECK(out2.cells[0][1] == "?");
}

TEST_CASE("empirical pmf is uniform and validates") {
  Pmf p = empirical_pmf(4);
  REQUIRE(p.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(p[i] == doctest::Approx(0.25));
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(empirical_pmf(0), std::runtime_error);

  Pmf bad;
  bad.p = {0.5, 0.4};  // sums to 0.9
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
  bad.p = {1.5, -0.5};
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("export round-trips through the loader") {
  RawTable t = table_from("v,y\n1,0\n2,1\n3,0\n4,1\n", label_y_schema());
  BinaryDataset ds = binarize(t, 4);
  std::ostringstream out;
  export_csv(ds, out);

  Schema s;
  s.label_column = "label";
  for (std::size_t j = 0; j < ds.d; ++j) s.kinds[ds.feature_meta[j].display_name()] = ColumnKind::Binary;
  RawTable back = table_from(out.str(), s);
  BinaryDataset ds2 = binarize(back, 2);
  CHECK(ds2.n == ds.n);
  CHECK(ds2.y == ds.y);
}

TEST_CASE("fingerprint tracks content") {
  BinaryDataset a = tiny_dataset(6, 3);
  BinaryDataset b = tiny_dataset(6, 3);
  CHECK(a.fingerprint() == b.fingerprint());
  b.y[0] ^= 1;
  CHECK(a.fingerprint() != b.fingerprint());
  BinaryDataset c = tiny_dataset(7, 3);
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("empty and malformed inputs error with context") {
  CHECK_THROWS_WITH_AS(table_from("", label_y_schema()), doctest::Contains("empty"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(table_from("v,y\n\"unterminated,0\n", label_y_schema()),
                       doctest::Contains("unterminated"), std::runtime_error);
  // Wrong field count mentions the row.
  CHECK_THROWS_AS(table_from("v,y\n1,2,3\n", label_y_schema()), std::runtime_error);
}
