#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

using namespace maschine;
using testutil::C;
using testutil::E;
using testutil::R;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("maschine_ingest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

} // namespace

TEST(LoadTriples, SingleLine) {
  Vocabulary v;
  std::istringstream in("a\tr\tb\n");
  const auto t = load_triples(in, v);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(v.entities.name(t[0].head), "a");
  EXPECT_EQ(v.relations.name(t[0].relation), "r");
  EXPECT_EQ(v.entities.name(t[0].tail), "b");
}

TEST(LoadTriples, DuplicatesRetainedInOrder) {
  Vocabulary v;
  std::istringstream in("a\tr\tb\nc\tr\ta\na\tr\tb\n");
  const auto t = load_triples(in, v);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], t[2]);
  EXPECT_EQ(v.entities.name(t[1].head), "c");
}

TEST(LoadTriples, EmptyInputIsValid) {
  Vocabulary v;
  std::istringstream in("");
  EXPECT_TRUE(load_triples(in, v).empty());
}

TEST(LoadTriples, MalformedLineNamesTheLine) {
  Vocabulary v;
  std::istringstream in("a\tr\tb\nbroken\tline\n");
  try {
    load_triples(in, v);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(LoadTriples, WhitespaceVariantAccepted) {
  Vocabulary v;
  std::istringstream in("a r  b\n");
  const auto t = load_triples(in, v);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(v.entities.name(t[0].tail), "b");
}

TEST(LoadTriples, SaveLoadRoundTrip) {
  Vocabulary v;
  std::istringstream in("a\tr\tb\nb\ts\tc\na\tr\tb\nc\tr\ta\n");
  const auto t = load_triples(in, v);
  std::ostringstream out;
  save_triples(out, t, v);
  Vocabulary v2;
  std::istringstream in2(out.str());
  const auto t2 = load_triples(in2, v2);
  EXPECT_EQ(t, t2);
  EXPECT_EQ(v.entities.names(), v2.entities.names());
  EXPECT_EQ(v.relations.names(), v2.relations.names());
}

TEST(LoadSchema, DomainAndRange) {
  Vocabulary v;
  std::istringstream in("headquarter\trdfs:domain\tOrganisation\nheadquarter\trdfs:range\tCity\n");
  const auto s = load_schema(in, v).schema;
  EXPECT_EQ(s.domains().size(), 1u);
  EXPECT_EQ(s.ranges().size(), 1u);
  const auto r = v.relations.at("headquarter");
  EXPECT_EQ(v.classes.name(*s.domain(r)), "Organisation");
  EXPECT_EQ(v.classes.name(*s.range(r)), "City");
}

TEST(LoadSchema, DuplicatesDeduplicated) {
  Vocabulary v;
  std::istringstream in("r\trdfs:domain\tA\nr\trdfs:domain\tA\nA\trdfs:subClassOf\tB\nA\trdfs:subClassOf\tB\n");
  const auto l = load_schema(in, v);
  EXPECT_EQ(l.duplicate_axioms, 2u);
  EXPECT_EQ(l.schema.subclass_edges().size(), 1u);
}

TEST(LoadSchema, SecondDistinctDomainIsError) {
  Vocabulary v;
  std::istringstream in("r\trdfs:domain\tA\nr\trdfs:domain\tB\n");
  EXPECT_THROW(load_schema(in, v), DataError);
}

TEST(LoadSchema, UnknownKeywordIsError) {
  Vocabulary v;
  std::istringstream in("r\towl:sameAs\tA\n");
  EXPECT_THROW(load_schema(in, v), DataError);
}

TEST(LoadSchema, TwoCycleIsErrorListingTheClasses) {
  Vocabulary v;
  std::istringstream in("A\trdfs:subClassOf\tB\nB\trdfs:subClassOf\tA\n");
  try {
    load_schema(in, v);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cycle"), std::string::npos);
    EXPECT_NE(msg.find("A"), std::string::npos);
    EXPECT_NE(msg.find("B"), std::string::npos);
  }
}

TEST(LoadSchema, TypesAccumulateAndUnknownEntitiesAreCounted) {
  Vocabulary v;
  v.entities.intern("paris");
  std::istringstream in("paris\trdf:type\tCity\nparis\trdf:type\tPlace\nnowhere\trdf:type\tCity\n");
  const auto l = load_schema(in, v);
  EXPECT_EQ(l.schema.types(v.entities.at("paris")).size(), 2u);
  EXPECT_EQ(l.unknown_type_rows, 1u);
  EXPECT_EQ(v.entities.size(), 1u);
}

TEST(LoadSchema, IriKeywords) {
  Vocabulary v;
  std::istringstream in("A\t<http://www.w3.org/2000/01/rdf-schema#subClassOf>\tB\n");
  EXPECT_EQ(load_schema(in, v).schema.subclass_edges().size(), 1u);
}

TEST(LoadLabels, UnknownRowsSkipped) {
  Vocabulary v;
  v.entities.intern("a");
  v.entities.intern("b");
  std::istringstream in("a\tx\nb\ty\nzzz\tx\n");
  const auto l = load_labels(in, v);
  EXPECT_EQ(l.labels.size(), 2u);
  EXPECT_EQ(l.skipped, 1u);
}

TEST(LoadLabels, AllUnknown) {
  Vocabulary v;
  std::istringstream in("p\tx\nq\ty\n");
  const auto l = load_labels(in, v);
  EXPECT_TRUE(l.labels.empty());
  EXPECT_EQ(l.skipped, 2u);
}

TEST(LoadLabels, DistinctLabelCountMatchesScan) {
  Vocabulary v;
  std::string text;
  std::set<std::string> distinct;
  for (int i = 0; i < 20; ++i) {
    const std::string name = "e" + std::to_string(i);
    v.entities.intern(name);
    const std::string label = i % 3 == 0 ? "positive" : "negative";
    distinct.insert(label);
    text += name + "\t" + label + "\n";
  }
  std::istringstream in(text);
  const auto l = load_labels(in, v);
  EXPECT_EQ(l.num_labels(), distinct.size());
  EXPECT_EQ(l.num_labels(), 2u);
}

TEST(LoadDataset, LayoutAndSchemaOnlyRelations) {
  const auto dir = scratch_dir("layout");
  write_file(dir / "train.txt", "a\tr\tb\nb\ts\tc\n");
  write_file(dir / "valid.txt", "c\tr\ta\n");
  write_file(dir / "test.txt", "a\ts\tc\n");
  write_file(dir / "schema.txt",
             "r\trdfs:domain\tX\nr\trdfs:range\tY\ns\trdfs:domain\tX\nghost\trdfs:range\tX\n"
             "a\trdf:type\tX\nnobody\trdf:type\tY\n");
  const auto b = load_dataset(dir);
  EXPECT_EQ(b.kg.num_triples(), 4u);
  EXPECT_EQ(b.kg.vocab.relations.size(), 2u);
  EXPECT_EQ(b.unknown_relation_rows, 1u);
  EXPECT_EQ(b.unknown_type_rows, 1u);
  ASSERT_EQ(b.schema_incomplete.size(), 1u);
  EXPECT_EQ(b.kg.vocab.relations.name(b.schema_incomplete[0]), "s");
  EXPECT_TRUE(b.has_schema);
}

TEST(LoadDataset, ReloadGivesIdenticalIds) {
  const auto dir = scratch_dir("reload");
  write_file(dir / "train.txt", "x\tr\ty\ny\tr\tz\n");
  write_file(dir / "valid.txt", "z\tr\tx\n");
  write_file(dir / "test.txt", "x\tr\tz\n");
  const auto a = load_dataset(dir);
  const auto b = load_dataset(dir);
  EXPECT_EQ(a.kg.vocab.entities.names(), b.kg.vocab.entities.names());
  EXPECT_EQ(a.kg.train, b.kg.train);
  EXPECT_FALSE(a.has_schema);
}

TEST(LoadDataset, MissingSplitIsError) {
  const auto dir = scratch_dir("missing");
  write_file(dir / "train.txt", "x\tr\ty\n");
  EXPECT_THROW(load_dataset(dir), DataError);
}

TEST(LoadDataset, OverlappingSplitsRejected) {
  const auto dir = scratch_dir("overlap");
  write_file(dir / "train.txt", "x\tr\ty\n");
  write_file(dir / "valid.txt", "x\tr\ty\n");
  write_file(dir / "test.txt", "");
  EXPECT_THROW(load_dataset(dir), DataError);
}
