#include <gtest/gtest.h>

#include "checks.hpp"

namespace {

using namespace scenegen;

const Vocabulary& vocab() {
  static const Vocabulary v = checks::vocabulary();
  return v;
}

TEST(ObjectRef, ParsesAndPrints) {
  const auto r = ObjectRef::parse("night-stand-0");
  EXPECT_EQ(r.category, "night-stand");
  EXPECT_EQ(r.id, 0);
  EXPECT_FALSE(r.sub_object);
  const auto h = ObjectRef::parse("bed-1:head");
  EXPECT_EQ(h.category, "bed");
  EXPECT_EQ(h.id, 1);
  EXPECT_EQ(*h.sub_object, "head");
  EXPECT_EQ(h.str(), "bed-1:head");
  EXPECT_THROW(ObjectRef::parse("bed"), std::invalid_argument);
}

TEST(EnglishParser, ExampleDescriptionGivesFiveTriplets) {
  const Query q = parse_query(checks::kBedroomText, true, vocab());
  std::vector<std::string> got;
  for (const auto& t : q.triplets) got.push_back(t.str());
  EXPECT_EQ(got, checks::kBedroomTriplets);
  EXPECT_EQ(q.objects().size(), 6u);
}

TEST(Dsl, RenderParseRoundTrip) {
  const Query q = parse_query(checks::kBedroomText, true, vocab());
  const Query back = parse_query(render_dsl(q), false, vocab());
  EXPECT_EQ(back, q);
  EXPECT_EQ(render_dsl(back), render_dsl(q));
}

TEST(Dsl, CommentsAndBlankLinesAreIgnored) {
  const Query q = parse_query("# a comment\n\nlamp-0 on table-0  # trailing\n", false, vocab());
  ASSERT_EQ(q.triplets.size(), 1u);
  EXPECT_EQ(q.triplets[0].str(), "(lamp-0, table-0, on)");
}

TEST(Dsl, ErrorsCarryLineNumbers) {
  try {
    parse_query("lamp-0 on table-0\nlamp-0 hovering table-0\n", false, vocab());
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(parse_query("unicorn-0 on table-0\n", false, vocab()), std::exception);
  EXPECT_THROW(parse_query("lamp-0 on lamp-0\n", false, vocab()), ParseError);
  EXPECT_THROW(parse_query("count 0 lamp-0\n", false, vocab()), ParseError);
  EXPECT_THROW(parse_query("", false, vocab()), ParseError);
}

TEST(ExpandCounts, TargetGroupSplitsIntoInstances) {
  Query q = parse_query("count 2 pillow-0\npillow-0 on bed-0\n", false, vocab());
  const Query e = expand_counts(q);
  EXPECT_EQ(e.objects().size(), 3u);
  ASSERT_EQ(e.triplets.size(), 2u);
  EXPECT_EQ(e.triplets[0].target.str(), "pillow-0-0");
  EXPECT_EQ(e.triplets[1].target.str(), "pillow-0-1");
  EXPECT_TRUE(e.groups.empty());
}

TEST(ExpandCounts, ReferenceGroupBecomesVirtualObject) {
  Query q = parse_query("count 3 chair-0\ntable-0 near chair-0\n", false, vocab());
  const Query e = expand_counts(q);
  ASSERT_EQ(e.groups.size(), 1u);
  EXPECT_EQ(e.groups.begin()->second.size(), 3u);
  EXPECT_EQ(e.triplets.size(), 1u);
}

TEST(ExpandCounts, NoCountsIsIdentity) {
  const Query q = parse_query("lamp-0 on table-0\n", false, vocab());
  EXPECT_EQ(expand_counts(q), q);
}

TEST(Vocabulary, SynonymsResolveToCanonicalRelation) {
  const auto& d = vocab().relations;
  ASSERT_TRUE(d.canonical("on"));
  EXPECT_FALSE(d.canonical("hovering"));
}

}  // namespace
