#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "psa/corpus.hpp"
#include "psa/errors.hpp"

namespace psa {
namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "test");
}

ErrorKind kind_of(const std::string& text, std::optional<std::size_t>* line = nullptr) {
  try {
    parse(text);
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::Io;
}

Dataset synthetic(std::size_t n) {
  Dataset d;
  d.name = "synthetic";
  for (std::size_t i = 0; i < n; ++i) {
    d.reviews.push_back({"r" + std::to_string(i), "text " + std::to_string(i), {},
                         i % 3 == 0 ? Polarity::positive : Polarity::negative});
  }
  return d;
}

TEST(Corpus, LoadsRowsInFileOrder) {
  const auto d = parse("id\ttext\tlabel\nr1\tفیلم عالی بود\tpos\nr2\tفیلم بد بود\tneg\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.reviews[0].id, "r1");
  EXPECT_EQ(d.reviews[0].text, "فیلم عالی بود");
  EXPECT_EQ(d.reviews[0].label, Polarity::positive);
  EXPECT_EQ(d.reviews[1].id, "r2");
  EXPECT_EQ(d.reviews[1].label, Polarity::negative);
}

TEST(Corpus, BadLabelReportsLine) {
  std::optional<std::size_t> line;
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\tok\tpos\nr2\tbad\tpositiv\n", &line), ErrorKind::MalformedRow);
  EXPECT_EQ(line, 3u);
}

TEST(Corpus, HeaderOnlyIsEmpty) {
  EXPECT_EQ(kind_of("id\ttext\tlabel\n"), ErrorKind::EmptyDataset);
}

TEST(Corpus, MalformedRows) {
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\tonly two\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\ta\tpos\nr1\tb\tneg\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\n\ta\tpos\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\t   \tpos\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\ta\rb\tpos\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\t\xff\tpos\n"), ErrorKind::MalformedRow);
  EXPECT_EQ(kind_of("id\ttext\tlabel\nr1\ta\tb\tpos\n"), ErrorKind::MalformedRow);
}

TEST(Corpus, BadHeaderIsMalformed) {
  std::optional<std::size_t> line;
  EXPECT_EQ(kind_of("identifier\ttext\tlabel\nr1\ta\tpos\n", &line), ErrorKind::MalformedRow);
  EXPECT_EQ(line, 1u);
}

TEST(Corpus, AnnotatorFileAggregates) {
  const auto d = parse("id\ttext\ta1\ta2\ta3\nr1\tx\tpos\tpos\tneg\nr2\ty\tneg\tneg\tneg\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.reviews[0].label, Polarity::positive);
  EXPECT_EQ(d.reviews[0].annotator_labels.size(), 3u);
  EXPECT_EQ(d.reviews[1].label, Polarity::negative);
}

TEST(Corpus, AggregateLabels) {
  Review r{"r", "t", {Polarity::positive, Polarity::positive, Polarity::negative}, std::nullopt};
  const Review out = aggregate_labels(r);
  EXPECT_EQ(out.label, Polarity::positive);
  EXPECT_EQ(out.annotator_labels, r.annotator_labels);

  r.annotator_labels = {Polarity::negative, Polarity::negative, Polarity::negative};
  EXPECT_EQ(aggregate_labels(r).label, Polarity::negative);

  r.annotator_labels.clear();
  try {
    aggregate_labels(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingAnnotations);
  }
  r.annotator_labels = {Polarity::negative, Polarity::negative};
  EXPECT_THROW(aggregate_labels(r), Error);
}

TEST(Corpus, MajorityVoteIsTotal) {
  for (int mask = 0; mask < 8; ++mask) {
    std::array<Polarity, 3> votes{};
    int pos = 0;
    for (int b = 0; b < 3; ++b) {
      votes[b] = (mask >> b) & 1 ? Polarity::positive : Polarity::negative;
      pos += (mask >> b) & 1;
    }
    EXPECT_EQ(majority_vote(votes), pos >= 2 ? Polarity::positive : Polarity::negative) << mask;
  }
}

TEST(Corpus, SplitSizes) {
  const SplitSpec spec;
  const auto s1000 = split_sizes(1000, spec);
  EXPECT_EQ(s1000.train, 600u);
  EXPECT_EQ(s1000.test, 300u);
  EXPECT_EQ(s1000.valid, 100u);
  const auto s10 = split_sizes(10, spec);
  EXPECT_EQ(s10.train, 6u);
  EXPECT_EQ(s10.test, 3u);
  EXPECT_EQ(s10.valid, 1u);
}

TEST(Corpus, SplitPartitionsById) {
  for (std::size_t n : {10u, 11u, 37u, 100u, 1000u}) {
    const Dataset d = synthetic(n);
    for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
      SplitSpec spec;
      spec.seed = seed;
      const Split s = split(d, spec);
      EXPECT_EQ(s.train.size() + s.test.size() + s.valid.size(), n);
      std::multiset<std::string> ids;
      for (const auto* part : {&s.train, &s.test, &s.valid}) {
        for (const auto& r : part->reviews) ids.insert(r.id);
      }
      std::multiset<std::string> expected;
      for (const auto& r : d.reviews) expected.insert(r.id);
      EXPECT_EQ(ids, expected) << n << " " << seed;
    }
  }
}

TEST(Corpus, SplitIsDeterministic) {
  const Dataset d = synthetic(50);
  SplitSpec spec;
  spec.seed = 7;
  const Split a = split(d, spec);
  const Split b = split(d, spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.valid, b.valid);
  spec.seed = 8;
  EXPECT_NE(split(d, spec).train, a.train);
}

TEST(Corpus, SplitPreconditions) {
  EXPECT_THROW(split(synthetic(9), SplitSpec{}), Error);
  Dataset d = synthetic(10);
  d.reviews[4].label.reset();
  try {
    split(d, SplitSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnlabeledReview);
  }
  try {
    split(synthetic(9), SplitSpec{});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DatasetTooSmall);
  }
}

TEST(Corpus, SplitSpecValidation) {
  EXPECT_NO_THROW(SplitSpec{}.validate());
  EXPECT_THROW((SplitSpec{0.6, 0.3, 0.2, 0}.validate()), Error);
  EXPECT_THROW((SplitSpec{1.0, 0.0, 0.0, 0}.validate()), Error);
  EXPECT_THROW((SplitSpec{-0.1, 0.6, 0.5, 0}.validate()), Error);
  EXPECT_NO_THROW((SplitSpec{0.5, 0.25, 0.25, 0}.validate()));
}

TEST(Corpus, WriteThenParseRoundTrips) {
  const Dataset d = synthetic(12);
  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream in(out.str());
  Dataset back = parse_dataset(in, d.name);
  EXPECT_EQ(back, d);
}

}  // namespace
}  // namespace psa
