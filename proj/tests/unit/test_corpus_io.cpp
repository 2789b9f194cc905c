#include <gtest/gtest.h>

#include <random>

#include "trajnorm/corpus_io.hpp"
#include "trajnorm/text_io.hpp"

using namespace trajnorm;

TEST(Annotations, ParsesRecordsWithBomAndCrlf) {
  const std::string text =
      "\xEF\xBB\xBF"
      "frame,object_id,label,x_min,y_min,x_max,y_max\r\n"
      "0,3,1,10,20,30,40\r\n"
      "1,3,1,12,20,32,40\r\n";
  const auto recs = parse_annotations(text);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].frame_index, 1);
  EXPECT_EQ(recs[1].object_id, 3);
  EXPECT_EQ(recs[1].label, ClassLabel::car);
  EXPECT_EQ(recs[1].x_max, 32);
}

TEST(Annotations, ErrorsCarryLineNumbers) {
  const std::string text =
      "frame,object_id,label,x_min,y_min,x_max,y_max\n"
      "0,1,0,0,0,1,1\n"
      "1,1,7,0,0,1,1\n";
  try {
    parse_annotations(text);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Annotations, RejectsMissingHeaderEmptyBodyAndBadRows) {
  EXPECT_THROW(parse_annotations("0,1,0,0,0,1,1\n"), ParseError);
  EXPECT_THROW(parse_annotations("frame,object_id,label,x_min,y_min,x_max,y_max\n"), ParseError);
  EXPECT_THROW(parse_annotations("frame,object_id,label,x_min,y_min,x_max,y_max\n0,1,0,5,0,1,1\n"), ParseError);
  EXPECT_THROW(parse_annotations("frame,object_id,label,x_min,y_min,x_max,y_max\n0,1,0,0,0,1\n"), ParseError);
  EXPECT_THROW(parse_annotations("frame,object_id,label,x_min,y_min,x_max,y_max\n-1,1,0,0,0,1,1\n"), ParseError);
}

TEST(Annotations, FormatRoundTrip) {
  std::vector<BoundingBoxRecord> recs;
  for (int f = 0; f < 5; ++f) {
    recs.push_back({f, 2, ClassLabel::bike, 0.1 * f, 1.0 / 3.0, 0.1 * f + 4, 2.5});
  }
  const auto back = parse_annotations(format_annotations(recs));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].x_min, recs[i].x_min);
    EXPECT_EQ(back[i].y_min, recs[i].y_min);
    EXPECT_EQ(back[i].label, recs[i].label);
  }
}

TEST(CorpusFile, HeaderLayout) {
  const auto h = corpus_header();
  const auto cols = split(h, ',');
  ASSERT_EQ(cols.size(), 125u);
  EXPECT_EQ(cols[0], "label");
  EXPECT_EQ(cols[1], "x1");
  EXPECT_EQ(cols[4], "vy1");
  EXPECT_EQ(cols[124], "vy31");
}

TEST(CorpusFile, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1000, 1000);
  Corpus c(20, 125);
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    c(r, 0) = static_cast<double>(r % 3);
    for (Eigen::Index k = 1; k < 125; ++k) c(r, k) = u(rng);
  }
  const auto back = parse_corpus(format_corpus(c));
  EXPECT_TRUE(back.samples == c);
  EXPECT_TRUE(back.provenance.empty());

  std::vector<std::string> prov(20, "straight");
  prov[3] = "rotate";
  const auto with = parse_corpus(format_corpus(c, prov));
  EXPECT_TRUE(with.samples == c);
  EXPECT_EQ(with.provenance, prov);
}

TEST(CorpusFile, EmptyBodyIsAnEmptyCorpus) {
  const auto back = parse_corpus(corpus_header() + "\n");
  EXPECT_EQ(back.samples.rows(), 0);
}

TEST(CorpusFile, RejectsWrongWidth) {
  EXPECT_THROW(parse_corpus(corpus_header() + "\n0,1,2\n"), ParseError);
  EXPECT_THROW(parse_corpus("label,x1\n"), ParseError);
  EXPECT_THROW(format_corpus(Corpus::Zero(2, 10)), Error);
}
