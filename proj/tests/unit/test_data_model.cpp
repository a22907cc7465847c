#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "contentcf/rating_matrix.hpp"
#include "contentcf/types.hpp"

using namespace contentcf;

namespace {

Rating r(std::uint32_t u, std::uint32_t i, int v) { return {UserId{u}, ItemId{i}, static_cast<std::uint8_t>(v), 0}; }

}  // namespace

TEST(RatingMatrix, BuildsMeansAndRaters) {
    std::vector<Rating> ratings{r(1, 10, 4), r(1, 20, 2), r(2, 10, 5)};
    auto m = RatingMatrix::build(ratings);
    EXPECT_EQ(m.rating_count(), 3u);
    EXPECT_EQ(m.user_count(), 2u);
    EXPECT_EQ(m.item_count(), 2u);
    EXPECT_DOUBLE_EQ(m.user_mean(UserId{1}), 3.0);
    EXPECT_DOUBLE_EQ(m.user_mean(UserId{2}), 5.0);
    EXPECT_EQ(m.item_raters(ItemId{10}), (std::vector<UserId>{UserId{1}, UserId{2}}));
    EXPECT_EQ(m.item_raters(ItemId{20}), (std::vector<UserId>{UserId{1}}));
    EXPECT_TRUE(m.item_raters(ItemId{99}).empty());
}

TEST(RatingMatrix, RowsAndColumnsAreSorted) {
    std::vector<Rating> ratings{r(3, 30, 1), r(1, 20, 2), r(3, 10, 5), r(2, 30, 4), r(1, 10, 3)};
    auto m = RatingMatrix::build(ratings);
    auto u3 = *m.find_user(UserId{3});
    auto row = m.user_ratings(u3);
    ASSERT_EQ(row.size(), 2u);
    EXPECT_EQ(m.item_id(row[0].item), ItemId{10});
    EXPECT_EQ(m.item_id(row[1].item), ItemId{30});
    auto col = m.item_ratings(*m.find_item(ItemId{30}));
    ASSERT_EQ(col.size(), 2u);
    EXPECT_EQ(m.user_id(col[0].user), UserId{2});
    EXPECT_EQ(m.user_id(col[1].user), UserId{3});
    EXPECT_EQ(m.rating(UserId{2}, ItemId{30}), 4);
    EXPECT_FALSE(m.rating(UserId{2}, ItemId{10}).has_value());
    EXPECT_FALSE(m.rating(UserId{9}, ItemId{10}).has_value());
}

TEST(RatingMatrix, RejectsDuplicates) {
    std::vector<Rating> ratings{r(1, 10, 4), r(1, 10, 2)};
    try {
        RatingMatrix::build(ratings);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("user 1"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("item 10"), std::string::npos);
    }
}

TEST(RatingMatrix, RejectsEmptyAndOutOfRange) {
    EXPECT_THROW(RatingMatrix::build({}), Error);
    std::vector<Rating> bad{r(1, 10, 6)};
    EXPECT_THROW(RatingMatrix::build(bad), Error);
    std::vector<Rating> zero{r(1, 10, 0)};
    EXPECT_THROW(RatingMatrix::build(zero), Error);
}

TEST(RatingMatrix, UnknownUserMeanThrows) {
    std::vector<Rating> ratings{r(1, 10, 4)};
    auto m = RatingMatrix::build(ratings);
    EXPECT_THROW(m.user_mean(UserId{2}), Error);
}

TEST(Types, IdsPrintAndCompare) {
    std::ostringstream os;
    os << UserId{7} << ", " << ItemId{8};
    EXPECT_EQ(os.str(), "user 7, item 8");
    EXPECT_LT(UserId{1}, UserId{2});
    EXPECT_EQ(std::hash<ItemId>{}(ItemId{5}), std::hash<std::uint32_t>{}(5));
}

TEST(Types, ProfileSourceRoundTrip) {
    for (auto s : {ProfileSource::dataset, ProfileSource::linked_data, ProfileSource::override_file})
        EXPECT_EQ(profile_source_from_string(to_string(s)), s);
    EXPECT_THROW(profile_source_from_string("elsewhere"), Error);
}

TEST(Types, ParseErrorCarriesLine) {
    ParseError e("bad field", 12);
    EXPECT_EQ(e.line(), 12u);
    EXPECT_STREQ(e.what(), "bad field (line 12)");
}

TEST(Types, FeatureCount) {
    MovieProfile p;
    p.genres = {"Action", "Drama"};
    p.directors = {"D"};
    p.actors = {"A", "B"};
    EXPECT_EQ(p.feature_count(), 5u);
}
