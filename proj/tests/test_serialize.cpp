#include "support.hpp"

namespace fockstop {
namespace {

using testing::for_all;

TEST(SerializeProperty, StopTimesRoundTripExactly) {
    for_all(15, 61, [](Rng& rng, std::uint64_t seed) {
        const Model m(testing::ModelGen{3, false}(rng));
        const StopTime s = random_stoptime(m, seed, rng.uniform_int(1, m.n_bins()));
        const io::json j = io::to_json(s);
        const StopTime back = io::stoptime_from_json(io::json::parse(j.dump()));
        EXPECT_EQ(back.model().params(), m.params());
        ASSERT_EQ(back.masses().size(), s.masses().size());
        for (std::size_t i = 0; i < s.masses().size(); ++i) {
            EXPECT_EQ(back.masses()[i].bin, s.masses()[i].bin);
            EXPECT_EQ(back.masses()[i].projection.matrix(), s.masses()[i].projection.matrix());
        }
        EXPECT_EQ(io::to_json(back).dump(), j.dump());
    });
}

TEST(SerializeProperty, CocyclesRoundTripExactly) {
    for_all(10, 62, [](Rng& rng, std::uint64_t) {
        const Model m(testing::ModelGen{2, true}(rng));
        const Vector c = 0.5 * rng.unit_vector(m.mult());
        for (const Cocycle& v : {weyl_cocycle(m, c), vacuum_weyl_cocycle(m, c)}) {
            const io::json j = io::to_json(v);
            const Cocycle back = io::cocycle_from_json(io::json::parse(j.dump()));
            EXPECT_EQ(back.kind(), v.kind());
            EXPECT_EQ(back.p().matrix(), v.p().matrix());
            for (int k = 0; k <= m.n_bins(); ++k) EXPECT_EQ(back.at(k).matrix(), v.at(k).matrix());
        }
    });
}

TEST(Serialize, DocumentLayout) {
    const Model m({1.0, 1, 1, 1, 1});
    const io::json j = io::to_json(deterministic(m, 1));
    EXPECT_EQ(j.at("schema"), "fockstop-stoptime/1");
    EXPECT_EQ(j.at("params").at("n_bins"), 1);
    ASSERT_EQ(j.at("masses").size(), 1u);
    EXPECT_EQ(j.at("masses")[0].at("bin"), 1);
    // Row-major [re, im] pairs.
    EXPECT_EQ(j.at("masses")[0].at("matrix").dump(), "[[1.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]");
    const io::json c = io::to_json(weyl_cocycle(m, Vector::Zero(1)));
    EXPECT_EQ(c.at("schema"), "fockstop-cocycle/1");
    EXPECT_EQ(c.at("kind"), "weyl");
    EXPECT_EQ(c.at("entries").size(), 2u);
}

TEST(Serialize, RejectsBadDocuments) {
    const Model m({1.0, 2, 1, 1, 1});
    io::json j = io::to_json(first_arrival(m));
    io::json wrong_schema = j;
    wrong_schema["schema"] = "something-else/1";
    EXPECT_THROW(io::stoptime_from_json(wrong_schema), ConfigError);
    io::json truncated = j;
    truncated["masses"][0]["matrix"].erase(0);
    EXPECT_THROW(io::stoptime_from_json(truncated), DimensionError);
    io::json incomplete = j;
    incomplete["masses"].erase(1);
    EXPECT_THROW(io::stoptime_from_json(incomplete), ValidationError);
    io::json missing = j;
    missing.erase("masses");
    EXPECT_THROW(io::stoptime_from_json(missing), ConfigError);
    io::json huge = j;
    huge["params"]["n_bins"] = 40;
    EXPECT_THROW(io::stoptime_from_json(huge), ModelTooLarge);

    io::json c = io::to_json(weyl_cocycle(m, Vector::Constant(1, 0.2)));
    io::json gap = c;
    gap["entries"].erase(1);
    EXPECT_THROW(io::cocycle_from_json(gap), DimensionError);
    io::json far = c;
    far["entries"][0]["bin"] = 9;
    EXPECT_THROW(io::cocycle_from_json(far), HorizonError);
    EXPECT_THROW(io::cocycle_from_json(j), ConfigError);
}

}  // namespace
}  // namespace fockstop
