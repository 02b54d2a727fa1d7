#include <doctest.h>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/types.hpp"
#include "support/actions.hpp"

using namespace ctrlroom;
using nlohmann::json;

TEST_CASE("actions survive a JSON round trip") {
    gen::Rng r(11);
    for (int i = 0; i < 500; ++i) {
        const Action a = gen::action(r);
        json j = a;
        const auto back = j.get<Action>();
        CHECK(back == a);
        CHECK(intent_of(back) == intent_of(a));
        validate(back);
    }
}

TEST_CASE("commands round trip with time and confidence") {
    const Command c{action::Swap{MonitorId{1}, MonitorId{9}}, Millis{1234}, 0.75};
    CHECK(json(c).get<Command>() == c);
}

TEST_CASE("swap and split operands are checked") {
    CHECK_THROWS_AS(validate(action::Swap{MonitorId{3}, MonitorId{3}}), InvalidInputError);
    CHECK_THROWS_AS(validate(action::SplitScreen{MonitorId{0}, MonitorId{3}}), InvalidInputError);
    CHECK_THROWS_AS(validate(action::ZoomIn{MonitorId{10}}), InvalidInputError);
    CHECK_THROWS_AS(validate(action::Rewind{0.0, std::nullopt}), InvalidInputError);
    CHECK_NOTHROW(validate(action::Forward{30.0, MonitorId{2}}));
}

TEST_CASE("swap is unordered, split is ordered") {
    CHECK(same_action(action::Swap{MonitorId{1}, MonitorId{9}}, action::Swap{MonitorId{9}, MonitorId{1}}));
    CHECK_FALSE(same_action(action::SplitScreen{MonitorId{1}, MonitorId{9}},
                            action::SplitScreen{MonitorId{9}, MonitorId{1}}));
    CHECK_FALSE(same_action(action::ZoomIn{MonitorId{1}}, action::ZoomOut{}));
}

TEST_CASE("intent names parse back") {
    for (auto i : kAllIntents) CHECK(parse_intent(to_string(i)) == i);
    CHECK_FALSE(parse_intent("dance").has_value());
    CHECK_THROWS(json("dance").get<Intent>());
}

TEST_CASE("describe names the action") {
    CHECK(describe(action::Swap{MonitorId{1}, MonitorId{9}}) == "Swap(1, 9)");
    CHECK(describe(action::ZoomOut{}) == "ZoomOut");
}
