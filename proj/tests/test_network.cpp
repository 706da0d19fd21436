#include <doctest.h>

#include "gridflex/network.hpp"
#include "test_util.hpp"

using namespace gridflex;

TEST_CASE("bundled 33-bus feeder loads cleanly") {
    const Network net = load_network(testutil::data_path("networks/feeder33.json"));
    CHECK(net.size() == 33);
    CHECK(net.branches.size() == 32);
    CHECK(net.slack() == 0);
    CHECK(net.base_mva == doctest::Approx(10.0));
    CHECK(net.storage.size() == 2);
    CHECK(net.pv.size() == 1);
    double load = 0.0;
    for (const Bus& b : net.buses) load += b.p_load;
    CHECK(load == doctest::Approx(0.3715).epsilon(1e-9));
}

TEST_CASE("json round trip preserves the network") {
    const Network net = testutil::three_bus();
    const Network back = network_from_json(network_to_json(net));
    CHECK(back.size() == net.size());
    CHECK(back.branches.size() == net.branches.size());
    CHECK(back.branches[1].r == doctest::Approx(net.branches[1].r));
    CHECK(back.storage[0].e_cap == doctest::Approx(net.storage[0].e_cap));
    CHECK(back.pv[0].p_max == doctest::Approx(net.pv[0].p_max));
    CHECK(back.buses[1].q_load == doctest::Approx(net.buses[1].q_load));
}

TEST_CASE("non-contiguous external ids map to positions") {
    const std::string doc = R"({
        "base_mva": 1.0,
        "buses": [
            {"id": 10, "kind": "slack"},
            {"id": 20, "kind": "pq", "p_load": 0.1},
            {"id": 30, "kind": "pq", "p_load": 0.1}
        ],
        "branches": [
            {"from": 10, "to": 20, "r": 0.01, "x": 0.02},
            {"from": 20, "to": 30, "r": 0.01, "x": 0.02}
        ]
    })";
    const Network net = network_from_json(doc);
    CHECK(net.index_of(30) == 2);
    CHECK(net.id_of(0) == 10);
    CHECK(net.branches[1].from == 1);
}

TEST_CASE("validation rejects broken inputs") {
    Network net = testutil::three_bus();
    SUBCASE("second slack") {
        net.buses[2].kind = BusKind::Slack;
        CHECK_THROWS_WITH_AS(validate_network(net), "multiple slack buses", Error);
    }
    SUBCASE("zero reactance") {
        net.branches[0].x = 0.0;
        CHECK_THROWS_AS(validate_network(net), Error);
    }
    SUBCASE("disconnected bus") {
        net.branches.pop_back();
        CHECK_THROWS_WITH_AS(validate_network(net), "disconnected graph", Error);
    }
    SUBCASE("storage bus out of range") {
        net.storage[0].bus = 9;
        CHECK_THROWS_AS(validate_network(net), Error);
    }
    SUBCASE("soc outside unit range") {
        net.storage[0].soc_init = 1.2;
        CHECK_THROWS_AS(validate_network(net), Error);
    }
}

TEST_CASE("campus generator is deterministic and well formed") {
    const Network a = generate_campus_like(5);
    const Network b = generate_campus_like(5);
    CHECK(network_to_json(a) == network_to_json(b));
    CHECK(network_to_json(a) != network_to_json(generate_campus_like(6)));

    CHECK(a.size() == 40);
    CHECK(a.branches.size() == 39);  // radial: n-1 edges, validated connected
    CHECK(a.storage.size() == 3);
    CHECK(a.pv.size() == 39);
    double load = 0.0;
    for (const Bus& bus : a.buses) load += bus.p_load;
    CHECK(load == doctest::Approx(0.85).epsilon(1e-9));
    for (const Branch& br : a.branches) CHECK(br.from < br.to);  // parents precede children
}

TEST_CASE("campus storage sits behind the strongest branches") {
    const Network net = generate_campus_like(1);
    // subtree load served through the branch feeding each bus
    std::vector<double> subtree(net.size(), 0.0);
    for (std::size_t i = 1; i < net.size(); ++i) subtree[i] = net.buses[i].p_load;
    for (std::size_t i = net.size() - 1; i >= 1; --i)
        subtree[net.branches[i - 1].from] += subtree[i];
    for (const StorageUnit& s : net.storage) CHECK(subtree[s.bus] > 0.15);
}
