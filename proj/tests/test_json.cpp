#include <catch2/catch_amalgamated.hpp>

#include <chainbound/chainbound.hpp>
#include <chainbound/json_io.hpp>

#include "support.hpp"

#include <cstdint>
#include <string>
#include <vector>

using namespace chainbound;
using testsupport::star3;

TEST_CASE("scalar serialisation") {
  SECTION("exact values round-trip losslessly") {
    auto rng = make_stream(20260822, 50);
    for (int trial = 0; trial < 60; ++trial) {
      const Rational v = testsupport::rat(rng, -50, 50, 97);
      CHECK(scalar_from_json<Rational>(scalar_to_json(v)) == v);
    }
  }
  SECTION("integers become JSON numbers, fractions become strings") {
    CHECK(scalar_to_json(Rational(12)) == json(12));
    CHECK(scalar_to_json(Rational(-3)) == json(-3));
    CHECK(scalar_to_json(Rational(1, 3)) == json("1/3"));
    CHECK(scalar_to_json(Rational(-61, 10)) == json("-61/10"));
  }
  SECTION("integers too wide for doubles survive as strings") {
    Rational big(1);
    for (int i = 0; i < 80; ++i) big *= 2;
    big += 1;  // 2^80 + 1 is not representable in double or int64
    const json j = scalar_to_json(big);
    CHECK(j.is_string());
    CHECK(scalar_from_json<Rational>(j) == big);
  }
  SECTION("floats parse to their exact binary value") {
    CHECK(scalar_from_json<Rational>(json(0.5)) == Rational(1, 2));
    CHECK(scalar_from_json<Rational>(json(0.375)) == Rational(3, 8));
  }
  SECTION("the float lane accepts fraction strings") {
    CHECK(scalar_from_json<double>(json("3/4")) == 0.75);
    CHECK(scalar_from_json<double>(json(2)) == 2.0);
    CHECK(scalar_from_json<double>(json(1.25)) == 1.25);
  }
  SECTION("garbage is rejected") {
    CHECK_THROWS_AS(scalar_from_json<Rational>(json("abc")), io_error);
    CHECK_THROWS_AS(scalar_from_json<Rational>(json("1/0")), io_error);
    CHECK_THROWS_AS(scalar_from_json<Rational>(json()), io_error);
    CHECK_THROWS_AS(scalar_from_json<Rational>(json::array()), io_error);
    CHECK_THROWS_AS(scalar_from_json<double>(json::object()), io_error);
  }
}

TEST_CASE("problem wire format") {
  const auto fx = star3<Rational>();
  SECTION("round-trip") {
    const json j = problem_to_json(fx.problem);
    const auto back = problem_from_json<Rational>(j);
    CHECK(back.num_qubits == fx.problem.num_qubits);
    CHECK(back.fields == fx.problem.fields);
    REQUIRE(back.couplers.size() == fx.problem.couplers.size());
    for (std::size_t k = 0; k < back.couplers.size(); ++k) {
      CHECK(back.couplers[k].i == fx.problem.couplers[k].i);
      CHECK(back.couplers[k].j == fx.problem.couplers[k].j);
      CHECK(back.couplers[k].value == fx.problem.couplers[k].value);
    }
  }
  SECTION("fraction strings accepted on input") {
    const json j = {{"num_qubits", 2},
                    {"h", {"1/2", 0}},
                    {"couplers", json::array({json::array({0, 1, "-5/3"})})}};
    const auto p = problem_from_json<Rational>(j);
    CHECK(p.fields[0] == Rational(1, 2));
    CHECK(p.couplers[0].value == Rational(-5, 3));
  }
  SECTION("malformed documents fail as input errors") {
    CHECK_THROWS_AS(problem_from_json<Rational>(json::object()), io_error);
    CHECK_THROWS_AS(problem_from_json<Rational>(json{{"num_qubits", 2},
                                                     {"h", {1}},
                                                     {"couplers", json::array()}}),
                    io_error);
    CHECK_THROWS_AS(
        problem_from_json<Rational>(json{{"num_qubits", 1},
                                         {"h", {0}},
                                         {"couplers", json::array({json::array({0, 0})})}}),
        io_error);
  }
  SECTION("structurally valid but inconsistent content fails validation") {
    const json dup = {{"num_qubits", 2},
                      {"h", {0, 0}},
                      {"couplers", json::array({json::array({0, 1, 1}), json::array({1, 0, 2})})}};
    CHECK_THROWS_AS(problem_from_json<Rational>(dup), validation_error);
  }
}

TEST_CASE("hardware and embedding wire formats") {
  const auto fx = star3<Rational>();
  SECTION("hardware round-trip") {
    const json j = hardware_to_json(fx.hw);
    const auto back = hardware_from_json(j);
    CHECK(back.num_nodes == fx.hw.num_nodes);
    CHECK(back.edges == fx.hw.edges);
    CHECK_THROWS_AS(hardware_from_json(json{{"edges", json::array()}}), io_error);
  }
  SECTION("embedding round-trip") {
    const json j = embedding_to_json(fx.emb);
    const auto back = embedding_from_json(j);
    CHECK(back.chains == fx.emb.chains);
    REQUIRE(back.edge_map.size() == fx.emb.edge_map.size());
    for (std::size_t k = 0; k < back.edge_map.size(); ++k) {
      CHECK(back.edge_map[k].i == fx.emb.edge_map[k].i);
      CHECK(back.edge_map[k].j == fx.emb.edge_map[k].j);
      CHECK(back.edge_map[k].tau_ij == fx.emb.edge_map[k].tau_ij);
      CHECK(back.edge_map[k].tau_ji == fx.emb.edge_map[k].tau_ji);
    }
    CHECK_THROWS_AS(embedding_from_json(json{{"chains", json::array()}}), io_error);
    CHECK_THROWS_AS(
        embedding_from_json(json{{"chains", json::array()},
                                 {"edge_map", json::array({json::array({0, 1, 2})})}}),
        io_error);
  }
  SECTION("spin configurations") {
    SpinConfig c;
    c.spins = {1, -1, -1, 1};
    CHECK(config_from_json(config_to_json(c)).spins == c.spins);
    CHECK_THROWS_AS(config_from_json(json::array({1, 0})), io_error);
    CHECK_THROWS_AS(config_from_json(json::array({2})), io_error);
    CHECK_THROWS_AS(config_from_json(json::object()), io_error);
  }
}

TEST_CASE("bound report serialisation") {
  const auto fx = star3<Rational>();
  const auto ctx = fx.context();
  const auto dist = make_choi2_distribution(ctx);
  const auto reports = chain_bound_report(ctx, dist, /*with_optimized=*/true);
  const json j = bound_report_to_json(reports);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 4);

  const json& first = j[0];
  CHECK(first.at("qubit") == 0);
  CHECK(first.at("C") == 12);
  CHECK(first.at("locally_determinable") == false);
  CHECK(first.at("choi1") == 18);
  CHECK(first.at("choi2") == 8);
  CHECK(first.at("leaves") == 3);
  CHECK(first.at("fell_back") == false);
  CHECK(first.at("tight") == 6);
  CHECK(first.at("certified") == true);
  CHECK(first.at("witness").at("subset") == json::array({0, 1, 2}));
  CHECK(first.at("witness").at("boundary") == 1);
  CHECK(first.at("optimized").at("bound") == 5);
  CHECK(first.at("optimized").at("h_dist") == json::array({3, 0, 0, 0}));

  const json& second = j[1];
  CHECK(second.at("tight") == 0);
  CHECK(second.at("witness").is_null());

  // Without the optimizer pass the key is absent entirely.
  const json plain = bound_report_to_json(chain_bound_report(ctx, dist));
  CHECK_FALSE(plain[0].contains("optimized"));
}

TEST_CASE("distribution serialisation") {
  const auto fx = star3<Rational>();
  const auto ctx = fx.context();
  const auto dist = make_choi2_distribution(ctx);
  const json j = distribution_to_json(dist);
  CHECK(j.at("strategy") == "choi2");
  CHECK(j.at("values")[0] == json::array({0, 1, 1, 1}));
  CHECK(j.at("values")[1] == json::array({0}));
  CHECK(j.at("fell_back") == json::array({false, false, false, false}));

  const auto values = distribution_values_from_json<Rational>(j.at("values"));
  REQUIRE(values.size() == 4);
  CHECK(values[0] == std::vector<Rational>{0, 1, 1, 1});
  const auto custom = make_custom_distribution(ctx, values);
  CHECK(custom.values == dist.values);
  CHECK_THROWS_AS(distribution_values_from_json<Rational>(json::object()), io_error);
}

TEST_CASE("admissibility, verification and probe serialisation") {
  const auto fx = star3<Rational>();
  const auto ctx = fx.context();
  const auto dist = make_choi2_distribution(ctx);

  SECTION("admissibility violations") {
    const auto single = make_single_node_distribution(ctx);
    const auto rep = check_admissible(ctx, single, std::vector<Rational>(4, Rational(1, 2)));
    const json j = admissibility_to_json(rep);
    CHECK(j.at("admissible") == false);
    REQUIRE(j.at("violations").size() == 1);
    CHECK(j.at("violations")[0].at("qubit") == 0);
    CHECK(j.at("violations")[0].at("subset") == json::array({0}));
    CHECK(j.at("violations")[0].at("slack") == "-3/2");
  }
  SECTION("verification result") {
    const auto res = verify_no_domain_wall(ctx, dist, std::vector<Rational>(4, Rational(61, 10)));
    const json j = verify_to_json(res);
    CHECK(j.at("passed") == true);
    CHECK(j.at("energy_equal") == true);
    CHECK(j.at("logical_min") == -18);
    CHECK(j.at("walls") == json::array());
    CHECK(j.at("ground_states").get<std::size_t>() == res.ground_state_count);
  }
  SECTION("probe outcomes") {
    const auto tb = tight_bound(ctx, dist, 0);
    REQUIRE(tb.witness.has_value());
    const auto hit = probe_tightness(ctx, dist, 0, *tb.witness, Rational(1, 100));
    const json jh = probe_to_json(hit);
    CHECK(jh.at("found") == true);
    CHECK(jh.at("strength") == "599/100");
    CHECK(jh.at("assignment").size() == 3);
    CHECK(jh.at("chain_config").size() == 4);

    const auto miss = probe_at_strength(ctx, dist, 0, Rational(18));
    const json jm = probe_to_json(miss);
    CHECK(jm.at("found") == false);
    CHECK_FALSE(jm.contains("assignment"));
    CHECK_FALSE(jm.contains("chain_config"));
  }
}

TEST_CASE("job-shop wire formats") {
  SECTION("instance parsing with defaults") {
    const json j = {{"machines", {{0, 0}}}, {"durations", {{1, 1}}}, {"timespan", 2}};
    const auto inst = jsp_from_json<Rational>(j);
    CHECK(inst.jobs() == 1);
    CHECK(inst.ops_per_job() == 2);
    CHECK(inst.timespan == 2);
    CHECK(inst.energy_scale == 1);
  }
  SECTION("explicit fractional energy scale") {
    const json j = {{"machines", {{0}}},
                    {"durations", {{1}}},
                    {"timespan", 1},
                    {"energy_scale", "3/2"}};
    CHECK(jsp_from_json<Rational>(j).energy_scale == Rational(3, 2));
  }
  SECTION("malformed instances") {
    CHECK_THROWS_AS(jsp_from_json<Rational>(json::object()), io_error);
    CHECK_THROWS_AS(jsp_from_json<Rational>(json{{"machines", 3},
                                                 {"durations", {{1}}},
                                                 {"timespan", 1}}),
                    io_error);
    const json bad_span = {{"machines", {{0}}}, {"durations", {{1}}}, {"timespan", 0}};
    CHECK_THROWS_AS(jsp_from_json<Rational>(bad_span), validation_error);
  }
  SECTION("schedule and violation output") {
    JspSchedule sched;
    sched.starts = {{0, 1}};
    sched.makespan = 2;
    const json js = schedule_to_json(sched);
    CHECK(js.at("starts") == json::array({json::array({0, 1})}));
    CHECK(js.at("makespan") == 2);

    JspInstance<Rational> inst;
    inst.machine = {{0}, {0}};
    inst.duration = {{2}, {2}};
    inst.timespan = 3;
    const auto enc = encode(inst);
    SpinConfig cfg;
    cfg.spins.assign(static_cast<std::size_t>(enc.num_vars), std::int8_t{-1});
    cfg.spins[static_cast<std::size_t>(enc.var_index(0, 0, 0))] = 1;
    cfg.spins[static_cast<std::size_t>(enc.var_index(1, 0, 1))] = 1;
    const auto dec = decode(enc, cfg);
    const json jv = jsp_violations_to_json(dec.violations);
    CHECK(jv.at("one_hot") == json::array());
    REQUIRE(jv.at("conflict").size() == 1);
    CHECK(jv.at("conflict")[0].at("machine") == 0);
    CHECK(jv.at("conflict")[0].at("first") == json::array({0, 0, 0}));
    CHECK(jv.at("conflict")[0].at("second") == json::array({1, 0, 1}));
  }
}
