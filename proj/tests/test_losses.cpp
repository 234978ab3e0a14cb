#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heurank/fixtures.hpp"
#include "heurank/losses.hpp"
#include "heurank/oracle.hpp"
#include "support/reference_trace.hpp"

using namespace heurank;

namespace {

RankingTrace tree_trace() {
  const auto tree = fixtures::ranking_tree();
  return ranking_trace(tree, oracle::optimal_solve(tree));
}

StateMap<double> constant_h(const RankingTrace& trace, double value) {
  StateMap<double> h;
  for (const auto& e : trace.state_table->entries()) h[e.id] = value;
  return h;
}

StateMap<double> random_h(const RecordSet& rs, std::uint64_t seed, double scale = 3.0) {
  std::mt19937_64 rng(seed);
  StateMap<double> h;
  for (StateId s : states_needing_h(rs))
    h[s] = scale * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  return h;
}

// Central finite differences over the h values.
void check_gradient(const RecordSet& rs, const StateMap<double>& h0, double alpha, double beta, double tol,
                    double step = 1e-5) {
  const LossValueGrad analytic = evaluate_loss(rs, h0, alpha, beta);
  for (StateId s : states_needing_h(rs)) {
    StateMap<double> hp = h0, hm = h0;
    hp[s] += step;
    hm[s] -= step;
    const double numeric =
        (evaluate_loss(rs, hp, alpha, beta).value - evaluate_loss(rs, hm, alpha, beta).value) / (2 * step);
    const double got = analytic.d_h.contains(s) ? analytic.d_h.at(s) : 0.0;
    const double denom = std::max({std::abs(numeric), std::abs(got), 1e-8});
    INFO("state " << s.hi << ":" << s.lo << " numeric " << numeric << " analytic " << got);
    CHECK(std::abs(numeric - got) / denom < tol);
  }
}

}  // namespace

TEST_CASE("the rank margin r is the exact affine formula", "[losses]") {
  CHECK(r_value(3, 3, 7, 7, 1, 1) == 0.0);
  CHECK(r_value(2, 8, 8, 3, 1, 1) == -1.0);
  CHECK(r_value(2, 8, 8, 3, 0, 1) == 5.0);  // greedy case ignores g
  CHECK(r_value(2, 8, 8, 3, 0, 2) == 10.0);
}

TEST_CASE("violation counts on the branching tree", "[losses]") {
  const auto trace = tree_trace();
  const auto h = constant_h(trace, 0.0);

  // all six expansion-selection inequalities tie under a constant heuristic
  CHECK(loss_l01(trace, h, 0, 1) == 6);
  CHECK(loss_l01(trace, h, 0, 1, ViolationBoundary::strict_only) == 0);

  // with g in the merit the later rivals of the second pop carry r > 0
  CHECK(loss_l01(trace, h, 1, 1) == 6);
  CHECK(loss_l01(trace, h, 1, 1, ViolationBoundary::strict_only) == 2);

  // cross-check both boundaries against the reference replay
  const auto tree = fixtures::ranking_tree();
  const auto replay = reference::replay_restricted_search(tree, oracle::optimal_solve(tree));
  for (const double alpha : {0.0, 1.0}) {
    long ties = 0, strict = 0;
    for (const auto& p : replay.expansion_pairs) {
      const double r = r_value(p.g_on_path, p.g_rival, h.at(p.on_path), h.at(p.rival), alpha, 1.0);
      if (r >= 0) ++ties;
      if (r > 0) ++strict;
    }
    CHECK(loss_l01(trace, h, alpha, 1) == ties);
    CHECK(loss_l01(trace, h, alpha, 1, ViolationBoundary::strict_only) == strict);
  }

  // a heuristic satisfying all six strictly
  StateMap<double> good = h;
  for (const auto& e : trace.state_table->entries()) good[e.id] = 100.0;
  const auto path = trace.plan.states();
  for (std::size_t i = 0; i < path.size(); ++i) good[path[i]] = -10.0 * static_cast<double>(i);
  CHECK(loss_l01(trace, good, 1, 1) == 0);
}

TEST_CASE("record-level violations include the terminating pop", "[losses]") {
  const auto trace = tree_trace();
  const auto records = training_records(trace, LossKind::lstar);
  const auto h = constant_h(trace, 0.0);
  // 6 selection pairs at r >= 0 plus the goal pop's four rivals
  CHECK(pair_violations(records.pairs, h, 1, 1) == 10);
  CHECK(pair_violations(records.pairs, h, 1, 1, ViolationBoundary::strict_only) == 6);
}

TEST_CASE("pairwise logistic surrogate values and gradients", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::lstar;
  rs.state_table = std::make_shared<StateTable>();
  const StateId a{0, 1}, b{0, 2};
  rs.pairs.push_back(PairRecord{a, b, 1.0, 1.0});

  SECTION("tied pair") {
    StateMap<double> h{{a, 0.0}, {b, 0.0}};
    const auto out = loss_rank_logistic(rs, h, 1, 1);
    CHECK_THAT(out.value, Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
    CHECK_THAT(out.d_h.at(a), Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(out.d_h.at(b), Catch::Matchers::WithinAbs(-0.5, 1e-12));
  }
  SECTION("saturated pair") {
    StateMap<double> h{{a, -100.0}, {b, 0.0}};
    const auto out = loss_rank_logistic(rs, h, 1, 1);
    CHECK(out.value < 1e-40);
    CHECK(std::abs(out.d_h.at(a)) < 1e-40);
  }
  SECTION("large positive margins never overflow") {
    StateMap<double> h{{a, 1000.0}, {b, 0.0}};
    const auto out = loss_rank_logistic(rs, h, 1, 1);
    CHECK(std::isfinite(out.value));
    CHECK_THAT(out.value, Catch::Matchers::WithinRel(1000.0, 1e-9));
  }
  SECTION("beta scales the gradient") {
    StateMap<double> h{{a, 0.0}, {b, 0.0}};
    const auto out = loss_rank_logistic(rs, h, 1, 2.5);
    CHECK_THAT(out.d_h.at(a), Catch::Matchers::WithinAbs(1.25, 1e-12));
  }
  SECTION("beta must be positive") {
    StateMap<double> h{{a, 0.0}, {b, 0.0}};
    CHECK_THROWS_AS(loss_rank_logistic(rs, h, 1, 0), SpecError);
  }
}

TEST_CASE("logistic surrogate matches finite differences on a random batch", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::lstar;
  rs.state_table = std::make_shared<StateTable>();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const StateId on{0, static_cast<std::uint64_t>(100 + i)};
    const StateId off{0, static_cast<std::uint64_t>(200 + uniform_below(rng, 40))};
    rs.pairs.push_back(PairRecord{on, off, static_cast<double>(uniform_below(rng, 10)),
                                  static_cast<double>(uniform_below(rng, 10))});
  }
  check_gradient(rs, random_h(rs, 1), 1, 1, 1e-6);
  check_gradient(rs, random_h(rs, 2), 0, 1, 1e-6);
}

TEST_CASE("squared regression loss", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::l2;
  rs.state_table = std::make_shared<StateTable>();
  const StateId s{0, 1};
  rs.labeled.push_back(LabeledStateRecord{s, 3.0});

  StateMap<double> exact{{s, 3.0}};
  CHECK(loss_l2(rs, exact).value == 0.0);

  StateMap<double> off{{s, 5.0}};
  const auto out = loss_l2(rs, off);
  CHECK(out.value == 4.0);
  CHECK(out.d_h.at(s) == 4.0);

  rs.labeled.push_back(LabeledStateRecord{StateId{0, 2}, 1.0});
  rs.labeled.push_back(LabeledStateRecord{StateId{0, 3}, 7.0});
  check_gradient(rs, random_h(rs, 3), 1, 1, 1e-6);
}

TEST_CASE("path-transition loss", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::lrt;
  rs.state_table = std::make_shared<StateTable>();
  std::vector<StateId> path;
  for (std::uint64_t i = 0; i < 4; ++i) path.push_back(StateId{0, i});
  for (std::size_t i = 1; i < path.size(); ++i) rs.transitions.push_back(TransitionRecord{path[i - 1], path[i]});

  StateMap<double> steep;
  for (std::size_t i = 0; i < path.size(); ++i) steep[path[i]] = -10.0 * static_cast<double>(i);
  CHECK(loss_rt(rs, steep).value < 3 * 5e-5);

  StateMap<double> flat;
  for (const auto& s : path) flat[s] = 2.0;
  CHECK_THAT(loss_rt(rs, flat).value, Catch::Matchers::WithinAbs(3 * std::log(2.0), 1e-12));

  check_gradient(rs, random_h(rs, 4), 1, 1, 1e-6);
}

TEST_CASE("Bellman-band loss", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::lbe;
  rs.state_table = std::make_shared<StateTable>();
  const StateId s{0, 1}, c1{0, 2}, c2{0, 3};

  SECTION("unit-cost exactness gives zero") {
    rs.bellman.push_back(BellmanRecord{s, 4.0, {c1, c2}});
    StateMap<double> h{{s, 4.0}, {c1, 3.0}, {c2, 9.0}};  // some child one below the parent
    CHECK(loss_be(rs, h).value == 0.0);
  }
  SECTION("flat zero heuristic pays the Bellman hinge") {
    rs.bellman.push_back(BellmanRecord{s, 0.0, {c1}});
    StateMap<double> h{{s, 0.0}, {c1, 0.0}};
    CHECK(loss_be(rs, h).value == 1.0);
  }
  SECTION("terminal goals keep only the band terms") {
    rs.bellman.push_back(BellmanRecord{s, 2.0, {}});
    StateMap<double> h{{s, 0.0}};
    CHECK(loss_be(rs, h).value == 2.0);  // below the h* band by 2
    const auto out = loss_be(rs, h);
    CHECK(out.d_h.at(s) == -1.0);
  }
  SECTION("band pushes down past twice the cost-to-goal") {
    rs.bellman.push_back(BellmanRecord{s, 2.0, {c1}});
    StateMap<double> h{{s, 7.0}, {c1, 100.0}};
    CHECK(loss_be(rs, h).value == 3.0);  // 7 - 2*2
  }
  SECTION("finite differences away from the kinks") {
    for (int attempt = 0; attempt < 50; ++attempt) {
      rs.bellman.clear();
      rs.bellman.push_back(BellmanRecord{s, 2.0, {c1, c2}});
      const auto h = random_h(rs, 100 + static_cast<std::uint64_t>(attempt), 5.0);
      const double bellman = 1.0 + std::min(h.at(c1), h.at(c2)) - h.at(s);
      const double below = 2.0 - h.at(s);
      const double above = h.at(s) - 4.0;
      const double child_gap = std::abs(h.at(c1) - h.at(c2));
      if (std::abs(bellman) < 1e-3 || std::abs(below) < 1e-3 || std::abs(above) < 1e-3 || child_gap < 1e-3)
        continue;  // resample away from the hinge kinks
      check_gradient(rs, h, 1, 1, 1e-6);
    }
  }
}

TEST_CASE("rank losses are shift invariant, regression is not", "[losses]") {
  const auto tree = fixtures::ranking_tree();
  auto trace = ranking_trace(tree, oracle::optimal_solve(tree));
  attach_cost_to_goal_labels(trace, oracle::cost_to_goal(tree));

  const auto pairs = training_records(trace, LossKind::lstar);
  const auto transitions = training_records(trace, LossKind::lrt);
  const auto labeled = training_records(trace, LossKind::l2);

  const auto h = random_h(pairs, 5);
  StateMap<double> shifted;
  for (const auto& [s, v] : h) shifted[s] = v + 17.0;

  CHECK(std::abs(loss_rank_logistic(pairs, h, 1, 1).value - loss_rank_logistic(pairs, shifted, 1, 1).value) < 1e-12);
  CHECK(std::abs(loss_rt(transitions, h).value - loss_rt(transitions, shifted).value) < 1e-12);
  CHECK(std::abs(loss_l2(labeled, h).value - loss_l2(labeled, shifted).value) > 1.0);
}

TEST_CASE("losses are additive over concatenated batches", "[losses]") {
  RecordSet a, b, both;
  a.kind = b.kind = both.kind = LossKind::lstar;
  a.state_table = b.state_table = both.state_table = std::make_shared<StateTable>();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    PairRecord p{StateId{0, static_cast<std::uint64_t>(i)}, StateId{0, static_cast<std::uint64_t>(50 + i)},
                 static_cast<double>(uniform_below(rng, 5)), static_cast<double>(uniform_below(rng, 5))};
    (i % 2 == 0 ? a : b).pairs.push_back(p);
    both.pairs.push_back(p);
  }
  const auto h = random_h(both, 6);
  const auto va = loss_rank_logistic(a, h, 1, 1);
  const auto vb = loss_rank_logistic(b, h, 1, 1);
  const auto vboth = loss_rank_logistic(both, h, 1, 1);
  CHECK_THAT(vboth.value, Catch::Matchers::WithinRel(va.value + vb.value, 1e-12));
  for (const auto& [s, d] : vboth.d_h) {
    const double da = va.d_h.contains(s) ? va.d_h.at(s) : 0.0;
    const double db = vb.d_h.contains(s) ? vb.d_h.at(s) : 0.0;
    CHECK_THAT(d, Catch::Matchers::WithinAbs(da + db, 1e-12));
  }
}

TEST_CASE("gradients vanish at batch minimizers", "[losses]") {
  RecordSet l2;
  l2.kind = LossKind::l2;
  l2.state_table = std::make_shared<StateTable>();
  l2.labeled = {{StateId{0, 1}, 2.0}, {StateId{0, 2}, 5.0}};
  StateMap<double> at_min{{StateId{0, 1}, 2.0}, {StateId{0, 2}, 5.0}};
  for (const auto& [s, d] : loss_l2(l2, at_min).d_h) CHECK(d == 0.0);

  RecordSet rank;
  rank.kind = LossKind::lstar;
  rank.state_table = std::make_shared<StateTable>();
  rank.pairs = {{StateId{0, 1}, StateId{0, 2}, 1.0, 1.0}};
  StateMap<double> saturated{{StateId{0, 1}, -1000.0}, {StateId{0, 2}, 1000.0}};
  for (const auto& [s, d] : loss_rank_logistic(rank, saturated, 1, 1).d_h) CHECK(std::abs(d) < 1e-300);
}

TEST_CASE("record kind mismatches are rejected", "[losses]") {
  RecordSet rs;
  rs.kind = LossKind::lrt;
  rs.state_table = std::make_shared<StateTable>();
  StateMap<double> h;
  CHECK_THROWS_AS(loss_rank_logistic(rs, h, 1, 1), RecordKindError);
  CHECK_THROWS_AS(loss_l2(rs, h), RecordKindError);
  CHECK_THROWS_AS(loss_be(rs, h), RecordKindError);
  rs.kind = LossKind::lstar;
  CHECK_THROWS_AS(loss_rt(rs, h), RecordKindError);
}
