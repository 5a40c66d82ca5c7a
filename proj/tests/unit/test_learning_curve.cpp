#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "medie/learning_curve.hpp"

using namespace medie;

TEST_SUITE("learning_curve") {

TEST_CASE("subsample sizes and contents") {
  const auto corpus = fixture::generated(20, 81, {20, 0, 0});
  const auto pool = fixture::entries(corpus, "train");
  const auto all = corpus.record_ids();
  for (double f : {0.01, 0.2, 0.5, 0.77, 1.0}) {
    const auto ids = subsample_records(pool, f, 3);
    CHECK(ids.size() == std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * 20))));
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(std::includes(all.begin(), all.end(), ids.begin(), ids.end()));
    CHECK(subsample_records(pool, f, 3) == ids);
  }
  CHECK(subsample_records(pool, 1.0, 0) == all);
  CHECK(subsample_records(pool, 0.5, 1) != subsample_records(pool, 0.5, 2));
  CHECK_THROWS_AS(subsample_records(pool, 0.0, 1), EvalError);
  CHECK_THROWS_AS(subsample_records(pool, 1.5, 1), EvalError);
  CHECK_THROWS_AS(subsample_records({}, 0.5, 1), EvalError);
}

TEST_CASE("curve structure and statistics") {
  const auto corpus = fixture::generated(16, 82, {10, 3, 3});
  const auto train = fixture::entries(corpus, "train"), dev = fixture::entries(corpus, "dev"),
             test = fixture::entries(corpus, "test");
  LearningCurveConfig cfg;
  cfg.fractions = {0.5, 1.0};
  cfg.seeds = {0, 1};
  cfg.train.entity.learning_rate = 0.05;
  cfg.train.entity.max_epochs = 2;
  cfg.train.span.max_epochs = 2;
  std::size_t seen = 0;
  const auto curve = learning_curve(train, dev, test, builtin_scheme(), cfg, [&](const CurveRun&) { ++seen; });
  CHECK(seen == 4);
  REQUIRE(curve.runs.size() == 4);
  REQUIRE(curve.points.size() == 6);
  CHECK(curve.runs[0].records == 5);
  CHECK(curve.runs[3].records == 10);
  CHECK(curve.runs[3].documents == train.size());
  for (const auto& p : curve.points) {
    REQUIRE(p.values.size() == 2);
    const double mean = (p.values[0] + p.values[1]) / 2;
    CHECK(p.mean == doctest::Approx(mean));
    CHECK(p.stddev == doctest::Approx(std::abs(p.values[0] - p.values[1]) / std::sqrt(2.0)));
  }
  // Runs are independent of how many are in flight.
  cfg.jobs = 3;
  const auto parallel = learning_curve(train, dev, test, builtin_scheme(), cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(parallel.runs[i].entity_f1 == curve.runs[i].entity_f1);
    CHECK(parallel.runs[i].relation_f1 == curve.runs[i].relation_f1);
  }
  CHECK(format_curve(curve).find("relation") != std::string::npos);
  const auto jsonl = curve_jsonl(curve);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 10);
}

TEST_CASE("empty seed list is rejected") {
  LearningCurveConfig cfg;
  cfg.seeds.clear();
  CHECK_THROWS_AS(learning_curve({}, {}, {}, builtin_scheme(), cfg), EvalError);
}

}
