#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

using namespace maschine;
using testutil::E;
using testutil::R;

namespace {

constexpr ModelKind kAllModels[] = {ModelKind::transe, ModelKind::distmult, ModelKind::complex, ModelKind::tucker};

BasicParams<double> tiny(ModelKind kind, std::size_t d, std::vector<double> ents, std::vector<double> rels) {
  BasicParams<double> p;
  p.kind = kind;
  p.dim = d;
  p.num_entities = ents.size() / p.width();
  p.num_relations = rels.size() / p.width();
  p.entities = std::move(ents);
  p.relations = std::move(rels);
  return p;
}

} // namespace

TEST(Score, TransEExactTranslationIsMaximal) {
  const auto p = tiny(ModelKind::transe, 2, {0, 0, 1, 0}, {1, 0});
  EXPECT_EQ(score(p, E(0), 0, E(1)), 0.0);
  EXPECT_LT(score(p, E(1), 0, E(0)), 0.0);
}

TEST(Score, DistMultHandSum) {
  const auto p = tiny(ModelKind::distmult, 2, {1, 2, 3, -1}, {1, 1});
  EXPECT_EQ(score(p, E(0), 0, E(1)), 1.0);
}

TEST(Score, ComplExWithZeroImaginaryEqualsDistMult) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    auto c = testutil::random_params<double>(ModelKind::complex, 3, 2, d, rng.next());
    auto m = init_params<double>(ModelKind::distmult, 3, 2, d, 0);
    for (std::size_t i = 0; i < c.entities.size(); i += 2) {
      c.entities[i + 1] = 0;
      m.entities[i / 2] = c.entities[i];
    }
    for (std::size_t i = 0; i < c.relations.size(); i += 2) {
      c.relations[i + 1] = 0;
      m.relations[i / 2] = c.relations[i];
    }
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t t = 0; t < 3; ++t)
        EXPECT_NEAR(score(c, E(h), 1, E(t)), score(m, E(h), 1, E(t)), 1e-12);
  }
}

TEST(Score, VectorizedMatchesScalar) {
  Rng rng(2);
  for (auto kind : kAllModels) {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t ne = 2 + rng.below(10), d = 1 + rng.below(8);
      const auto p = init_params<float>(kind, ne, 3, d, rng.next());
      std::vector<double> tails(ne), heads(ne), hq(ne);
      for (std::size_t r = 0; r < p.relation_rows(); ++r) {
        const auto anchor = E(rng.below(ne));
        score_all_tails<double>(p, anchor, r, std::span<double>(tails));
        score_all_heads<double>(p, r, anchor, std::span<double>(heads));
        score_head_query<double>(p, r % p.num_relations, anchor, std::span<double>(hq));
        std::size_t best = 0;
        double best_score = -INFINITY;
        for (std::size_t i = 0; i < ne; ++i) {
          const double s = score<double>(p, anchor, r, E(i));
          EXPECT_NEAR(tails[i], s, 1e-10) << to_string(kind);
          EXPECT_NEAR(heads[i], score<double>(p, E(i), r, anchor), 1e-10) << to_string(kind);
          EXPECT_NEAR(hq[i], head_query_score<double>(p, E(i), r % p.num_relations, anchor), 1e-10);
          if (s > best_score) {
            best_score = s;
            best = i;
          }
        }
        EXPECT_EQ(static_cast<std::size_t>(std::max_element(tails.begin(), tails.end()) - tails.begin()), best);
      }
    }
  }
}

TEST(Score, TransESelfQueryAttainsZero) {
  // e_2 = e_0 + w_0
  const auto p = tiny(ModelKind::transe, 2, {0.5, -1, 3, 3, 1.5, -0.5}, {1, 0.5});
  std::vector<double> s(3);
  score_all_tails<double>(p, E(0), 0, std::span<double>(s));
  EXPECT_EQ(s[2], 0.0);
  EXPECT_EQ(*std::max_element(s.begin(), s.end()), 0.0);
}

TEST(Grad, DistMultHeadGradientIsRelationTimesTail) {
  const auto p = testutil::random_params<double>(ModelKind::distmult, 3, 1, 5, 4);
  const auto g = grad(p, E(0), 0, E(2), 1.0);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(g.d_head[k], p.relation(0)[k] * p.entity(2)[k]);
}

TEST(Grad, TransEAtExactTranslationIsZero) {
  const auto p = tiny(ModelKind::transe, 2, {0, 0, 1, 0}, {1, 0});
  const auto g = grad(p, E(0), 0, E(1), 1.0);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(g.d_head[k], 0.0);
    EXPECT_EQ(g.d_relation[k], 0.0);
    EXPECT_EQ(g.d_tail[k], 0.0);
  }
}

TEST(Grad, FiniteDifferences) {
  for (auto kind : kAllModels)
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      EXPECT_LT(testutil::gradient_check(kind, seed), 1e-4) << to_string(kind) << " seed " << seed;
}

TEST(Grad, FiniteDifferencesTransEL1) {
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    EXPECT_LT(testutil::gradient_check(ModelKind::transe, seed, 1), 1e-4) << "seed " << seed;
}

TEST(Init, DeterministicGivenSeed) {
  for (auto kind : kAllModels) {
    EXPECT_EQ(init_params(kind, 7, 3, 5, 42), init_params(kind, 7, 3, 5, 42));
    EXPECT_NE(init_params(kind, 7, 3, 5, 42), init_params(kind, 7, 3, 5, 43));
  }
}

TEST(Init, BoundsAndShapes) {
  const auto p = init_params(ModelKind::distmult, 1, 1, 1, 9);
  ASSERT_EQ(p.entities.size(), 1u);
  EXPECT_LE(std::abs(p.entities[0]), init_bound(1));

  const auto t = init_params(ModelKind::tucker, 4, 2, 3, 9);
  EXPECT_TRUE(t.reciprocal);
  EXPECT_EQ(t.relations.size(), 4u * 3u);
  EXPECT_EQ(t.core.size(), 27u);
  for (float w : t.core) EXPECT_LE(std::abs(w), 1.0f);

  const auto c = init_params(ModelKind::complex, 4, 2, 3, 9);
  EXPECT_EQ(c.entities.size(), 4u * 6u);

  const auto e = init_params(ModelKind::transe, 4, 3, 6, 9);
  for (std::size_t r = 0; r < 3; ++r) {
    double n = 0;
    for (float x : e.relation(r)) n += double(x) * x;
    EXPECT_NEAR(n, 1.0, 1e-6);
  }
  for (float x : e.entities) EXPECT_LE(std::abs(x), init_bound(6) + 1e-7);
}

TEST(Init, EmpiricalMeanNearZero) {
  const std::size_t d = 10, n = 100000; // 10^6 entries
  const auto p = init_params<double>(ModelKind::distmult, n, 0, d, 77);
  double sum = 0;
  for (double x : p.entities) sum += x;
  const double mean = sum / double(p.entities.size());
  const double sigma = init_bound(d) / std::sqrt(3.0) / std::sqrt(double(p.entities.size()));
  EXPECT_LT(std::abs(mean), 3 * sigma);
}

TEST(Invariants, TransETranslation) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = testutil::random_params<double>(ModelKind::transe, 2, 1, 1 + rng.below(8), rng.next());
    const double before = score(p, E(0), 0, E(1));
    for (std::size_t k = 0; k < p.dim; ++k) {
      const double c = rng.uniform(-0.5, 0.5);
      p.entity(0)[k] += c;
      p.entity(1)[k] += c;
    }
    EXPECT_NEAR(score(p, E(0), 0, E(1)), before, 1e-12);
  }
}

TEST(Invariants, DistMultSymmetry) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = init_params<float>(ModelKind::distmult, 4, 2, 1 + rng.below(8), rng.next());
    EXPECT_EQ(score(p, E(0), 1, E(3)), score(p, E(3), 1, E(0)));
  }
}

TEST(Invariants, ComplExConjugation) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = testutil::random_params<double>(ModelKind::complex, 2, 2, 1 + rng.below(8), rng.next());
    // Relation 1 := conj(relation 0)
    for (std::size_t k = 0; k < p.width(); ++k) p.relation(1)[k] = k % 2 ? -p.relation(0)[k] : p.relation(0)[k];
    EXPECT_NEAR(score(p, E(0), 0, E(1)), score(p, E(1), 1, E(0)), 1e-12);
  }
}

TEST(Invariants, TuckERSuperDiagonalIsDistMult) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    auto t = testutil::random_params<double>(ModelKind::tucker, 3, 1, d, rng.next());
    std::fill(t.core.begin(), t.core.end(), 0.0);
    for (std::size_t a = 0; a < d; ++a) t.core[(a * d + a) * d + a] = 1.0;
    auto m = t;
    m.kind = ModelKind::distmult;
    m.core.clear();
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(score(t, E(h), 0, E(x)), score(m, E(h), 0, E(x)), 1e-12);
  }
}

TEST(ModelKind, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_model_kind("TransE"), ModelKind::transe);
  EXPECT_EQ(parse_model_kind("tucker"), ModelKind::tucker);
  EXPECT_THROW(parse_model_kind("ConvE"), UsageError);
}
