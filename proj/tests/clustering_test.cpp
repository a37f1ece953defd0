// Copyright 2026 The Centfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "centfuzz/clustering.hpp"
#include "centfuzz/errors.hpp"
#include "tests/testutil.hpp"

namespace centfuzz {
namespace {

using testutil::Lcg;
using testutil::TempDir;

Matrix MatrixOf(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < m.d; ++j) m.a[i * m.d + j] = rows[i][j];
  return m;
}

Matrix RandomMatrix(Lcg& lcg, size_t n, size_t d) {
  Matrix m(n, d);
  for (auto& v : m.a) v = lcg.NextUnit();
  return m;
}

// Fits centroids, sizes and SSE to a fixed assignment, accumulating in
// ascending point order (the same order the update step uses).
ClusterModel ModelFromAssignment(const Matrix& points, int k,
                                 const std::vector<int>& assignment) {
  ClusterModel m;
  m.k = k;
  m.dim = points.d;
  m.assignment = assignment;
  m.sizes.assign(k, 0);
  m.centroids.assign(size_t(k) * points.d, 0.0);
  for (size_t i = 0; i < points.n; ++i) {
    int c = assignment[i];
    ++m.sizes[c];
    for (size_t j = 0; j < points.d; ++j)
      m.centroids[size_t(c) * points.d + j] += points.Row(i)[j];
  }
  for (int c = 0; c < k; ++c) {
    // Multiply by the reciprocal, matching the library's mean computation
    // bit for bit.
    double inv = 1.0 / static_cast<double>(m.sizes[c]);
    for (size_t j = 0; j < points.d; ++j)
      m.centroids[size_t(c) * points.d + j] *= inv;
  }
  m.sse = 0.0;
  for (size_t i = 0; i < points.n; ++i)
    m.sse += SquaredDistance(points.Row(i), m.Centroid(assignment[i]), points.d);
  return m;
}

// ---------------------------------------------------------------------------
// Assignment kernels
// ---------------------------------------------------------------------------

TEST(Assign, NearestWithLowestIndexTies) {
  Matrix pts = MatrixOf({{0.0}, {0.5}, {1.0}});
  std::vector<double> cents = {0.0, 1.0};
  std::vector<int> assign;
  std::vector<double> dist2;
  AssignNearestSerial(pts, cents, 2, assign, dist2);
  // The midpoint is equidistant; ties go to the lowest centroid index.
  EXPECT_EQ(assign, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(dist2[0], 0.0);
  EXPECT_EQ(dist2[1], 0.25);
  EXPECT_EQ(dist2[2], 0.0);
}

TEST(Assign, SerialAndParallelAreBitwiseIdentical) {
  Lcg lcg(0xA551);
  for (int rep = 0; rep < 20; ++rep) {
    size_t n = 1 + lcg.NextU64() % 400;
    size_t d = 1 + lcg.NextU64() % 24;
    int k = 1 + int(lcg.NextU64() % 12);
    Matrix pts = RandomMatrix(lcg, n, d);
    std::vector<double> cents(size_t(k) * d);
    for (auto& v : cents) v = lcg.NextUnit();
    std::vector<int> a1, a2;
    std::vector<double> d1, d2;
    AssignNearestSerial(pts, cents, k, a1, d1);
    AssignNearestParallel(pts, cents, k, a2, d2);
    ASSERT_EQ(a1, a2);
    ASSERT_EQ(d1.size(), d2.size());
    for (size_t i = 0; i < d1.size(); ++i) {
      // Bitwise, not approximately: the kernels must agree exactly.
      EXPECT_EQ(std::memcmp(&d1[i], &d2[i], sizeof(double)), 0) << i;
    }
  }
}

// ---------------------------------------------------------------------------
// Lloyd iteration
// ---------------------------------------------------------------------------

TEST(KMeans, SeparatesTwoPointsExactly) {
  Matrix pts = MatrixOf({{0.0, 0.0}, {1.0, 1.0}});
  ClusterModel m = KMeans(pts, 2, {0.0, 0.0, 1.0, 1.0}, 1e-9);
  EXPECT_EQ(m.k, 2);
  EXPECT_EQ(m.sse, 0.0);
  EXPECT_EQ(m.assignment, (std::vector<int>{0, 1}));
}

TEST(KMeans, SingleClusterIsTheMean) {
  Matrix pts = MatrixOf({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  ClusterModel m = KMeans(pts, 1, {0.2, 0.9}, 1e-9);
  EXPECT_EQ(m.k, 1);
  EXPECT_DOUBLE_EQ(m.Centroid(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(m.Centroid(0)[1], 0.5);
  // Four corners at squared distance 0.5 each.
  EXPECT_DOUBLE_EQ(m.sse, 2.0);

  Matrix diag = MatrixOf({{0, 0}, {1, 1}});
  ClusterModel md = KMeans(diag, 1, {0.0, 0.0}, 1e-9);
  EXPECT_DOUBLE_EQ(md.Centroid(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(md.sse, 1.0);
}

TEST(KMeans, TwoGroupsOnALine) {
  Matrix pts = MatrixOf({{0.0}, {0.1}, {0.9}, {1.0}});
  ClusterModel m = KMeans(pts, 2, {0.0, 1.0}, 1e-9);
  EXPECT_EQ(m.assignment, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(m.Centroid(0)[0], 0.05);
  EXPECT_DOUBLE_EQ(m.Centroid(1)[0], 0.95);
}

TEST(KMeans, FinalAssignmentIsNearest) {
  Lcg lcg(0x1707);
  for (int rep = 0; rep < 10; ++rep) {
    size_t n = 10 + lcg.NextU64() % 60;
    size_t d = 1 + lcg.NextU64() % 6;
    int k = 2 + int(lcg.NextU64() % 4);
    Matrix pts = RandomMatrix(lcg, n, d);
    std::vector<double> init(size_t(k) * d);
    for (auto& v : init) v = lcg.NextUnit();
    ClusterModel m = KMeans(pts, k, init, 1e-6);
    ASSERT_NO_THROW(m.Validate());
    std::vector<int> assign;
    std::vector<double> dist2;
    AssignNearestSerial(pts, m.centroids, m.k, assign, dist2);
    EXPECT_EQ(m.assignment, assign);
    double sse = 0.0;
    for (double v : dist2) sse += v;
    EXPECT_NEAR(m.sse, sse, 1e-12);
  }
}

TEST(KMeans, SseNonIncreasingInIterationCap) {
  // Stopping after m iterations can never beat stopping after m+1: each
  // assignment step and each update step (including empty-cluster repair)
  // only lowers the objective.
  Lcg lcg(0x5e5e);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix pts = RandomMatrix(lcg, 40, 3);
    std::vector<double> init(4 * 3);
    for (auto& v : init) v = lcg.NextUnit();
    double prev = std::numeric_limits<double>::infinity();
    for (int cap = 1; cap <= 12; ++cap) {
      ClusterModel m = KMeans(pts, 4, init, 0.0, cap);
      EXPECT_LE(m.sse, prev + 1e-12) << "cap " << cap;
      prev = m.sse;
    }
  }
}

TEST(KMeans, RepairsEmptyClustersDeterministically) {
  // Identical initial centroids capture everything at index 0 and leave
  // index 1 empty; repair re-seeds it at the farthest member of a cluster
  // with >= 2 points (ties to the lowest point index), here point 0.
  Matrix pts = MatrixOf({{0.0}, {1.0}});
  ClusterModel m = KMeans(pts, 2, {0.5, 0.5}, 1e-9);
  ASSERT_NO_THROW(m.Validate());
  EXPECT_EQ(m.sizes, (std::vector<int>{1, 1}));
  EXPECT_EQ(m.sse, 0.0);
  EXPECT_EQ(m.assignment, (std::vector<int>{1, 0}));
  EXPECT_EQ(m.Centroid(0)[0], 1.0);
  EXPECT_EQ(m.Centroid(1)[0], 0.0);
}

TEST(KMeans, RejectsBadArguments) {
  Matrix pts = MatrixOf({{0.0}, {0.0}, {1.0}});
  EXPECT_THROW(KMeans(pts, 0, {}, 1e-9), ValidationError);
  EXPECT_THROW(KMeans(pts, 2, {0.0}, 1e-9), ValidationError);  // wrong shape
  // Only two distinct rows: k = 3 cannot be populated.
  EXPECT_THROW(KMeans(pts, 3, {0.0, 0.5, 1.0}, 1e-9), ValidationError);
  EXPECT_THROW(KMeans(Matrix(), 1, {0.0}, 1e-9), ValidationError);
}

TEST(KMeans, MatchesBruteForceOnTinyDatasets) {
  // For every tiny dataset: enumerate all surjective assignments to get the
  // true minimum SSE, then run Lloyd from every ordered pair of distinct
  // points. No run beats the optimum and at least one attains it exactly.
  Lcg lcg(0xb1f0);
  for (int rep = 0; rep < 20; ++rep) {
    size_t n = 4 + lcg.NextU64() % 3;  // 4..6
    Matrix pts = RandomMatrix(lcg, n, 2);
    const int k = 2;

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> a(n, 0);
    for (uint64_t code = 0; code < (uint64_t(1) << n); ++code) {
      int ones = 0;
      for (size_t i = 0; i < n; ++i) {
        a[i] = int((code >> i) & 1);
        ones += a[i];
      }
      if (ones == 0 || ones == int(n)) continue;  // not surjective
      best = std::min(best, ModelFromAssignment(pts, k, a).sse);
    }

    double best_lloyd = std::numeric_limits<double>::infinity();
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = 0; q < n; ++q) {
        if (p == q) continue;
        std::vector<double> init = {pts.Row(p)[0], pts.Row(p)[1],
                                    pts.Row(q)[0], pts.Row(q)[1]};
        ClusterModel m = KMeans(pts, k, init, 0.0);
        EXPECT_GE(m.sse, best - 1e-9);
        best_lloyd = std::min(best_lloyd, m.sse);
      }
    }
    EXPECT_EQ(best_lloyd, best) << "dataset " << rep;
  }
}

// ---------------------------------------------------------------------------
// Model scoring
// ---------------------------------------------------------------------------

TEST(Bic, MatchesFrozenFixture) {
  std::ifstream in(testutil::FixtureDir() / "bic_cases.json");
  ASSERT_TRUE(in) << "missing fixture bic_cases.json";
  nlohmann::json doc = nlohmann::json::parse(in);
  ASSERT_EQ(doc.at("format"), "bic-cases");
  int checked = 0;
  for (const auto& cs : doc.at("cases")) {
    SCOPED_TRACE(cs.at("name").get<std::string>());
    int k = cs.at("k").get<int>();
    std::vector<std::vector<double>> rows;
    for (const auto& p : cs.at("points"))
      rows.push_back(p.get<std::vector<double>>());
    Matrix pts = MatrixOf(rows);
    // The fixture pins the membership as round-robin by point index.
    std::vector<int> assign(pts.n);
    for (size_t i = 0; i < pts.n; ++i) assign[i] = int(i % k);
    ClusterModel model = ModelFromAssignment(pts, k, assign);
    double got = BicScore(pts, model);
    const auto& want = cs.at("expected_bic");
    if (want.is_string()) {
      ASSERT_EQ(want.get<std::string>(), "inf");
      EXPECT_TRUE(std::isinf(got) && got > 0);
    } else {
      double w = want.get<double>();
      EXPECT_NEAR(got, w, std::abs(w) * 1e-9 + 1e-9);
    }
    ++checked;
  }
  EXPECT_GE(checked, 35);
}

TEST(Bic, IsDeterministic) {
  Lcg lcg(0xb1cd);
  Matrix pts = RandomMatrix(lcg, 25, 4);
  std::vector<int> assign(pts.n);
  for (size_t i = 0; i < pts.n; ++i) assign[i] = int(i % 3);
  ClusterModel model = ModelFromAssignment(pts, 3, assign);
  double a = BicScore(pts, model);
  double b = BicScore(pts, model);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(Bic, RequiresMorePointsThanClusters) {
  Matrix pts = MatrixOf({{0.0}, {1.0}});
  ClusterModel model = ModelFromAssignment(pts, 2, {0, 1});
  EXPECT_THROW(BicScore(pts, model), ValidationError);
}

// ---------------------------------------------------------------------------
// Cluster-count search
// ---------------------------------------------------------------------------

Matrix TwoBlobs(Lcg& lcg, size_t per_blob, size_t d, double radius) {
  Matrix m(2 * per_blob, d);
  std::vector<double> c0(d), c1(d);
  for (size_t j = 0; j < d; ++j) {
    c0[j] = 0.15;
    c1[j] = 0.85;
  }
  for (size_t i = 0; i < 2 * per_blob; ++i) {
    const auto& c = i < per_blob ? c0 : c1;
    for (size_t j = 0; j < d; ++j)
      m.a[i * d + j] = c[j] + (lcg.NextUnit() - 0.5) * 2 * radius;
  }
  return m;
}

TEST(XMeans, RecoversTwoBlobs) {
  Lcg lcg(0x2b10b);
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Matrix pts = TwoBlobs(lcg, 20, 4, 0.04);
    ClusteringParams params;
    params.k_min = 1;
    params.k_max = 8;
    params.rng_seed = seed;
    ClusterModel m = XMeans(pts, params);
    ASSERT_NO_THROW(m.Validate());
    EXPECT_EQ(m.k, 2) << "seed " << seed;
    // Each blob center is recovered to within the blob radius.
    std::vector<double> lo(m.Centroid(0), m.Centroid(0) + 4);
    std::vector<double> hi(m.Centroid(1), m.Centroid(1) + 4);
    if (lo[0] > hi[0]) std::swap(lo, hi);
    for (size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(lo[j], 0.15, 0.05);
      EXPECT_NEAR(hi[j], 0.85, 0.05);
    }
  }
}

TEST(XMeans, KeepsSingleBlobUnsplit) {
  Lcg lcg(0x151);
  Matrix pts(30, 5);
  for (auto& v : pts.a) v = 0.5 + (lcg.NextUnit() - 0.5) * 0.04;
  ClusteringParams params;
  params.k_min = 1;
  params.k_max = 8;
  params.rng_seed = 7;
  ClusterModel m = XMeans(pts, params);
  EXPECT_EQ(m.k, 1);
}

TEST(XMeans, RespectsKBoundsAndValidates) {
  Lcg lcg(0xcafe);
  Matrix pts = RandomMatrix(lcg, 60, 6);
  ClusteringParams params;
  params.k_min = 3;
  params.k_max = 5;
  params.rng_seed = 11;
  ClusterModel m = XMeans(pts, params);
  ASSERT_NO_THROW(m.Validate());
  EXPECT_GE(m.k, 3);
  EXPECT_LE(m.k, 5);
  // Reported SSE is consistent with the returned assignment and centroids.
  double sse = 0.0;
  for (size_t i = 0; i < pts.n; ++i)
    sse += SquaredDistance(pts.Row(i), m.Centroid(m.assignment[i]), pts.d);
  EXPECT_NEAR(m.sse, sse, 1e-9);
}

TEST(XMeans, DeterministicForFixedSeed) {
  Lcg lcg(0xdead);
  Matrix pts = RandomMatrix(lcg, 50, 4);
  ClusteringParams params;
  params.k_min = 2;
  params.k_max = 10;
  params.rng_seed = 42;
  ClusterModel a = XMeans(pts, params);
  ClusterModel b = XMeans(pts, params);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.sizes, b.sizes);
  ASSERT_EQ(a.centroids.size(), b.centroids.size());
  EXPECT_EQ(std::memcmp(a.centroids.data(), b.centroids.data(),
                        a.centroids.size() * sizeof(double)),
            0);
  EXPECT_EQ(std::memcmp(&a.sse, &b.sse, sizeof a.sse), 0);
}

TEST(XMeans, CapsKAtDistinctRows) {
  // Ten copies of three distinct points: the search can never exceed k = 3
  // regardless of k_max.
  Matrix pts(30, 2);
  for (size_t i = 0; i < 30; ++i) {
    pts.a[i * 2] = double(i % 3);
    pts.a[i * 2 + 1] = double(i % 3) * 2.0;
  }
  ClusteringParams params;
  params.k_min = 1;
  params.k_max = 20;
  params.rng_seed = 5;
  ClusterModel m = XMeans(pts, params);
  ASSERT_NO_THROW(m.Validate());
  EXPECT_LE(m.k, 3);
}

TEST(XMeans, RejectsBadParams) {
  Matrix pts = MatrixOf({{0.0}, {1.0}});
  ClusteringParams params;
  params.k_min = 0;
  EXPECT_THROW(XMeans(pts, params), ValidationError);
  params.k_min = 3;
  params.k_max = 2;
  EXPECT_THROW(XMeans(pts, params), ValidationError);
  params.k_min = 3;
  params.k_max = 8;
  // Only two distinct rows available.
  EXPECT_THROW(XMeans(pts, params), ValidationError);
}

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

TEST(ModelIo, RoundTripIsBitExact) {
  TempDir tmp;
  Lcg lcg(0x10ad);
  Matrix pts = RandomMatrix(lcg, 40, 5);
  ClusteringParams params;
  params.k_min = 2;
  params.k_max = 6;
  params.tolerance = 0.0125;
  params.rng_seed = 99;
  ClusterModel m = XMeans(pts, params);
  m.catalog_version = "builtin-v1";
  SaveModel(m, tmp / "model.json");
  ClusterModel back = LoadModel(tmp / "model.json");
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.dim, m.dim);
  EXPECT_EQ(back.assignment, m.assignment);
  EXPECT_EQ(back.sizes, m.sizes);
  EXPECT_EQ(back.catalog_version, m.catalog_version);
  EXPECT_EQ(back.params.k_min, m.params.k_min);
  EXPECT_EQ(back.params.k_max, m.params.k_max);
  EXPECT_EQ(back.params.tolerance, m.params.tolerance);
  EXPECT_EQ(back.params.rng_seed, m.params.rng_seed);
  ASSERT_EQ(back.centroids.size(), m.centroids.size());
  EXPECT_EQ(std::memcmp(back.centroids.data(), m.centroids.data(),
                        m.centroids.size() * sizeof(double)),
            0);
  EXPECT_EQ(std::memcmp(&back.sse, &m.sse, sizeof m.sse), 0);
}

TEST(ModelIo, LoadRejectsBadFiles) {
  TempDir tmp;
  EXPECT_THROW(LoadModel(tmp / "missing.json"), ParseError);
  testutil::WriteFile(tmp / "garbage.json", "not json at all {{{");
  EXPECT_THROW(LoadModel(tmp / "garbage.json"), ParseError);
  testutil::WriteFile(tmp / "wrongformat.json",
                      "{\"format\":\"something-else\",\"version\":1}");
  EXPECT_THROW(LoadModel(tmp / "wrongformat.json"), ParseError);
}

}  // namespace
}  // namespace centfuzz
