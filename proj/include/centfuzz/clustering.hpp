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
//
// Clustering: Lloyd iteration with deterministic tie-breaking and empty-
// cluster repair, a Bayesian information criterion for model comparison, and
// a cluster-count search that grows k by splitting clusters whose split
// improves the criterion. See docs/model-selection.md for the exact scoring
// formula.
//
// Determinism contract: every function here is a pure function of its
// arguments (including seeds). The nearest-centroid assignment kernel has a
// serial reference and an OpenMP variant; both produce bitwise identical
// results for any thread count, because the parallel loop writes only
// per-point slots and all floating-point accumulation happens serially in
// point-index order.

#ifndef CENTFUZZ_CLUSTERING_HPP_
#define CENTFUZZ_CLUSTERING_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace centfuzz {

// Dense row-major matrix of doubles: n rows (points) by d columns.
struct Matrix {
  size_t n = 0;
  size_t d = 0;
  std::vector<double> a;  // n * d

  Matrix() = default;
  Matrix(size_t rows, size_t cols) : n(rows), d(cols), a(rows * cols, 0.0) {}
  double* Row(size_t i) { return a.data() + i * d; }
  const double* Row(size_t i) const { return a.data() + i * d; }
};

struct ClusteringParams {
  int k_min = 2;
  int k_max = 200;
  double tolerance = 0.025;  // max centroid displacement to declare converged
  uint64_t rng_seed = 0;

  void Validate() const;
};

struct ClusterModel {
  int k = 0;
  size_t dim = 0;
  std::vector<double> centroids;   // k * dim, row-major
  std::vector<int> assignment;     // per input row: cluster index in [0, k)
  std::vector<int> sizes;          // per cluster, sums to assignment.size()
  double sse = 0.0;                // sum of squared distances to assigned centroid
  std::string catalog_version;
  ClusteringParams params;

  const double* Centroid(int c) const { return centroids.data() + size_t(c) * dim; }
  // Structural consistency: shapes match, sizes tally the assignment,
  // no empty cluster. Throws ValidationError.
  void Validate() const;
};

// Squared Euclidean distance between two d-vectors.
double SquaredDistance(const double* x, const double* y, size_t d);

// Nearest-centroid assignment. For each point i: assign[i] = index of the
// closest centroid (ties go to the lowest index), dist2[i] = squared
// distance to it. Serial reference implementation.
void AssignNearestSerial(const Matrix& points, const std::vector<double>& centroids,
                         int k, std::vector<int>& assign,
                         std::vector<double>& dist2);

// Same contract, OpenMP-parallel over points. Bitwise identical to the
// serial kernel for any thread count (per-point writes only). Falls back to
// the serial path when built without OpenMP.
void AssignNearestParallel(const Matrix& points,
                           const std::vector<double>& centroids, int k,
                           std::vector<int>& assign, std::vector<double>& dist2);

// True when the library was built with OpenMP support.
bool HasParallelKernels();

// Lloyd iteration from explicit initial centroids.
//   - init_centroids must hold k*d values; k must be >= 1 and <= the number
//     of distinct rows.
//   - A cluster left empty after assignment is repaired by re-seeding it at
//     the point farthest from its centroid (among clusters of size >= 2;
//     ties to the lowest point index; repairs process empty clusters in
//     ascending index order).
//   - Converged when the max centroid displacement between iterations drops
//     below `tolerance` and the assignment is stable; hard cap of
//     `max_iterations`.
// The returned model assigns every point to its nearest centroid and its
// SSE is measured against the final centroids.
ClusterModel KMeans(const Matrix& points, int k,
                    const std::vector<double>& init_centroids, double tolerance,
                    int max_iterations = 500);

// Bayesian information criterion of a fitted model over the points it was
// fitted on; higher is better. Spherical Gaussian components with one pooled
// variance sigma^2 = SSE / (d * (n - k)); free-parameter count
// p = (k - 1) + k*d + 1. Degenerate variance (<= 0, i.e. an exact fit)
// scores +infinity. Requires n > k. Exact formula: docs/model-selection.md.
double BicScore(const Matrix& points, const ClusterModel& model);

// Cluster-count search: start from k_min (k-means++ seeding drawn from
// params.rng_seed), then repeatedly try to split each cluster in index order
// by running 2-means on its members (children seeded at the centroid +/- a
// seeded random direction scaled by the cluster RMS radius) and keep the
// split when it strictly improves the criterion. Stops when no split is
// accepted or k_max is reached. Deterministic for fixed inputs and seed.
ClusterModel XMeans(const Matrix& points, const ClusteringParams& params);

// Model file round trip. Centroids are serialized losslessly (shortest
// round-trip decimal); save-then-load reproduces them bit-exactly.
void SaveModel(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel LoadModel(const std::filesystem::path& path);

}  // namespace centfuzz

#endif  // CENTFUZZ_CLUSTERING_HPP_
