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

#include "centfuzz/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "centfuzz/errors.hpp"
#include "centfuzz/rng.hpp"

namespace centfuzz {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Number of distinct rows (exact coordinate equality), via an index sort.
size_t CountDistinctRows(const Matrix& m) {
  if (m.n == 0) return 0;
  std::vector<size_t> idx(m.n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  auto less = [&](size_t a, size_t b) {
    const double* ra = m.Row(a);
    const double* rb = m.Row(b);
    for (size_t j = 0; j < m.d; ++j) {
      if (ra[j] < rb[j]) return true;
      if (ra[j] > rb[j]) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  size_t distinct = 1;
  for (size_t i = 1; i < m.n; ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

// Re-seeds empty clusters at the point currently farthest from its centroid,
// taking points only from clusters that can spare one (size >= 2). Distance
// ties and equal candidates resolve to the lowest point index; empty clusters
// are processed in ascending index order. Returns true if anything changed.
bool RepairEmptyClusters(const Matrix& points, int k, std::vector<int>& assign,
                         std::vector<double>& dist2, std::vector<int>& sizes) {
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    int best = -1;
    double best_d = -1.0;
    for (size_t i = 0; i < points.n; ++i) {
      if (sizes[assign[i]] < 2) continue;
      if (dist2[i] > best_d) {
        best_d = dist2[i];
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;  // nothing to take; caller guards via k <= distinct
    --sizes[assign[best]];
    assign[best] = c;
    sizes[c] = 1;
    dist2[best] = 0.0;  // the point becomes its cluster's centroid
    repaired = true;
  }
  return repaired;
}

// Cluster means from an assignment. Accumulates serially in point-index
// order: the result is a deterministic function of (points, assign).
void ComputeMeans(const Matrix& points, const std::vector<int>& assign, int k,
                  const std::vector<int>& sizes, std::vector<double>& out) {
  out.assign(size_t(k) * points.d, 0.0);
  for (size_t i = 0; i < points.n; ++i) {
    double* c = out.data() + size_t(assign[i]) * points.d;
    const double* x = points.Row(i);
    for (size_t j = 0; j < points.d; ++j) c[j] += x[j];
  }
  for (int c = 0; c < k; ++c) {
    double inv = 1.0 / static_cast<double>(sizes[c]);
    double* row = out.data() + size_t(c) * points.d;
    for (size_t j = 0; j < points.d; ++j) row[j] *= inv;
  }
}

void TallySizes(const std::vector<int>& assign, int k, std::vector<int>& sizes) {
  sizes.assign(k, 0);
  for (int a : assign) ++sizes[a];
}

}  // namespace

void ClusteringParams::Validate() const {
  if (k_min < 1) throw ValidationError("k_min must be >= 1");
  if (k_max < k_min) throw ValidationError("k_max must be >= k_min");
  if (!(tolerance > 0.0))
    throw ValidationError("tolerance must be positive");
}

void ClusterModel::Validate() const {
  if (k < 1) throw ValidationError("model has no clusters");
  if (centroids.size() != size_t(k) * dim)
    throw ValidationError("centroid array shape mismatch");
  if (sizes.size() != size_t(k))
    throw ValidationError("sizes length != k");
  std::vector<int> tally(k, 0);
  for (int a : assignment) {
    if (a < 0 || a >= k) throw ValidationError("assignment index out of range");
    ++tally[a];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] != tally[c])
      throw ValidationError("sizes do not tally the assignment");
    if (sizes[c] == 0)
      throw ValidationError("cluster " + std::to_string(c) + " is empty");
  }
  if (!(sse >= 0.0) || std::isnan(sse))
    throw ValidationError("negative or NaN SSE");
}

double SquaredDistance(const double* x, const double* y, size_t d) {
  double s = 0.0;
  for (size_t j = 0; j < d; ++j) {
    double t = x[j] - y[j];
    s += t * t;
  }
  return s;
}

namespace {

// Shared per-point step so the serial and parallel kernels cannot drift.
inline void AssignPoint(const Matrix& points,
                        const std::vector<double>& centroids, int k, size_t i,
                        int* assign_out, double* dist2_out) {
  const double* x = points.Row(i);
  int best = 0;
  double best_d = SquaredDistance(x, centroids.data(), points.d);
  for (int c = 1; c < k; ++c) {
    double dd = SquaredDistance(x, centroids.data() + size_t(c) * points.d,
                                points.d);
    if (dd < best_d) {  // strict: ties stay with the lowest index
      best_d = dd;
      best = c;
    }
  }
  *assign_out = best;
  *dist2_out = best_d;
}

}  // namespace

void AssignNearestSerial(const Matrix& points,
                         const std::vector<double>& centroids, int k,
                         std::vector<int>& assign, std::vector<double>& dist2) {
  assign.resize(points.n);
  dist2.resize(points.n);
  for (size_t i = 0; i < points.n; ++i)
    AssignPoint(points, centroids, k, i, &assign[i], &dist2[i]);
}

void AssignNearestParallel(const Matrix& points,
                           const std::vector<double>& centroids, int k,
                           std::vector<int>& assign, std::vector<double>& dist2) {
  assign.resize(points.n);
  dist2.resize(points.n);
#if defined(CENTFUZZ_HAVE_OPENMP)
  const long n = static_cast<long>(points.n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i)
    AssignPoint(points, centroids, k, size_t(i), &assign[size_t(i)],
                &dist2[size_t(i)]);
#else
  for (size_t i = 0; i < points.n; ++i)
    AssignPoint(points, centroids, k, i, &assign[i], &dist2[i]);
#endif
}

bool HasParallelKernels() {
#if defined(CENTFUZZ_HAVE_OPENMP)
  return true;
#else
  return false;
#endif
}

ClusterModel KMeans(const Matrix& points, int k,
                    const std::vector<double>& init_centroids, double tolerance,
                    int max_iterations) {
  if (points.n == 0) throw ValidationError("no points to cluster");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (init_centroids.size() != size_t(k) * points.d)
    throw ValidationError("initial centroids must hold k*d values");
  if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  size_t distinct = CountDistinctRows(points);
  if (size_t(k) > distinct)
    throw ValidationError("k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(distinct) + " distinct points");

  std::vector<double> centroids = init_centroids;
  std::vector<int> assign, prev_assign;
  std::vector<double> dist2;
  std::vector<int> sizes;
  std::vector<double> next_centroids;

  AssignNearestParallel(points, centroids, k, assign, dist2);
  TallySizes(assign, k, sizes);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool repaired = RepairEmptyClusters(points, k, assign, dist2, sizes);
    ComputeMeans(points, assign, k, sizes, next_centroids);
    double max_disp2 = 0.0;
    for (int c = 0; c < k; ++c)
      max_disp2 = std::max(
          max_disp2, SquaredDistance(centroids.data() + size_t(c) * points.d,
                                     next_centroids.data() + size_t(c) * points.d,
                                     points.d));
    centroids.swap(next_centroids);

    prev_assign = assign;
    AssignNearestParallel(points, centroids, k, assign, dist2);
    TallySizes(assign, k, sizes);

    // Converged: centroids settled and the fresh assignment (which is the
    // nearest-centroid map for the final centroids) no longer moves points.
    // Exiting here keeps the returned assignment consistent with the
    // returned centroids. The exact-fixed-point test makes tolerance = 0
    // usable: iteration then runs until the assignment stops changing.
    if (!repaired && assign == prev_assign &&
        (std::sqrt(max_disp2) < tolerance || max_disp2 == 0.0))
      break;
  }

  // Iteration-cap backstop: the last assignment may have emptied a cluster.
  // Repair and re-measure so the returned model is structurally consistent.
  bool repaired = RepairEmptyClusters(points, k, assign, dist2, sizes);
  if (repaired) {
    ComputeMeans(points, assign, k, sizes, next_centroids);
    centroids.swap(next_centroids);
    for (size_t i = 0; i < points.n; ++i)
      dist2[i] = SquaredDistance(points.Row(i),
                                 centroids.data() + size_t(assign[i]) * points.d,
                                 points.d);
  }

  ClusterModel model;
  model.k = k;
  model.dim = points.d;
  model.centroids = std::move(centroids);
  model.assignment = std::move(assign);
  model.sizes = std::move(sizes);
  model.sse = 0.0;
  for (size_t i = 0; i < points.n; ++i) model.sse += dist2[i];
  model.Validate();
  return model;
}

double BicScore(const Matrix& points, const ClusterModel& model) {
  model.Validate();
  size_t n = points.n;
  size_t d = points.d;
  int k = model.k;
  if (model.assignment.size() != n)
    throw ValidationError("model assignment does not cover the points");
  if (model.dim != d) throw ValidationError("model dimension mismatch");
  if (n <= size_t(k))
    throw ValidationError("scoring needs more points than clusters");

  std::vector<double> cluster_sse(k, 0.0);
  for (size_t i = 0; i < n; ++i) {
    int c = model.assignment[i];
    cluster_sse[c] += SquaredDistance(points.Row(i), model.Centroid(c), d);
  }
  double sse = 0.0;
  for (int c = 0; c < k; ++c) sse += cluster_sse[c];

  // Pooled spherical variance across all clusters. An exact fit (zero
  // variance) has unbounded likelihood: score it +infinity so it wins any
  // comparison.
  double sigma2 =
      sse / (static_cast<double>(d) * static_cast<double>(n - size_t(k)));
  if (!(sigma2 > 0.0)) return std::numeric_limits<double>::infinity();

  double log_n = std::log(static_cast<double>(n));
  double loglik = 0.0;
  for (int c = 0; c < k; ++c) {
    double r = static_cast<double>(model.sizes[c]);
    loglik += r * (std::log(r) - log_n);
    loglik -= r * static_cast<double>(d) / 2.0 * std::log(2.0 * kPi * sigma2);
    loglik -= cluster_sse[c] / (2.0 * sigma2);
  }
  double p = static_cast<double>((k - 1) + k * static_cast<int>(d) + 1);
  return loglik - 0.5 * p * log_n;
}

namespace {

// k-means++ seeding: first centroid uniform, then each next centroid drawn
// with probability proportional to the squared distance to the nearest
// chosen one. Zero-distance points can never be drawn, so chosen centroids
// are pairwise distinct. Requires distinct(points) >= k (checked by caller).
std::vector<double> SeedPlusPlus(const Matrix& points, int k, Rng& rng) {
  std::vector<double> centroids;
  centroids.reserve(size_t(k) * points.d);
  size_t first = rng.NextBounded(points.n);
  centroids.insert(centroids.end(), points.Row(first),
                   points.Row(first) + points.d);
  std::vector<double> dist2(points.n);
  for (size_t i = 0; i < points.n; ++i)
    dist2[i] = SquaredDistance(points.Row(i), centroids.data(), points.d);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : dist2) total += v;
    size_t pick = points.n;  // sentinel
    if (total > 0.0) {
      double r = rng.NextUnit() * total;
      double cum = 0.0;
      for (size_t i = 0; i < points.n; ++i) {
        cum += dist2[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
      if (pick == points.n) {
        // Rounding pushed r past the last increment; take the last point
        // with positive mass.
        for (size_t i = points.n; i-- > 0;) {
          if (dist2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick == points.n)
      throw ValidationError("k-means++ ran out of distinct points");
    const double* x = points.Row(pick);
    centroids.insert(centroids.end(), x, x + points.d);
    for (size_t i = 0; i < points.n; ++i)
      dist2[i] = std::min(dist2[i],
                          SquaredDistance(points.Row(i), x, points.d));
  }
  return centroids;
}

// Gathers one cluster's rows (in ascending point order) into a dense matrix.
Matrix GatherCluster(const Matrix& points, const std::vector<int>& assign,
                     int c, std::vector<size_t>* member_index) {
  Matrix sub;
  sub.d = points.d;
  for (size_t i = 0; i < points.n; ++i) {
    if (assign[i] != c) continue;
    sub.a.insert(sub.a.end(), points.Row(i), points.Row(i) + points.d);
    ++sub.n;
    if (member_index) member_index->push_back(i);
  }
  return sub;
}

}  // namespace

ClusterModel XMeans(const Matrix& points, const ClusteringParams& params) {
  params.Validate();
  if (points.n == 0) throw ValidationError("no points to cluster");
  if (points.d == 0) throw ValidationError("points have no columns");
  size_t distinct = CountDistinctRows(points);
  if (distinct < size_t(params.k_min))
    throw ValidationError("k_min = " + std::to_string(params.k_min) +
                          " exceeds the " + std::to_string(distinct) +
                          " distinct points");
  // k can never usefully exceed the number of distinct rows.
  int k_cap = static_cast<int>(
      std::min<size_t>(distinct, static_cast<size_t>(params.k_max)));

  Rng rng(params.rng_seed);
  std::vector<double> init = SeedPlusPlus(points, params.k_min, rng);
  ClusterModel model = KMeans(points, params.k_min, init, params.tolerance);

  while (model.k < k_cap) {
    // One structure-improvement pass: try to split each cluster, in index
    // order, as long as room remains.
    std::vector<double> new_centroids;
    int new_k = 0;
    bool any_split = false;
    for (int c = 0; c < model.k; ++c) {
      bool split = false;
      std::vector<double> children;
      int budget_left = k_cap - (model.k + (new_k - c));  // room for one more?
      if (budget_left > 0 && model.sizes[c] >= 3) {
        Matrix sub = GatherCluster(points, model.assignment, c, nullptr);
        if (CountDistinctRows(sub) >= 2) {
          // Parent: the exact 1-cluster fit of the members.
          ClusterModel parent;
          parent.k = 1;
          parent.dim = sub.d;
          parent.centroids.assign(sub.d, 0.0);
          for (size_t i = 0; i < sub.n; ++i)
            for (size_t j = 0; j < sub.d; ++j)
              parent.centroids[j] += sub.Row(i)[j];
          for (size_t j = 0; j < sub.d; ++j)
            parent.centroids[j] /= static_cast<double>(sub.n);
          parent.assignment.assign(sub.n, 0);
          parent.sizes = {static_cast<int>(sub.n)};
          parent.sse = 0.0;
          for (size_t i = 0; i < sub.n; ++i)
            parent.sse +=
                SquaredDistance(sub.Row(i), parent.centroids.data(), sub.d);

          // Children start at the parent centroid displaced both ways along
          // a seeded random direction, scaled by the cluster's RMS radius.
          double rms = std::sqrt(parent.sse / static_cast<double>(sub.n));
          std::vector<double> dir = rng.NextUnitVector(sub.d);
          std::vector<double> child_init(2 * sub.d);
          for (size_t j = 0; j < sub.d; ++j) {
            child_init[j] = parent.centroids[j] + 0.5 * rms * dir[j];
            child_init[sub.d + j] = parent.centroids[j] - 0.5 * rms * dir[j];
          }
          ClusterModel two = KMeans(sub, 2, child_init, params.tolerance);
          double bic_parent = BicScore(sub, parent);
          double bic_children = BicScore(sub, two);
          if (bic_children > bic_parent) {
            split = true;
            children = two.centroids;
          }
        }
      }
      if (split) {
        new_centroids.insert(new_centroids.end(), children.begin(),
                             children.end());
        new_k += 2;
        any_split = true;
      } else {
        new_centroids.insert(new_centroids.end(), model.Centroid(c),
                             model.Centroid(c) + model.dim);
        new_k += 1;
      }
    }
    if (!any_split) break;
    model = KMeans(points, new_k, new_centroids, params.tolerance);
  }

  model.params = params;
  return model;
}

void SaveModel(const ClusterModel& model, const std::filesystem::path& path) {
  model.Validate();
  nlohmann::json j;
  j["format"] = "centfuzz-model";
  j["v"] = 1;
  j["catalog_version"] = model.catalog_version;
  j["k"] = model.k;
  j["dim"] = model.dim;
  j["sse"] = model.sse;
  j["sizes"] = model.sizes;
  j["assignment"] = model.assignment;
  nlohmann::json cents = nlohmann::json::array();
  for (int c = 0; c < model.k; ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (size_t jj = 0; jj < model.dim; ++jj) row.push_back(model.Centroid(c)[jj]);
    cents.push_back(std::move(row));
  }
  j["centroids"] = std::move(cents);
  j["params"] = {{"k_min", model.params.k_min},
                 {"k_max", model.params.k_max},
                 {"tolerance", model.params.tolerance},
                 {"rng_seed", model.params.rng_seed}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EnvironmentError("cannot write model file: " + path.string());
  out << j.dump(2) << "\n";
  if (!out.flush())
    throw EnvironmentError("failed writing model file: " + path.string());
}

ClusterModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed model file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "centfuzz-model")
      throw ParseError("not a model file: " + path.string());
    ClusterModel m;
    m.catalog_version = j.at("catalog_version").get<std::string>();
    m.k = j.at("k").get<int>();
    m.dim = j.at("dim").get<size_t>();
    m.sse = j.at("sse").get<double>();
    m.sizes = j.at("sizes").get<std::vector<int>>();
    m.assignment = j.at("assignment").get<std::vector<int>>();
    const auto& cents = j.at("centroids");
    if (!cents.is_array() || cents.size() != size_t(m.k))
      throw ParseError("model centroid array shape mismatch: " + path.string());
    m.centroids.reserve(size_t(m.k) * m.dim);
    for (const auto& row : cents) {
      if (row.size() != m.dim)
        throw ParseError("model centroid row shape mismatch: " + path.string());
      for (const auto& v : row) m.centroids.push_back(v.get<double>());
    }
    const auto& p = j.at("params");
    m.params.k_min = p.at("k_min").get<int>();
    m.params.k_max = p.at("k_max").get<int>();
    m.params.tolerance = p.at("tolerance").get<double>();
    m.params.rng_seed = p.at("rng_seed").get<uint64_t>();
    m.Validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace centfuzz
