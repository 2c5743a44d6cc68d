#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sltk/metrics.hpp"

namespace sltk::diar {

struct VadSegment {
    std::string recording_id;
    double start = 0.0;
    double end = 0.0;
};

struct EmbeddingRecord {
    std::string segment_id;
    std::string recording_id;
    double start = 0.0;
    double end = 0.0;
    std::vector<double> vector;
};

struct ClusteringConfig {
    double max_single_segment_time = 8.0;
    double min_tail = 0.5;
    double prune_fraction = 0.3;
    int max_speakers = 8;
    std::optional<int> fixed_k;
    int kmeans_restarts = 10;
    std::uint64_t seed = 0;
    double gap_merge = 0.0;

    void validate() const;  // throws std::invalid_argument
};

/// Greedy chunking into max_single_segment_time pieces; a remainder shorter
/// than min_tail is merged into the previous chunk. Total covered time is
/// preserved exactly.
std::vector<VadSegment> split_segments(std::span<const VadSegment> segs,
                                       const ClusteringConfig& cfg);

/// A[i][j] = (1 + cos(v_i, v_j)) / 2. Rejects zero-norm or non-finite vectors.
Eigen::MatrixXd cosine_affinity(std::span<const EmbeddingRecord> records);

/// Keeps the ceil(p*n) largest entries per row (diagonal always kept),
/// then symmetrizes with the elementwise maximum.
Eigen::MatrixXd prune_symmetrize(const Eigen::MatrixXd& affinity, double prune_fraction);

struct KEstimate {
    int k = 1;
    std::vector<double> eigenvalues;  // ascending, normalized Laplacian
};

/// Eigengap estimate on the normalized Laplacian; fixed_k overrides.
/// Zero-degree rows become singleton clusters before the Laplacian is built.
KEstimate estimate_k(const Eigen::MatrixXd& affinity, const ClusteringConfig& cfg);

struct DiarizationResult {
    std::vector<metrics::TimedSegment> labeled;  // speaker = cluster label "0".."k-1"
    int k = 1;
    std::vector<double> eigenvalues;
};

/// Full pipeline: affinity -> prune -> estimate_k -> spectral embedding ->
/// seeded k-means. Deterministic for a fixed config seed.
DiarizationResult cluster(std::span<const EmbeddingRecord> records,
                          const ClusteringConfig& cfg);

/// Adjacent same-speaker segments with gap <= gap_merge are merged; one RTTM
/// line per final segment, times to 3 decimals.
std::string emit_rttm(const DiarizationResult& result, double gap_merge = 0.0);

}  // namespace sltk::diar
