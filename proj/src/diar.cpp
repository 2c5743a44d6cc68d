#include "sltk/diar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sltk::diar {

namespace {

double next_unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t next_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

struct LaplacianEigs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns match values
};

LaplacianEigs laplacian_eigs(const Eigen::MatrixXd& affinity) {
    const Eigen::Index n = affinity.rows();
    Eigen::VectorXd degree = affinity.rowwise().sum();
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(degree(i) > 0.0))
            throw std::invalid_argument("laplacian: zero-degree node");
        inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
    }
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) -
                          inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal();
    // Symmetrize against round-off before the eigensolve.
    lap = 0.5 * (lap + lap.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("laplacian: eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

int eigengap_k(const Eigen::VectorXd& eigenvalues, int max_speakers) {
    const int n = static_cast<int>(eigenvalues.size());
    const int cap = std::min(max_speakers, n);
    int best_k = 1;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < cap; ++k) {
        double gap = eigenvalues(k) - eigenvalues(k - 1);
        if (gap > best_gap) {
            best_gap = gap;
            best_k = k;
        }
    }
    return best_k;
}

Eigen::MatrixXd spectral_embedding(const LaplacianEigs& eigs, int k) {
    Eigen::MatrixXd embed = eigs.vectors.leftCols(k);
    for (Eigen::Index i = 0; i < embed.rows(); ++i) {
        double norm = embed.row(i).norm();
        if (norm > 0.0) embed.row(i) /= norm;
    }
    return embed;
}

std::vector<int> kmeans_pp_init(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    std::vector<int> centers;
    centers.push_back(static_cast<int>(next_index(rng, static_cast<std::size_t>(n))));
    Eigen::VectorXd dist2 = (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        double total = dist2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            double target = next_unit_double(rng) * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2(i);
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<Eigen::Index>(next_index(rng, static_cast<std::size_t>(n)));
        }
        centers.push_back(static_cast<int>(chosen));
        Eigen::VectorXd d = (points.rowwise() - points.row(chosen)).rowwise().squaredNorm();
        dist2 = dist2.cwiseMin(d);
    }
    return centers;
}

struct KMeansRun {
    std::vector<int> labels;
    double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun kmeans_once(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    std::vector<int> centers = kmeans_pp_init(points, k, rng);
    Eigen::MatrixXd centroids(k, d);
    for (int c = 0; c < k; ++c) centroids.row(c) = points.row(centers[c]);

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double dd = (points.row(i) - centroids.row(c)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        std::vector<Eigen::Index> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) ++counts[labels[i]];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            // Re-seed an empty cluster with the point farthest from its centroid.
            Eigen::Index far = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[labels[i]] <= 1) continue;
                double dd = (points.row(i) - centroids.row(labels[i])).squaredNorm();
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            --counts[labels[far]];
            labels[far] = c;
            counts[c] = 1;
            changed = true;
        }
        centroids.setZero();
        for (Eigen::Index i = 0; i < n; ++i) centroids.row(labels[i]) += points.row(i);
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.row(c) /= static_cast<double>(counts[c]);
        if (!changed && iter > 0) break;
    }

    KMeansRun run;
    run.labels = std::move(labels);
    run.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        run.inertia += (points.row(i) - centroids.row(run.labels[i])).squaredNorm();
    return run;
}

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, int restarts,
                        std::mt19937_64& rng) {
    KMeansRun best;
    for (int r = 0; r < std::max(1, restarts); ++r) {
        KMeansRun run = kmeans_once(points, k, rng);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best.labels;
}

}  // namespace

void ClusteringConfig::validate() const {
    if (!(max_single_segment_time > 0.0))
        throw std::invalid_argument("max_single_segment_time must be > 0");
    if (min_tail < 0.0) throw std::invalid_argument("min_tail must be >= 0");
    if (!(prune_fraction > 0.0 && prune_fraction <= 1.0))
        throw std::invalid_argument("prune_fraction must be in (0, 1]");
    if (max_speakers < 1) throw std::invalid_argument("max_speakers must be >= 1");
    if (fixed_k && *fixed_k < 1) throw std::invalid_argument("fixed_k must be >= 1");
    if (kmeans_restarts < 1) throw std::invalid_argument("kmeans_restarts must be >= 1");
    if (gap_merge < 0.0) throw std::invalid_argument("gap_merge must be >= 0");
}

std::vector<VadSegment> split_segments(std::span<const VadSegment> segs,
                                       const ClusteringConfig& cfg) {
    cfg.validate();
    std::map<std::string, double> last_end;
    std::vector<VadSegment> out;
    for (const VadSegment& seg : segs) {
        if (!(seg.start < seg.end))
            throw std::invalid_argument("vad segment for '" + seg.recording_id +
                                        "' has start >= end");
        auto it = last_end.find(seg.recording_id);
        if (it != last_end.end() && seg.start < it->second)
            throw std::invalid_argument("vad segments for '" + seg.recording_id +
                                        "' overlap or are unsorted");
        last_end[seg.recording_id] = seg.end;

        std::size_t first_piece = out.size();
        double t = seg.start;
        while (seg.end - t > cfg.max_single_segment_time) {
            out.push_back({seg.recording_id, t, t + cfg.max_single_segment_time});
            t += cfg.max_single_segment_time;
        }
        out.push_back({seg.recording_id, t, seg.end});
        if (out.size() - first_piece >= 2 && (seg.end - t) < cfg.min_tail) {
            out.pop_back();
            out.back().end = seg.end;
        }
    }
    return out;
}

Eigen::MatrixXd cosine_affinity(std::span<const EmbeddingRecord> records) {
    if (records.empty()) throw std::invalid_argument("cosine_affinity: no records");
    const std::size_t n = records.size();
    const std::size_t d = records[0].vector.size();
    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = records[i].vector;
        if (v.size() != d)
            throw std::invalid_argument("embedding '" + records[i].segment_id +
                                        "' has dimension " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(d));
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(v[j]))
                throw std::invalid_argument("embedding '" + records[i].segment_id +
                                            "' has a non-finite entry");
            x(i, j) = v[j];
        }
        double norm = x.row(i).norm();
        if (!(norm > 0.0))
            throw std::invalid_argument("embedding '" + records[i].segment_id +
                                        "' has zero norm");
        x.row(i) /= norm;
    }
    Eigen::MatrixXd a = (x * x.transpose()).eval();
    a = ((a.array() + 1.0) * 0.5).cwiseMin(1.0).cwiseMax(0.0);
    a.diagonal().setOnes();
    return 0.5 * (a + a.transpose()).eval();
}

Eigen::MatrixXd prune_symmetrize(const Eigen::MatrixXd& affinity, double prune_fraction) {
    if (affinity.rows() != affinity.cols())
        throw std::invalid_argument("prune_symmetrize: matrix must be square");
    if (!(prune_fraction > 0.0 && prune_fraction <= 1.0))
        throw std::invalid_argument("prune_symmetrize: fraction must be in (0, 1]");
    const Eigen::Index n = affinity.rows();
    const auto keep = std::min<Eigen::Index>(
        n, std::max<Eigen::Index>(
               1, static_cast<Eigen::Index>(
                      std::ceil(prune_fraction * static_cast<double>(n) - 1e-9))));
    Eigen::MatrixXd pruned = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return affinity(i, a) > affinity(i, b);
        });
        for (Eigen::Index r = 0; r < keep; ++r) pruned(i, order[r]) = affinity(i, order[r]);
        pruned(i, i) = affinity(i, i);
    }
    return pruned.cwiseMax(pruned.transpose().eval());
}

KEstimate estimate_k(const Eigen::MatrixXd& affinity, const ClusteringConfig& cfg) {
    cfg.validate();
    if (affinity.rows() == 0) throw std::invalid_argument("estimate_k: empty matrix");
    if (affinity.rows() != affinity.cols())
        throw std::invalid_argument("estimate_k: matrix must be square");
    const Eigen::Index n = affinity.rows();

    // Zero-degree nodes become singleton clusters ahead of the Laplacian.
    std::vector<Eigen::Index> connected;
    for (Eigen::Index i = 0; i < n; ++i)
        if (affinity.row(i).sum() > 0.0) connected.push_back(i);
    const Eigen::Index isolated = n - static_cast<Eigen::Index>(connected.size());

    KEstimate est;
    if (connected.empty()) {
        est.k = static_cast<int>(n);
        if (cfg.fixed_k) est.k = *cfg.fixed_k;
        return est;
    }
    Eigen::MatrixXd sub(connected.size(), connected.size());
    for (std::size_t i = 0; i < connected.size(); ++i)
        for (std::size_t j = 0; j < connected.size(); ++j)
            sub(i, j) = affinity(connected[i], connected[j]);
    LaplacianEigs eigs = laplacian_eigs(sub);
    est.eigenvalues.assign(eigs.values.data(), eigs.values.data() + eigs.values.size());
    if (cfg.fixed_k) {
        est.k = *cfg.fixed_k;
        return est;
    }
    est.k = eigengap_k(eigs.values, cfg.max_speakers) + static_cast<int>(isolated);
    return est;
}

DiarizationResult cluster(std::span<const EmbeddingRecord> records,
                          const ClusteringConfig& cfg) {
    cfg.validate();
    if (records.empty()) throw std::invalid_argument("cluster: no records");
    const Eigen::Index n = static_cast<Eigen::Index>(records.size());

    Eigen::MatrixXd affinity = prune_symmetrize(cosine_affinity(records), cfg.prune_fraction);
    LaplacianEigs eigs = laplacian_eigs(affinity);

    DiarizationResult result;
    result.eigenvalues.assign(eigs.values.data(), eigs.values.data() + eigs.values.size());
    int k = cfg.fixed_k ? *cfg.fixed_k : eigengap_k(eigs.values, cfg.max_speakers);
    k = std::max(1, std::min<int>(k, static_cast<int>(n)));
    result.k = k;

    std::vector<int> labels(n, 0);
    if (k > 1) {
        Eigen::MatrixXd embed = spectral_embedding(eigs, k);
        std::mt19937_64 rng(cfg.seed);
        labels = kmeans(embed, k, cfg.kmeans_restarts, rng);
    }
    result.labeled.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        metrics::TimedSegment seg;
        seg.recording_id = records[i].recording_id;
        seg.speaker = std::to_string(labels[i]);
        seg.start = records[i].start;
        seg.end = records[i].end;
        result.labeled.push_back(std::move(seg));
    }
    return result;
}

std::string emit_rttm(const DiarizationResult& result, double gap_merge) {
    if (gap_merge < 0.0) throw std::invalid_argument("emit_rttm: gap_merge must be >= 0");
    std::map<std::string, std::map<std::string, std::vector<metrics::TimedSegment>>> grouped;
    for (const metrics::TimedSegment& seg : result.labeled)
        grouped[seg.recording_id][seg.speaker].push_back(seg);

    std::vector<metrics::TimedSegment> merged;
    for (auto& [rec, by_speaker] : grouped) {
        for (auto& [spk, segs] : by_speaker) {
            std::stable_sort(segs.begin(), segs.end(),
                             [](const metrics::TimedSegment& a, const metrics::TimedSegment& b) {
                                 return a.start < b.start;
                             });
            for (const metrics::TimedSegment& seg : segs) {
                if (!merged.empty() && merged.back().recording_id == rec &&
                    merged.back().speaker == spk &&
                    seg.start - merged.back().end <= gap_merge) {
                    merged.back().end = std::max(merged.back().end, seg.end);
                } else {
                    merged.push_back(seg);
                }
            }
        }
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const metrics::TimedSegment& a, const metrics::TimedSegment& b) {
                         if (a.recording_id != b.recording_id)
                             return a.recording_id < b.recording_id;
                         if (a.start != b.start) return a.start < b.start;
                         return a.speaker < b.speaker;
                     });
    std::string out;
    for (const metrics::TimedSegment& seg : merged) {
        out += metrics::format_rttm_line(seg);
        out += '\n';
    }
    return out;
}

}  // namespace sltk::diar
