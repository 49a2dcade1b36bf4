#ifndef KGLITE_DFT_HPP
#define KGLITE_DFT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/embedding.hpp"
#include "kglite/partition.hpp"

namespace kglite {

struct LabeledTriple {
    Triple triple;
    std::uint8_t label = 0;  // 1 = observed, 0 = sampled negative
};

/// One scored embedding dimension: the 1-D PCA basis over its n_v triple
/// variables, the training-time column means, and the best split found by
/// the cross-entropy scan.
struct DimensionRecord {
    int dim = 0;
    std::vector<double> mean;   // n_v column means (fit on training samples)
    std::vector<double> basis;  // n_v, unit norm, first nonzero component positive
    double threshold = 0.0;
    double entropy = 0.0;  // minimal weighted cross-entropy H
    bool degenerate = false;
};

struct Pca1dResult {
    std::vector<double> mean;
    std::vector<double> basis;
    double singular_value = 0.0;
    bool degenerate = false;
};

/// First principal direction of the mean-centered rows: the right singular
/// vector of the largest singular value. An all-zero centered matrix sets the
/// degenerate flag and returns the first canonical axis.
Pca1dResult fit_pca_1d(const std::vector<double>& rows, std::size_t n_rows, int n_cols);

struct DftSplit {
    double entropy = 0.0;
    double threshold = 0.0;
    bool degenerate = false;  // all values identical, entropy of the unsplit set
};

/// Scans n_bins uniformly spaced thresholds strictly inside the value range
/// and returns the minimal weighted cross-entropy
///   H = (N_L * H_L + N_R * H_R) / (N_L + N_R)
/// with natural-log binary entropies and 0*log(0) = 0. Ties go to the lowest
/// candidate threshold. Requires at least one sample of each label.
DftSplit dft_cross_entropy(std::span<const double> values, std::span<const std::uint8_t> labels,
                           int n_bins = 31);

enum class PruneScheme { lowest, highest, random, none };

PruneScheme prune_scheme_from_string(const std::string& s);
std::string prune_scheme_to_string(PruneScheme s);

struct GroupSelector {
    std::vector<DimensionRecord> selected;  // length d_out, ascending entropy
    std::vector<DimensionRecord> curve;     // all d dims, ascending entropy
};

/// Per-group pruned feature extractor: selected dimensions plus their PCA
/// bases and means. project() maps a triple to d_out scalars.
struct FeatureSelector {
    Family family = Family::TransE;
    int nv = 0;
    int d = 0;
    int d_out = 0;
    PruneScheme scheme = PruneScheme::lowest;
    std::vector<GroupSelector> groups;

    /// Feature j = (v - mean_j) . basis_j at the j-th selected dimension,
    /// using the training-time means.
    void project(std::int32_t group, std::int32_t h, std::int32_t r, std::int32_t t,
                 const EmbeddingModel& model, double* out) const;
};

/// Labeled DFT samples for one group: its train triples labeled 1 plus
/// neg_ratio uniform corruptions per positive labeled 0.
std::vector<LabeledTriple> make_dft_samples(const TripleStore& store,
                                            const RelationPartition& partition, std::int32_t group,
                                            int neg_ratio, std::uint64_t seed);

/// Rows of the labeled samples' dim-th triple variables, n_v columns,
/// flattened row-major.
std::vector<double> assemble_dim_variables(const EmbeddingModel& model,
                                           std::span<const LabeledTriple> samples, int dim);

/// Scores every dimension of every group with PCA + cross-entropy and keeps
/// d_out dimensions per group according to the pruning scheme (default: the
/// lowest cross-entropy, i.e. the most discriminant). Degenerate dimensions
/// are assigned the worst observed entropy plus a margin so they are never
/// selected.
FeatureSelector select_features(const EmbeddingModel& model, const TripleStore& store,
                                const RelationPartition& partition, int d_out, int neg_ratio,
                                std::uint64_t seed, PruneScheme scheme = PruneScheme::lowest,
                                int n_bins = 31, int threads = 1);

/// Per-group persistence: lines "dim<TAB>H<TAB>threshold<TAB>means<TAB>basis"
/// with space-separated vectors, plus a JSON header with the shared metadata.
void save_selector(const FeatureSelector& s, const std::string& meta_path,
                   const std::string& group_path_prefix);
FeatureSelector load_selector(const std::string& meta_path, const std::string& group_path_prefix);

/// Sorted (rank, dim, H) rows of one group's pruning curve as CSV.
void write_dft_curve_csv(const GroupSelector& g, const std::string& path);

}  // namespace kglite

#endif  // KGLITE_DFT_HPP
