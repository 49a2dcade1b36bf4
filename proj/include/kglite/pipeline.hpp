#ifndef KGLITE_PIPELINE_HPP
#define KGLITE_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/dft.hpp"
#include "kglite/embedding.hpp"
#include "kglite/eval.hpp"
#include "kglite/gbm.hpp"
#include "kglite/partition.hpp"
#include "kglite/sampling.hpp"

namespace kglite {

/// Everything a pipeline run needs; populated from the config file and CLI
/// flags. All stage randomness derives from `seed`.
struct PipelineConfig {
    // dataset
    std::string train_path, valid_path, test_path;
    std::string valid_neg_path, test_neg_path;

    // representation learning
    std::string family = "RotatE";
    int d = 32;
    double kge_lr = 0.05;
    int epochs = 200;
    int batch_size = 512;
    int kge_n_neg = 8;
    double alpha = 1.0;
    double gamma = 12.0;
    bool clip_gradients = false;

    // feature pruning
    int k = 3;
    int d_out = 8;
    int dft_neg_ratio = 1;
    int dft_bins = 31;
    std::string prune_scheme = "lowest";
    bool normalize_relations = false;

    // decision learning
    std::string neg_scheme = "embedding";
    int n_neg = 2;
    int pool_size = 32;
    bool exclude_known = true;
    std::string classifier = "gbdt";
    int tree_depth = 5;
    int n_trees = 1000;
    double gbm_lr = 0.3;
    bool grid = false;       // hyperparameter grid search on the validation set
    int grid_sample = 0;     // cap on validation queries per grid point, 0 = all

    // evaluation
    std::string task = "lp";  // lp | tc | both
    bool eval_raw = false;    // score with the raw KGE instead of the decoder
    bool dump_ranks = false;

    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "out";
    bool force = false;

    TrainConfig train_config() const;
    NegSpec neg_spec() const;
    GBMConfig gbm_config() const;
};

// artifact locations inside out_dir
std::string manifest_path(const PipelineConfig& c);
std::string partition_path(const PipelineConfig& c);
std::string centroid_path(const PipelineConfig& c);
std::string selector_meta_path(const PipelineConfig& c);
std::string selector_prefix(const PipelineConfig& c);
std::string ensemble_path(const PipelineConfig& c);

// Stage commands. Each writes its artifacts plus a stamp with a config
// fingerprint; rerunning with identical config and existing artifacts is a
// no-op unless force is set.
void cmd_train_kge(const PipelineConfig& c);
void cmd_prune(const PipelineConfig& c);
void cmd_train_decoder(const PipelineConfig& c);
void cmd_eval(const PipelineConfig& c);
void cmd_sweep_dim(const PipelineConfig& c, const std::vector<int>& dims, bool svg);
void cmd_sweep_k(const PipelineConfig& c, const std::vector<int>& ks, bool svg);
void cmd_export_scores(const PipelineConfig& c, const std::string& query_head,
                       const std::string& query_rel);

// shared helpers
TripleStore load_configured_dataset(const PipelineConfig& c);

/// Data-only line plot: one polyline per series, no styling knobs.
void write_svg_line(const std::string& path, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& series,
                    const std::vector<std::string>& labels, const std::string& x_label,
                    const std::string& y_label);

}  // namespace kglite

#endif  // KGLITE_PIPELINE_HPP
