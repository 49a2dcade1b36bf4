#ifndef KGLITE_GBM_HPP
#define KGLITE_GBM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kglite/dataset.hpp"
#include "kglite/dft.hpp"
#include "kglite/sampling.hpp"

namespace kglite {

struct GBMConfig {
    int tree_depth = 5;
    int n_trees = 1000;
    double learning_rate = 0.3;
    std::uint64_t seed = 1;

    void validate() const {
        if (tree_depth < 1) throw std::invalid_argument("tree_depth must be >= 1");
        if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
        if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    }
};

enum class ClassifierKind { gbdt, tree, forest };

ClassifierKind classifier_kind_from_string(const std::string& s);
std::string classifier_kind_to_string(ClassifierKind k);

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // goes left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf output

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double eval(std::span<const double> x) const {
        std::int32_t i = 0;
        while (!nodes[i].is_leaf())
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
    std::size_t leaf_count() const;
};

/// Labeled feature samples, row-major.
struct SampleSet {
    int n_features = 0;
    std::vector<double> x;       // n * n_features
    std::vector<std::uint8_t> y;

    std::size_t size() const { return y.size(); }
    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * n_features, static_cast<std::size_t>(n_features)};
    }
};

/// One relation group's binary classifier g(.): a boosted (or bagged) tree
/// ensemble over pruned triple features, producing a probability in (0,1).
struct GroupClassifier {
    ClassifierKind kind = ClassifierKind::gbdt;
    double base_score = 0.0;  // log-odds of the training positive rate
    double learning_rate = 0.3;
    std::vector<RegressionTree> trees;
    std::vector<double> train_loss;  // training log-loss after each round

    double predict(std::span<const double> features) const;
    std::int64_t parameter_count() const;  // 2 per split + 1 per leaf, actual node counts
};

/// Labeled training features for one group: every train triple of the group
/// labeled 1 plus spec.n_neg sampled negatives per positive labeled 0,
/// projected through the selector.
SampleSet build_training_set(std::int32_t group, const TripleStore& store,
                             const FeatureSelector& selector, const RelationPartition& partition,
                             const NegSpec& spec, const EmbeddingModel& model,
                             const TypePools& pools, const FilterIndex* filter);

/// Gradient boosting on the logistic loss. Each round fits a depth-limited
/// regression tree to the current negative gradient with exact greedy splits
/// (second-order gain, minimum one sample per leaf). A round whose step would
/// increase the training log-loss is damped by halving its leaf values, so
/// the recorded loss curve is non-increasing. Throws data_error when only one
/// label is present.
GroupClassifier train_classifier(const SampleSet& samples, const GBMConfig& config,
                                 ClassifierKind kind = ClassifierKind::gbdt);

/// One classifier per relation group.
struct DecoderEnsemble {
    std::vector<GroupClassifier> classifiers;

    double predict(const Triple& t, const FeatureSelector& selector,
                   const RelationPartition& partition, const EmbeddingModel& model) const;
};

// versioned JSON document
void save_ensemble(const DecoderEnsemble& e, const std::string& path);
DecoderEnsemble load_ensemble(const std::string& path);

}  // namespace kglite

#endif  // KGLITE_GBM_HPP
