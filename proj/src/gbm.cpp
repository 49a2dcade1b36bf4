#include "kglite/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace kglite {

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "gbdt") return ClassifierKind::gbdt;
    if (s == "tree") return ClassifierKind::tree;
    if (s == "forest") return ClassifierKind::forest;
    throw data_error("unknown classifier kind: " + s);
}

std::string classifier_kind_to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::gbdt: return "gbdt";
        case ClassifierKind::tree: return "tree";
        case ClassifierKind::forest: return "forest";
    }
    return "?";
}

std::size_t RegressionTree::leaf_count() const {
    std::size_t c = 0;
    for (const auto& n : nodes)
        if (n.is_leaf()) ++c;
    return c;
}

double GroupClassifier::predict(std::span<const double> features) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.eval(features);
    double margin;
    if (kind == ClassifierKind::forest) {
        margin = base_score + (trees.empty() ? 0.0 : acc / static_cast<double>(trees.size()));
    } else {
        margin = base_score + learning_rate * acc;
    }
    const double p = sigmoid(margin);
    return std::min(1.0 - 1e-15, std::max(1e-15, p));
}

std::int64_t GroupClassifier::parameter_count() const {
    std::int64_t c = 0;
    for (const auto& t : trees) {
        for (const auto& n : t.nodes) c += n.is_leaf() ? 1 : 2;
    }
    return c;
}

SampleSet build_training_set(std::int32_t group, const TripleStore& store,
                             const FeatureSelector& selector, const RelationPartition& partition,
                             const NegSpec& spec, const EmbeddingModel& model,
                             const TypePools& pools, const FilterIndex* filter) {
    spec.validate();
    std::vector<Triple> positives;
    for (const Triple& t : store.train)
        if (partition.group_of(t.r) == group) positives.push_back(t);
    if (positives.empty())
        throw data_error("group " + std::to_string(group) + " has no training triples");

    SampleSet set;
    set.n_features = selector.d_out;
    const std::size_t total = positives.size() * static_cast<std::size_t>(1 + spec.n_neg);
    set.x.resize(total * selector.d_out);
    set.y.resize(total);

    Rng rng(mix_seed(spec.seed, "decoder-negatives", static_cast<std::uint64_t>(group)));
    std::size_t row = 0;
    for (const Triple& pos : positives) {
        selector.project(group, pos.h, pos.r, pos.t, model, set.x.data() + row * selector.d_out);
        set.y[row] = 1;
        ++row;
        const auto negs = draw_negatives(spec, pos, pools, model, filter, rng);
        for (const Triple& neg : negs) {
            selector.project(group, neg.h, neg.r, neg.t, model, set.x.data() + row * selector.d_out);
            set.y[row] = 0;
            ++row;
        }
    }
    return set;
}

namespace {

constexpr double kLambda = 1.0;      // L2 on leaf values
constexpr double kMinGain = 1e-12;

double leaf_value(double g, double h) { return -g / (h + kLambda); }

double split_gain(double gl, double hl, double gr, double hr) {
    const double g = gl + gr, h = hl + hr;
    return gl * gl / (hl + kLambda) + gr * gr / (hr + kLambda) - g * g / (h + kLambda);
}

// Exact greedy tree over presorted feature columns. Weights carry bootstrap
// multiplicities; weight-0 samples are ignored.
RegressionTree fit_tree(const SampleSet& samples, const std::vector<double>& grad,
                        const std::vector<double>& hess, const std::vector<std::uint32_t>& weight,
                        const std::vector<std::vector<std::uint32_t>>& feature_order,
                        int max_depth) {
    const std::size_t n = samples.size();
    const int nf = samples.n_features;

    RegressionTree tree;
    struct NodeAgg {
        double g = 0.0, h = 0.0;
        std::size_t count = 0;
        int depth = 0;
    };
    std::vector<NodeAgg> agg;
    std::vector<std::int32_t> node_of(n, -1);

    NodeAgg root;
    for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] == 0) continue;
        node_of[i] = 0;
        const double w = weight[i];
        root.g += w * grad[i];
        root.h += w * hess[i];
        root.count += weight[i];
    }
    tree.nodes.push_back(TreeNode{});
    agg.push_back(root);

    std::vector<std::int32_t> level = {0};
    struct Best {
        double gain = kMinGain;
        int feature = -1;
        double threshold = 0.0;
    };

    for (int depth = 0; depth < max_depth && !level.empty(); ++depth) {
        std::vector<Best> best(tree.nodes.size());
        struct Scan {
            double gl, hl;
            double prev;
            bool has_prev;
        };
        std::vector<Scan> scan(tree.nodes.size());

        for (int f = 0; f < nf; ++f) {
            for (std::int32_t nd : level) scan[nd] = {0.0, 0.0, 0.0, false};
            for (std::uint32_t i : feature_order[f]) {
                const std::int32_t nd = node_of[i];
                if (nd < 0 || agg[nd].depth != depth) continue;
                Scan& s = scan[nd];
                const double x = samples.x[i * nf + f];
                if (s.has_prev && s.prev < x) {
                    const double gr = agg[nd].g - s.gl;
                    const double hr = agg[nd].h - s.hl;
                    const double gain = split_gain(s.gl, s.hl, gr, hr);
                    if (gain > best[nd].gain) {
                        double thr = 0.5 * (s.prev + x);
                        if (!(s.prev < thr && thr < x)) thr = s.prev;
                        best[nd].gain = gain;
                        best[nd].feature = f;
                        best[nd].threshold = thr;
                    }
                }
                const double w = weight[i];
                s.gl += w * grad[i];
                s.hl += w * hess[i];
                s.prev = x;
                s.has_prev = true;
            }
        }

        std::vector<std::int32_t> next_level;
        for (std::int32_t nd : level) {
            if (best[nd].feature < 0 || agg[nd].count < 2) {
                tree.nodes[nd].value = leaf_value(agg[nd].g, agg[nd].h);
                continue;
            }
            TreeNode& node = tree.nodes[nd];
            node.feature = best[nd].feature;
            node.threshold = best[nd].threshold;
            node.left = static_cast<std::int32_t>(tree.nodes.size());
            node.right = node.left + 1;
            tree.nodes.push_back(TreeNode{});
            tree.nodes.push_back(TreeNode{});
            agg.push_back(NodeAgg{0.0, 0.0, 0, depth + 1});
            agg.push_back(NodeAgg{0.0, 0.0, 0, depth + 1});
            next_level.push_back(node.left);
            next_level.push_back(node.right);
        }

        if (next_level.empty()) break;
        for (std::size_t i = 0; i < n; ++i) {
            const std::int32_t nd = node_of[i];
            if (nd < 0 || tree.nodes[nd].is_leaf() || agg[nd].depth != depth) continue;
            const TreeNode& node = tree.nodes[nd];
            const std::int32_t child =
                samples.x[i * nf + node.feature] <= node.threshold ? node.left : node.right;
            node_of[i] = child;
            const double w = weight[i];
            agg[child].g += w * grad[i];
            agg[child].h += w * hess[i];
            agg[child].count += weight[i];
        }
        level = std::move(next_level);
    }

    // whatever remains on the last level becomes leaves
    for (std::int32_t nd : level) {
        if (tree.nodes[nd].is_leaf() && tree.nodes[nd].left < 0)
            tree.nodes[nd].value = leaf_value(agg[nd].g, agg[nd].h);
    }
    return tree;
}

double log_loss(const std::vector<double>& margin, const std::vector<std::uint8_t>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        s -= y[i] ? log_sigmoid(margin[i]) : log_sigmoid(-margin[i]);
    return s / static_cast<double>(y.size());
}

std::vector<std::vector<std::uint32_t>> presort_features(const SampleSet& samples) {
    const std::size_t n = samples.size();
    const int nf = samples.n_features;
    std::vector<std::vector<std::uint32_t>> order(nf, std::vector<std::uint32_t>(n));
    for (int f = 0; f < nf; ++f) {
        auto& ord = order[f];
        std::iota(ord.begin(), ord.end(), 0u);
        std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double xa = samples.x[a * nf + f], xb = samples.x[b * nf + f];
            if (xa != xb) return xa < xb;
            return a < b;
        });
    }
    return order;
}

}  // namespace

GroupClassifier train_classifier(const SampleSet& samples, const GBMConfig& config,
                                 ClassifierKind kind) {
    config.validate();
    const std::size_t n = samples.size();
    if (n == 0) throw data_error("train_classifier: empty sample set");
    std::size_t n_pos = 0;
    for (std::uint8_t v : samples.y) n_pos += v;
    if (n_pos == 0 || n_pos == n)
        throw data_error("train_classifier: both labels must be present");

    GroupClassifier clf;
    clf.kind = kind;
    const double p = static_cast<double>(n_pos) / static_cast<double>(n);
    clf.base_score = std::log(p / (1.0 - p));
    clf.learning_rate = kind == ClassifierKind::tree ? 1.0 : config.learning_rate;
    const int rounds = kind == ClassifierKind::tree ? 1 : config.n_trees;

    const auto feature_order = presort_features(samples);
    std::vector<double> margin(n, clf.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<std::uint32_t> weight(n, 1);

    double current_loss = log_loss(margin, samples.y);
    for (int round = 0; round < rounds; ++round) {
        if (kind == ClassifierKind::forest) {
            // independent bootstrap resample per tree
            Rng rng(mix_seed(config.seed, "forest-bootstrap", static_cast<std::uint64_t>(round)));
            std::fill(weight.begin(), weight.end(), 0u);
            for (std::size_t i = 0; i < n; ++i)
                ++weight[rng.uniform_int(static_cast<std::int64_t>(n))];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double q = sigmoid(margin[i]);
            grad[i] = q - static_cast<double>(samples.y[i]);
            hess[i] = std::max(q * (1.0 - q), 1e-16);
        }
        RegressionTree tree =
            fit_tree(samples, grad, hess, weight, feature_order, config.tree_depth);

        if (kind == ClassifierKind::forest) {
            clf.trees.push_back(std::move(tree));
            // forest margin: base + running mean of tree outputs
            std::vector<double> m(n);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (const auto& t : clf.trees) acc += t.eval(samples.row(i));
                m[i] = clf.base_score + acc / static_cast<double>(clf.trees.size());
            }
            clf.train_loss.push_back(log_loss(m, samples.y));
            continue;
        }

        std::vector<double> delta(n);
        for (std::size_t i = 0; i < n; ++i) delta[i] = tree.eval(samples.row(i));

        // damp a step that would increase the training loss
        double scale = 1.0;
        std::vector<double> trial(n);
        double trial_loss = current_loss;
        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = margin[i] + clf.learning_rate * scale * delta[i];
            trial_loss = log_loss(trial, samples.y);
            if (trial_loss <= current_loss) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            scale = 0.0;
            trial = margin;
            trial_loss = current_loss;
        }
        if (scale != 1.0) {
            for (auto& node : tree.nodes)
                if (node.is_leaf()) node.value *= scale;
        }
        margin = std::move(trial);
        current_loss = trial_loss;
        clf.trees.push_back(std::move(tree));
        clf.train_loss.push_back(current_loss);
    }
    return clf;
}

double DecoderEnsemble::predict(const Triple& t, const FeatureSelector& selector,
                                const RelationPartition& partition,
                                const EmbeddingModel& model) const {
    const std::int32_t g = partition.group_of(t.r);
    std::vector<double> features(selector.d_out);
    selector.project(g, t.h, t.r, t.t, model, features.data());
    return classifiers.at(g).predict(features);
}

void save_ensemble(const DecoderEnsemble& e, const std::string& path) {
    nlohmann::json doc;
    doc["version"] = 1;
    auto& arr = doc["classifiers"] = nlohmann::json::array();
    for (const auto& clf : e.classifiers) {
        nlohmann::json c;
        c["kind"] = classifier_kind_to_string(clf.kind);
        c["base_score"] = clf.base_score;
        c["learning_rate"] = clf.learning_rate;
        auto& trees = c["trees"] = nlohmann::json::array();
        for (const auto& t : clf.trees) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& n : t.nodes)
                nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
            trees.push_back(std::move(nodes));
        }
        arr.push_back(std::move(c));
    }
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << doc.dump() << '\n';
}

DecoderEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open ensemble: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path + ": bad ensemble json: " + e.what());
    }
    if (doc.value("version", 0) != 1) throw data_error(path + ": unsupported ensemble version");

    DecoderEnsemble e;
    for (const auto& c : doc.at("classifiers")) {
        GroupClassifier clf;
        clf.kind = classifier_kind_from_string(c.at("kind").get<std::string>());
        clf.base_score = c.at("base_score").get<double>();
        clf.learning_rate = c.at("learning_rate").get<double>();
        for (const auto& t : c.at("trees")) {
            RegressionTree tree;
            for (const auto& n : t) {
                TreeNode node;
                node.feature = n.at(0).get<std::int32_t>();
                node.threshold = n.at(1).get<double>();
                node.left = n.at(2).get<std::int32_t>();
                node.right = n.at(3).get<std::int32_t>();
                node.value = n.at(4).get<double>();
                tree.nodes.push_back(node);
            }
            clf.trees.push_back(std::move(tree));
        }
        e.classifiers.push_back(std::move(clf));
    }
    return e;
}

}  // namespace kglite
