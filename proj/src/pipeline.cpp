#include "kglite/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace kglite {

TrainConfig PipelineConfig::train_config() const {
    TrainConfig tc;
    tc.learning_rate = kge_lr;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.n_neg = kge_n_neg;
    tc.alpha = alpha;
    tc.gamma = gamma;
    tc.seed = mix_seed(seed, "kge");
    tc.clip_gradients = clip_gradients;
    return tc;
}

NegSpec PipelineConfig::neg_spec() const {
    NegSpec ns;
    ns.scheme = neg_scheme_from_string(neg_scheme);
    ns.n_neg = n_neg;
    ns.pool_size = pool_size;
    ns.seed = mix_seed(seed, "decoder-neg");
    ns.exclude_known = exclude_known;
    return ns;
}

GBMConfig PipelineConfig::gbm_config() const {
    GBMConfig gc;
    gc.tree_depth = tree_depth;
    gc.n_trees = n_trees;
    gc.learning_rate = gbm_lr;
    gc.seed = mix_seed(seed, "decoder");
    return gc;
}

std::string manifest_path(const PipelineConfig& c) { return c.out_dir + "/kge.json"; }
std::string partition_path(const PipelineConfig& c) { return c.out_dir + "/partition.tsv"; }
std::string centroid_path(const PipelineConfig& c) { return c.out_dir + "/centroids.txt"; }
std::string selector_meta_path(const PipelineConfig& c) { return c.out_dir + "/selector.json"; }
std::string selector_prefix(const PipelineConfig& c) { return c.out_dir + "/selector_"; }
std::string ensemble_path(const PipelineConfig& c) { return c.out_dir + "/ensemble.json"; }

namespace {

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw usage_error("missing " + what + " path");
    if (!fs::exists(path)) throw usage_error(what + " path does not exist: " + path);
}

void require_artifact(const std::string& path, const std::string& stage) {
    if (!fs::exists(path)) {
        throw data_error("missing artifact " + path + "; run `kglite " + stage + "` first");
    }
}

// stage stamps: skip a stage when its fingerprint and outputs already exist
bool stage_up_to_date(const std::string& stamp_path, const std::string& fingerprint,
                      const std::vector<std::string>& outputs, bool force) {
    if (force) return false;
    std::ifstream in(stamp_path);
    if (!in) return false;
    std::string existing;
    std::getline(in, existing);
    if (existing != fingerprint) return false;
    for (const auto& o : outputs)
        if (!fs::exists(o)) return false;
    return true;
}

void write_stamp(const std::string& stamp_path, const std::string& fingerprint) {
    std::ofstream out(stamp_path);
    out << fingerprint << '\n';
}

std::string fp(std::initializer_list<std::string> parts) {
    std::string joined;
    for (const auto& p : parts) {
        joined += p;
        joined += '|';
    }
    return std::to_string(fnv1a64(joined));
}

void append_seed_manifest(const PipelineConfig& c, const std::string& stage, std::uint64_t value) {
    const std::string path = c.out_dir + "/seeds.json";
    nlohmann::json j;
    {
        std::ifstream in(path);
        if (in) {
            try {
                in >> j;
            } catch (...) {
                j = nlohmann::json::object();
            }
        }
    }
    j["master"] = c.seed;
    j[stage] = value;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct LoadedStack {
    TripleStore store;
    EmbeddingModel model;
    RelationPartition partition;
    FeatureSelector selector;
};

LoadedStack load_stack(const PipelineConfig& c, bool need_selector) {
    LoadedStack s;
    s.store = load_configured_dataset(c);
    require_artifact(manifest_path(c), "train-kge");
    s.model = load_model(manifest_path(c), s.store.num_entities(), s.store.num_relations());
    if (need_selector) {
        require_artifact(partition_path(c), "prune");
        require_artifact(selector_meta_path(c), "prune");
        s.partition = load_partition(partition_path(c), centroid_path(c));
        s.selector = load_selector(selector_meta_path(c), selector_prefix(c));
    }
    return s;
}

DecoderEnsemble train_groups(const TripleStore& store, const EmbeddingModel& model,
                             const RelationPartition& partition, const FeatureSelector& selector,
                             const NegSpec& ns, const GBMConfig& gc, ClassifierKind kind,
                             const TypePools& pools, const FilterIndex& filter) {
    DecoderEnsemble ensemble;
    for (std::int32_t g = 0; g < partition.k; ++g) {
        const auto samples = build_training_set(g, store, selector, partition, ns, model, pools, &filter);
        ensemble.classifiers.push_back(train_classifier(samples, gc, kind));
    }
    return ensemble;
}

// validation metric for the hyperparameter grid: link-prediction MRR or
// triple-classification accuracy, per the configured task
double validation_metric(const PipelineConfig& c, const TripleStore& store,
                         const EmbeddingModel& model, const RelationPartition& partition,
                         const FeatureSelector& selector, const DecoderEnsemble& ensemble,
                         const FilterIndex& filter) {
    DecoderScorer scorer(ensemble, selector, partition, model);
    if (c.task == "tc") {
        if (store.valid_neg.empty())
            throw data_error("grid search with task=tc needs labeled validation negatives");
        std::map<std::int32_t, std::vector<std::pair<double, int>>> val;
        for (const Triple& t : store.valid) val[t.r].push_back({scorer.score(t.h, t.r, t.t), 1});
        for (const Triple& t : store.valid_neg) val[t.r].push_back({scorer.score(t.h, t.r, t.t), 0});
        const auto thresholds = tune_thresholds(val);
        std::int64_t correct = 0, total = 0;
        for (const auto& [rel, samples] : val) {
            for (const auto& [score, label] : samples) {
                const bool pred = score >= thresholds.get(rel);
                correct += (pred == (label == 1));
                ++total;
            }
        }
        return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }
    std::vector<Triple> queries = store.valid;
    if (c.grid_sample > 0 && queries.size() > static_cast<std::size_t>(c.grid_sample)) {
        Rng rng(mix_seed(c.seed, "grid-sample"));
        rng.shuffle(queries);
        queries.resize(c.grid_sample);
    }
    if (queries.empty()) throw data_error("grid search needs a validation split");
    return link_prediction_over(scorer, queries, filter, c.threads).mrr;
}

}  // namespace

TripleStore load_configured_dataset(const PipelineConfig& c) {
    require_file(c.train_path, "train");
    require_file(c.valid_path, "valid");
    require_file(c.test_path, "test");
    if (!c.valid_neg_path.empty()) require_file(c.valid_neg_path, "valid-neg");
    if (!c.test_neg_path.empty()) require_file(c.test_neg_path, "test-neg");
    return load_dataset(c.train_path, c.valid_path, c.test_path, c.valid_neg_path, c.test_neg_path);
}

void cmd_train_kge(const PipelineConfig& c) {
    fs::create_directories(c.out_dir);
    const std::string stamp = c.out_dir + "/train-kge.stamp";
    const std::string fingerprint =
        fp({"train-kge", c.train_path, c.valid_path, c.test_path, c.family, std::to_string(c.d),
            num(c.kge_lr), std::to_string(c.epochs), std::to_string(c.batch_size),
            std::to_string(c.kge_n_neg), num(c.alpha), num(c.gamma),
            std::to_string(c.clip_gradients), std::to_string(c.seed)});
    if (stage_up_to_date(stamp, fingerprint, {manifest_path(c)}, c.force)) {
        std::cerr << "train-kge: up to date\n";
        return;
    }

    const TripleStore store = load_configured_dataset(c);
    const TrainConfig tc = c.train_config();
    std::cerr << "train-kge: " << c.family << " d=" << c.d << " on |T|=" << store.train.size()
              << " |E|=" << store.num_entities() << " |R|=" << store.num_relations() << "\n";
    TrainResult result = train(store, family_from_string(c.family), c.d, tc);

    save_model(result.model, manifest_path(c), tc.seed);
    save_vocab(c.out_dir + "/entities.vocab", c.out_dir + "/relations.vocab", store.vocab);
    {
        std::ofstream loss(c.out_dir + "/kge_loss.csv");
        loss << "epoch,loss\n";
        for (std::size_t i = 0; i < result.epoch_loss.size(); ++i)
            loss << (i + 1) << ',' << result.epoch_loss[i] << '\n';
    }
    append_seed_manifest(c, "train-kge", tc.seed);
    write_stamp(stamp, fingerprint);
    std::cerr << "train-kge: final epoch loss " << result.epoch_loss.back() << "\n";
}

void cmd_prune(const PipelineConfig& c) {
    fs::create_directories(c.out_dir);
    if (c.d_out > c.d) throw usage_error("d_out must not exceed d");
    const std::string stamp = c.out_dir + "/prune.stamp";
    const std::string fingerprint =
        fp({"prune", std::to_string(c.k), std::to_string(c.d_out), std::to_string(c.dft_neg_ratio),
            std::to_string(c.dft_bins), c.prune_scheme, std::to_string(c.normalize_relations),
            std::to_string(c.seed), c.train_path});
    if (stage_up_to_date(stamp, fingerprint, {partition_path(c), selector_meta_path(c)}, c.force)) {
        std::cerr << "prune: up to date\n";
        return;
    }

    LoadedStack s = load_stack(c, false);
    const std::uint64_t part_seed = mix_seed(c.seed, "partition");
    s.partition = cluster_relations(s.model, c.k, part_seed, 100, c.normalize_relations);
    save_partition(s.partition, partition_path(c), centroid_path(c));

    const std::uint64_t dft_seed = mix_seed(c.seed, "dft");
    const FeatureSelector selector =
        select_features(s.model, s.store, s.partition, c.d_out, c.dft_neg_ratio, dft_seed,
                        prune_scheme_from_string(c.prune_scheme), c.dft_bins, c.threads);
    save_selector(selector, selector_meta_path(c), selector_prefix(c));
    for (std::size_t g = 0; g < selector.groups.size(); ++g)
        write_dft_curve_csv(selector.groups[g], c.out_dir + "/dft_curve_g" + std::to_string(g) + ".csv");

    append_seed_manifest(c, "partition", part_seed);
    append_seed_manifest(c, "dft", dft_seed);
    write_stamp(stamp, fingerprint);
    std::cerr << "prune: k=" << c.k << " d_out=" << selector.d_out << " scheme=" << c.prune_scheme
              << "\n";
}

void cmd_train_decoder(const PipelineConfig& c) {
    fs::create_directories(c.out_dir);
    const std::string stamp = c.out_dir + "/train-decoder.stamp";
    const std::string fingerprint =
        fp({"train-decoder", c.neg_scheme, std::to_string(c.n_neg), std::to_string(c.pool_size),
            std::to_string(c.exclude_known), c.classifier, std::to_string(c.tree_depth),
            std::to_string(c.n_trees), num(c.gbm_lr), std::to_string(c.grid),
            std::to_string(c.grid_sample), c.task, std::to_string(c.seed)});
    if (stage_up_to_date(stamp, fingerprint, {ensemble_path(c)}, c.force)) {
        std::cerr << "train-decoder: up to date\n";
        return;
    }

    LoadedStack s = load_stack(c, true);
    const TypePools pools = build_type_pools(s.store);
    const FilterIndex filter = build_filter_index(s.store);
    const NegSpec ns = c.neg_spec();
    const ClassifierKind kind = classifier_kind_from_string(c.classifier);

    DecoderEnsemble best;
    if (!c.grid) {
        best = train_groups(s.store, s.model, s.partition, s.selector, ns, c.gbm_config(), kind,
                            pools, filter);
    } else {
        // grid from the evaluation protocol, judged on the validation set
        const int depths[] = {3, 5, 7};
        const int trees[] = {100, 300, 500, 700, 1000};
        const double rates[] = {0.05, 0.1, 0.3};
        double best_metric = -1.0;
        std::ofstream log(c.out_dir + "/grid.csv");
        log << "depth,trees,lr,metric\n";
        for (int depth : depths) {
            for (int nt : trees) {
                for (double lr : rates) {
                    GBMConfig gc = c.gbm_config();
                    gc.tree_depth = depth;
                    gc.n_trees = nt;
                    gc.learning_rate = lr;
                    DecoderEnsemble cand = train_groups(s.store, s.model, s.partition, s.selector,
                                                        ns, gc, kind, pools, filter);
                    const double metric = validation_metric(c, s.store, s.model, s.partition,
                                                            s.selector, cand, filter);
                    log << depth << ',' << nt << ',' << lr << ',' << metric << '\n';
                    std::cerr << "grid depth=" << depth << " trees=" << nt << " lr=" << lr
                              << " metric=" << metric << "\n";
                    if (metric > best_metric) {
                        best_metric = metric;
                        best = std::move(cand);
                    }
                }
            }
        }
    }

    save_ensemble(best, ensemble_path(c));
    append_seed_manifest(c, "decoder-negatives", ns.seed);
    append_seed_manifest(c, "decoder", c.gbm_config().seed);
    write_stamp(stamp, fingerprint);
    std::cerr << "train-decoder: " << best.classifiers.size() << " group classifier(s)\n";
}

namespace {

void write_link_report(const std::string& csv_path, const std::string& summary_path,
                       const EvalReport& rep) {
    std::ofstream csv(csv_path);
    csv << "mrr,hits1,hits3,hits10,mrr_tail,mrr_head,queries\n";
    csv << rep.mrr << ',' << rep.hits.at(1) << ',' << rep.hits.at(3) << ',' << rep.hits.at(10)
        << ',' << rep.mrr_tail << ',' << rep.mrr_head << ',' << rep.n_queries << '\n';
    std::ofstream sum(summary_path);
    sum << rep.summary();
}

}  // namespace

void cmd_eval(const PipelineConfig& c) {
    fs::create_directories(c.out_dir);
    LoadedStack s = load_stack(c, !c.eval_raw);
    const FilterIndex filter = build_filter_index(s.store);

    std::unique_ptr<DecoderEnsemble> ensemble;
    std::unique_ptr<Scorer> scorer;
    if (c.eval_raw) {
        scorer = std::make_unique<KgeScorer>(s.model);
    } else {
        require_artifact(ensemble_path(c), "train-decoder");
        ensemble = std::make_unique<DecoderEnsemble>(load_ensemble(ensemble_path(c)));
        scorer = std::make_unique<DecoderScorer>(*ensemble, s.selector, s.partition, s.model);
    }
    const std::string tag = c.eval_raw ? "_raw" : "";

    if (c.task == "lp" || c.task == "both") {
        std::vector<QueryRank> ranks;
        const EvalReport rep = link_prediction(*scorer, s.store, filter, c.threads,
                                               c.dump_ranks ? &ranks : nullptr);
        write_link_report(c.out_dir + "/eval_link" + tag + ".csv",
                          c.out_dir + "/eval_link" + tag + ".txt", rep);
        if (c.dump_ranks) {
            std::ofstream out(c.out_dir + "/ranks" + tag + ".csv");
            out << "h,r,t,direction,rank\n";
            for (const auto& q : ranks) {
                out << s.store.vocab.entity_name(q.triple.h) << ','
                    << s.store.vocab.relation_name(q.triple.r) << ','
                    << s.store.vocab.entity_name(q.triple.t) << ','
                    << (q.tail_query ? "tail" : "head") << ',' << q.rank << '\n';
            }
        }
        std::cout << rep.summary();
    }

    if (c.task == "tc" || c.task == "both") {
        if (s.store.valid_neg.empty() || s.store.test_neg.empty())
            throw data_error("triple classification needs labeled valid/test negatives");
        std::map<std::int32_t, std::vector<std::pair<double, int>>> val;
        for (const Triple& t : s.store.valid) val[t.r].push_back({scorer->score(t.h, t.r, t.t), 1});
        for (const Triple& t : s.store.valid_neg)
            val[t.r].push_back({scorer->score(t.h, t.r, t.t), 0});
        const ThresholdTable thresholds = tune_thresholds(val);
        {
            std::ofstream out(c.out_dir + "/thresholds.tsv");
            for (const auto& [rel, thr] : thresholds.per_relation) out << rel << '\t' << thr << '\n';
            out << "*\t" << thresholds.fallback << '\n';
        }
        const TcReport rep = triple_classification(*scorer, s.store, thresholds);
        std::ofstream csv(c.out_dir + "/eval_tc" + tag + ".csv");
        csv << "accuracy,f1,tp,fp,tn,fn\n";
        csv << rep.accuracy << ',' << rep.f1 << ',' << rep.tp << ',' << rep.fp << ',' << rep.tn
            << ',' << rep.fn << '\n';
        std::cout << "accuracy: " << rep.accuracy << "\nF1:       " << rep.f1 << "\n";
    }

    // parameter audit
    std::ofstream params(c.out_dir + "/params" + tag + ".csv");
    params << "component,parameters\n";
    if (c.eval_raw) {
        params << "embedding," << count_parameters(s.model).embedding << '\n';
    } else {
        const ParamCounts counts = count_parameters(s.model, &s.selector, ensemble.get());
        // deployed footprint: entity/relation tables pruned to d_out plus the
        // selector and the trees
        const std::int64_t pruned = embedding_param_count(
            s.model.family, s.selector.d_out, s.model.num_entities, s.model.num_relations);
        params << "embedding_full," << counts.embedding << '\n';
        params << "embedding_pruned," << pruned << '\n';
        params << "selector," << counts.selector << '\n';
        params << "decoder," << counts.decoder << '\n';
        params << "deployed_total," << pruned + counts.selector + counts.decoder << '\n';
    }
}

void cmd_sweep_dim(const PipelineConfig& c, const std::vector<int>& dims, bool svg) {
    fs::create_directories(c.out_dir);
    if (dims.empty()) throw usage_error("sweep-dim needs at least one dimension");
    for (int d : dims)
        if (d < 1 || d > c.d) throw usage_error("sweep dimension out of range: " + std::to_string(d));

    LoadedStack s = load_stack(c, false);
    const TypePools pools = build_type_pools(s.store);
    const FilterIndex filter = build_filter_index(s.store);
    s.partition = cluster_relations(s.model, c.k, mix_seed(c.seed, "partition"), 100,
                                    c.normalize_relations);
    // one full scoring pass; each d_out is a prefix of the same curve
    FeatureSelector full = select_features(s.model, s.store, s.partition, c.d, c.dft_neg_ratio,
                                           mix_seed(c.seed, "dft"),
                                           prune_scheme_from_string(c.prune_scheme), c.dft_bins,
                                           c.threads);

    std::ofstream csv(c.out_dir + "/sweep_dim.csv");
    csv << "d_out,mrr,hits1,hits3,hits10,parameters\n";
    std::vector<double> xs, mrrs;
    for (int d_out : dims) {
        FeatureSelector sel = full;
        sel.d_out = d_out;
        for (auto& g : sel.groups) {
            if (c.prune_scheme == "highest")
                g.selected.assign(g.curve.end() - d_out, g.curve.end());
            else
                g.selected.assign(g.curve.begin(), g.curve.begin() + d_out);
        }
        DecoderEnsemble ensemble = train_groups(s.store, s.model, s.partition, sel, c.neg_spec(),
                                                c.gbm_config(),
                                                classifier_kind_from_string(c.classifier), pools,
                                                filter);
        DecoderScorer scorer(ensemble, sel, s.partition, s.model);
        const EvalReport rep = link_prediction(scorer, s.store, filter, c.threads);
        const ParamCounts counts = count_parameters(s.model, &sel, &ensemble);
        csv << d_out << ',' << rep.mrr << ',' << rep.hits.at(1) << ',' << rep.hits.at(3) << ','
            << rep.hits.at(10) << ',' << counts.selector + counts.decoder << '\n';
        xs.push_back(d_out);
        mrrs.push_back(rep.mrr);
        std::cerr << "sweep-dim d_out=" << d_out << " mrr=" << rep.mrr << "\n";
    }
    if (svg) write_svg_line(c.out_dir + "/sweep_dim.svg", xs, {mrrs}, {"MRR"}, "d_out", "MRR");
}

void cmd_sweep_k(const PipelineConfig& c, const std::vector<int>& ks, bool svg) {
    fs::create_directories(c.out_dir);
    if (ks.empty()) throw usage_error("sweep-k needs at least one k");

    LoadedStack s = load_stack(c, false);
    const TypePools pools = build_type_pools(s.store);
    const FilterIndex filter = build_filter_index(s.store);

    std::ofstream csv(c.out_dir + "/sweep_k.csv");
    csv << "k,mrr,hits1,hits3,hits10,parameters\n";
    std::vector<double> xs, mrrs;
    for (int k : ks) {
        RelationPartition part = cluster_relations(s.model, k, mix_seed(c.seed, "partition"), 100,
                                                   c.normalize_relations);
        FeatureSelector sel = select_features(s.model, s.store, part, c.d_out, c.dft_neg_ratio,
                                              mix_seed(c.seed, "dft"),
                                              prune_scheme_from_string(c.prune_scheme), c.dft_bins,
                                              c.threads);
        DecoderEnsemble ensemble = train_groups(s.store, s.model, part, sel, c.neg_spec(),
                                                c.gbm_config(),
                                                classifier_kind_from_string(c.classifier), pools,
                                                filter);
        DecoderScorer scorer(ensemble, sel, part, s.model);
        const EvalReport rep = link_prediction(scorer, s.store, filter, c.threads);
        const ParamCounts counts = count_parameters(s.model, &sel, &ensemble);
        csv << k << ',' << rep.mrr << ',' << rep.hits.at(1) << ',' << rep.hits.at(3) << ','
            << rep.hits.at(10) << ',' << counts.selector + counts.decoder << '\n';
        xs.push_back(k);
        mrrs.push_back(rep.mrr);
        std::cerr << "sweep-k k=" << k << " mrr=" << rep.mrr << "\n";
    }
    if (svg) write_svg_line(c.out_dir + "/sweep_k.svg", xs, {mrrs}, {"MRR"}, "k", "MRR");
}

void cmd_export_scores(const PipelineConfig& c, const std::string& query_head,
                       const std::string& query_rel) {
    fs::create_directories(c.out_dir);
    LoadedStack s = load_stack(c, true);
    require_artifact(ensemble_path(c), "train-decoder");
    const DecoderEnsemble ensemble = load_ensemble(ensemble_path(c));
    const DecoderScorer decoder(ensemble, s.selector, s.partition, s.model);
    const KgeScorer kge(s.model);

    // KGE score vs decoder probability for test positives and one uniform
    // corruption each (scatter-plot data)
    Rng rng(mix_seed(c.seed, "export"));
    std::ofstream out(c.out_dir + "/scores.csv");
    out << "h,r,t,label,kge_score,decoder_score\n";
    auto emit = [&](const Triple& t, int label) {
        out << s.store.vocab.entity_name(t.h) << ',' << s.store.vocab.relation_name(t.r) << ','
            << s.store.vocab.entity_name(t.t) << ',' << label << ',' << kge.score(t.h, t.r, t.t)
            << ',' << decoder.score(t.h, t.r, t.t) << '\n';
    };
    for (const Triple& t : s.store.test) {
        emit(t, 1);
        const auto negs = sample_negatives_uniform(t, 1, s.store.num_entities(), rng);
        emit(negs[0], 0);
    }

    // full candidate distribution for one (h, r, ?) query
    if (!query_head.empty() && !query_rel.empty()) {
        const std::int32_t h = s.store.vocab.entity_id(query_head);
        const std::int32_t r = s.store.vocab.relation_id(query_rel);
        std::vector<double> scores(static_cast<std::size_t>(s.store.num_entities()));
        decoder.score_tails(h, r, scores);
        std::vector<std::int32_t> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        std::ofstream q(c.out_dir + "/query_scores.csv");
        q << "rank,candidate,score\n";
        for (std::size_t i = 0; i < order.size(); ++i)
            q << (i + 1) << ',' << s.store.vocab.entity_name(order[i]) << ',' << scores[order[i]]
              << '\n';
    }
}

void write_svg_line(const std::string& path, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& series,
                    const std::vector<std::string>& labels, const std::string& x_label,
                    const std::string& y_label) {
    if (xs.empty() || series.empty()) throw std::invalid_argument("write_svg_line: empty data");
    const int width = 640, height = 420, margin = 50;
    double xmin = xs.front(), xmax = xs.front();
    for (double x : xs) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    double ymin = series[0][0], ymax = series[0][0];
    for (const auto& ys : series)
        for (double y : ys) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };

    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[s % 4] << "\" points=\"";
        for (std::size_t i = 0; i < xs.size() && i < series[s].size(); ++i)
            out << px(xs[i]) << ',' << py(series[s][i]) << ' ';
        out << "\"/>\n";
        if (s < labels.size()) {
            out << "<text x=\"" << width - margin - 100 << "\" y=\"" << margin + 16 * (s + 1)
                << "\" fill=\"" << colors[s % 4] << "\" font-size=\"12\">" << labels[s]
                << "</text>\n";
        }
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
        << height / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
    out << "</svg>\n";
}

}  // namespace kglite
