// kglite command-line pipeline: train-kge -> prune -> train-decoder -> eval,
// plus ablation sweeps and score export. Every option can come from a
// key=value config file (--config) and be overridden by its flag.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kglite/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"kglite: lightweight knowledge-graph completion pipeline"};
    app.set_config("--config", "", "key=value config file; flags override file values");
    app.require_subcommand(1);

    kglite::PipelineConfig cfg;

    app.add_option("--train", cfg.train_path, "train triples (head<TAB>rel<TAB>tail)");
    app.add_option("--valid", cfg.valid_path, "validation triples");
    app.add_option("--test", cfg.test_path, "test triples");
    app.add_option("--valid-neg", cfg.valid_neg_path, "labeled validation negatives");
    app.add_option("--test-neg", cfg.test_neg_path, "labeled test negatives");

    app.add_option("--family", cfg.family, "TransE | DistMult | RotatE | ComplEx");
    app.add_option("--dim", cfg.d, "embedding dimension d");
    app.add_option("--kge-lr", cfg.kge_lr, "KGE learning rate");
    app.add_option("--epochs", cfg.epochs, "KGE training epochs");
    app.add_option("--batch-size", cfg.batch_size, "KGE batch size");
    app.add_option("--kge-neg", cfg.kge_n_neg, "negatives per positive in KGE training");
    app.add_option("--alpha", cfg.alpha, "self-adversarial temperature");
    app.add_option("--gamma", cfg.gamma, "margin for distance families");
    app.add_flag("--clip-gradients", cfg.clip_gradients, "clip batch gradients at norm 1");

    app.add_option("--k", cfg.k, "number of relation groups");
    app.add_option("--dout", cfg.d_out, "pruned feature dimension d_out");
    app.add_option("--dft-neg-ratio", cfg.dft_neg_ratio, "uniform negatives per positive for DFT");
    app.add_option("--dft-bins", cfg.dft_bins, "candidate thresholds in the DFT scan");
    app.add_option("--prune-scheme", cfg.prune_scheme, "lowest | highest | random | none");
    app.add_flag("--normalize-relations", cfg.normalize_relations,
                 "L2-normalize relation embeddings before clustering");

    app.add_option("--neg-scheme", cfg.neg_scheme, "random | ontology | embedding");
    app.add_option("--n-neg", cfg.n_neg, "negatives per positive for the decoder");
    app.add_option("--pool-size", cfg.pool_size, "candidate pool m for embedding negatives");
    app.add_flag("!--no-exclude-known", cfg.exclude_known,
                 "allow known true triples in the embedding-negative pool");
    app.add_option("--classifier", cfg.classifier, "gbdt | tree | forest");
    app.add_option("--tree-depth", cfg.tree_depth, "tree depth");
    app.add_option("--n-trees", cfg.n_trees, "boosting rounds / forest size");
    app.add_option("--gbm-lr", cfg.gbm_lr, "boosting learning rate");
    app.add_flag("--grid", cfg.grid, "hyperparameter grid search on the validation set");
    app.add_option("--grid-sample", cfg.grid_sample,
                   "cap validation queries per grid point (0 = all)");

    app.add_option("--task", cfg.task, "lp | tc | both");
    app.add_flag("--eval-raw", cfg.eval_raw, "evaluate the raw KGE scores (skip the decoder)");
    app.add_flag("--dump-ranks", cfg.dump_ranks, "write per-query ranks CSV");

    app.add_option("--seed", cfg.seed, "master seed; all stage seeds derive from it");
    app.add_option("--threads", cfg.threads, "worker threads");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_flag("--force", cfg.force, "rerun stages even when artifacts are up to date");

    auto* sub_train = app.add_subcommand("train-kge", "train baseline embeddings");
    auto* sub_prune = app.add_subcommand("prune", "partition relations and select features");
    auto* sub_decoder = app.add_subcommand("train-decoder", "train per-group classifiers");
    auto* sub_eval = app.add_subcommand("eval", "link prediction / triple classification");

    std::vector<int> sweep_dims{8, 16, 32};
    bool svg = false;
    auto* sub_sweep_dim = app.add_subcommand("sweep-dim", "MRR as a function of d_out");
    sub_sweep_dim->add_option("--dims", sweep_dims, "d_out values to sweep");
    sub_sweep_dim->add_flag("--svg", svg, "also write a minimal SVG plot");

    std::vector<int> sweep_ks{1, 2, 3, 4, 5};
    auto* sub_sweep_k = app.add_subcommand("sweep-k", "MRR as a function of k");
    sub_sweep_k->add_option("--ks", sweep_ks, "k values to sweep");
    sub_sweep_k->add_flag("--svg", svg, "also write a minimal SVG plot");

    std::string query_head, query_rel;
    auto* sub_export = app.add_subcommand("export-scores", "raw score export for plots");
    sub_export->add_option("--query-head", query_head, "head entity name for a (h,r,?) dump");
    sub_export->add_option("--query-rel", query_rel, "relation name for a (h,r,?) dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sub_train->parsed()) kglite::cmd_train_kge(cfg);
        if (sub_prune->parsed()) kglite::cmd_prune(cfg);
        if (sub_decoder->parsed()) kglite::cmd_train_decoder(cfg);
        if (sub_eval->parsed()) kglite::cmd_eval(cfg);
        if (sub_sweep_dim->parsed()) kglite::cmd_sweep_dim(cfg, sweep_dims, svg);
        if (sub_sweep_k->parsed()) kglite::cmd_sweep_k(cfg, sweep_ks, svg);
        if (sub_export->parsed()) kglite::cmd_export_scores(cfg, query_head, query_rel);
    } catch (const kglite::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kglite::numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
