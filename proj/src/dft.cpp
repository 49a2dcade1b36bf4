#include "kglite/dft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace kglite {

PruneScheme prune_scheme_from_string(const std::string& s) {
    if (s == "lowest") return PruneScheme::lowest;
    if (s == "highest") return PruneScheme::highest;
    if (s == "random") return PruneScheme::random;
    if (s == "none") return PruneScheme::none;
    throw data_error("unknown pruning scheme: " + s);
}

std::string prune_scheme_to_string(PruneScheme s) {
    switch (s) {
        case PruneScheme::lowest: return "lowest";
        case PruneScheme::highest: return "highest";
        case PruneScheme::random: return "random";
        case PruneScheme::none: return "none";
    }
    return "?";
}

Pca1dResult fit_pca_1d(const std::vector<double>& rows, std::size_t n_rows, int n_cols) {
    if (n_rows < 2) throw std::invalid_argument("fit_pca_1d: need at least 2 rows");
    if (rows.size() != n_rows * static_cast<std::size_t>(n_cols))
        throw std::invalid_argument("fit_pca_1d: shape mismatch");

    Pca1dResult res;
    res.mean.assign(n_cols, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i)
        for (int j = 0; j < n_cols; ++j) res.mean[j] += rows[i * n_cols + j];
    for (int j = 0; j < n_cols; ++j) res.mean[j] /= static_cast<double>(n_rows);

    // Gram matrix of the centered data; its top eigenpair gives the first
    // principal direction and squared singular value.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n_cols, n_cols);
    double max_abs = 0.0;
    std::vector<double> centered(n_cols);
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (int j = 0; j < n_cols; ++j) {
            centered[j] = rows[i * n_cols + j] - res.mean[j];
            max_abs = std::max(max_abs, std::abs(centered[j]));
        }
        for (int a = 0; a < n_cols; ++a)
            for (int b = a; b < n_cols; ++b) gram(a, b) += centered[a] * centered[b];
    }
    for (int a = 0; a < n_cols; ++a)
        for (int b = 0; b < a; ++b) gram(a, b) = gram(b, a);

    res.basis.assign(n_cols, 0.0);
    if (max_abs == 0.0) {
        res.degenerate = true;
        res.basis[0] = 1.0;
        return res;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    const int top = n_cols - 1;  // eigenvalues ascending
    res.singular_value = std::sqrt(std::max(0.0, solver.eigenvalues()(top)));
    Eigen::VectorXd w = solver.eigenvectors().col(top);
    for (int j = 0; j < n_cols; ++j) {
        if (std::abs(w(j)) > 1e-12) {
            if (w(j) < 0.0) w = -w;
            break;
        }
    }
    for (int j = 0; j < n_cols; ++j) res.basis[j] = w(j);
    return res;
}

namespace {

double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

}  // namespace

DftSplit dft_cross_entropy(std::span<const double> values, std::span<const std::uint8_t> labels,
                           int n_bins) {
    const std::size_t n = values.size();
    if (n != labels.size()) throw std::invalid_argument("dft_cross_entropy: size mismatch");
    if (n_bins < 1) throw std::invalid_argument("dft_cross_entropy: n_bins must be >= 1");
    std::size_t n_pos = 0;
    for (std::uint8_t y : labels) n_pos += y;
    if (n_pos == 0 || n_pos == n)
        throw std::invalid_argument("dft_cross_entropy: need both labels present");

    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {
        DftSplit s;
        s.degenerate = true;
        s.threshold = lo;
        s.entropy = binary_entropy(static_cast<double>(n_pos) / static_cast<double>(n));
        return s;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> sorted(n);
    std::vector<std::size_t> pos_prefix(n + 1, 0);  // positives among the first i sorted samples
    for (std::size_t i = 0; i < n; ++i) {
        sorted[i] = values[order[i]];
        pos_prefix[i + 1] = pos_prefix[i] + labels[order[i]];
    }

    DftSplit best;
    best.entropy = std::numeric_limits<double>::infinity();
    const double span = hi - lo;
    for (int b = 1; b <= n_bins; ++b) {
        const double thr = lo + span * static_cast<double>(b) / static_cast<double>(n_bins + 1);
        // left interval: values <= thr; both sides non-empty because thr is
        // strictly inside [lo, hi]
        const std::size_t n_left =
            static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), thr) - sorted.begin());
        const std::size_t n_right = n - n_left;
        const double h_left = binary_entropy(static_cast<double>(pos_prefix[n_left]) /
                                             static_cast<double>(n_left));
        const double h_right = binary_entropy(static_cast<double>(n_pos - pos_prefix[n_left]) /
                                              static_cast<double>(n_right));
        const double h = (static_cast<double>(n_left) * h_left +
                          static_cast<double>(n_right) * h_right) /
                         static_cast<double>(n);
        if (h < best.entropy) {
            best.entropy = h;
            best.threshold = thr;
        }
    }
    return best;
}

std::vector<LabeledTriple> make_dft_samples(const TripleStore& store,
                                            const RelationPartition& partition, std::int32_t group,
                                            int neg_ratio, std::uint64_t seed) {
    if (neg_ratio < 1) throw std::invalid_argument("make_dft_samples: neg_ratio must be >= 1");
    std::vector<LabeledTriple> samples;
    for (const Triple& t : store.train) {
        if (partition.group_of(t.r) == group) samples.push_back({t, 1});
    }
    if (samples.empty())
        throw data_error("group " + std::to_string(group) + " has no training triples");

    const std::size_t n_pos = samples.size();
    Rng rng(mix_seed(seed, "dft-negatives", static_cast<std::uint64_t>(group)));
    for (std::size_t i = 0; i < n_pos; ++i) {
        const auto negs =
            sample_negatives_uniform(samples[i].triple, neg_ratio, store.num_entities(), rng);
        for (const Triple& t : negs) samples.push_back({t, 0});
    }
    return samples;
}

std::vector<double> assemble_dim_variables(const EmbeddingModel& model,
                                           std::span<const LabeledTriple> samples, int dim) {
    const int nv = nv_of(model.family);
    std::vector<double> rows(samples.size() * static_cast<std::size_t>(nv));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Triple& t = samples[i].triple;
        model.dim_variables(t.h, t.r, t.t, dim, rows.data() + i * nv);
    }
    return rows;
}

namespace {

double project_one(const double* vars, const DimensionRecord& rec, int nv) {
    double e = 0.0;
    for (int j = 0; j < nv; ++j) e += (vars[j] - rec.mean[j]) * rec.basis[j];
    return e;
}

}  // namespace

void FeatureSelector::project(std::int32_t group, std::int32_t h, std::int32_t r, std::int32_t t,
                              const EmbeddingModel& model, double* out) const {
    const GroupSelector& g = groups.at(group);
    double vars[6];
    for (std::size_t j = 0; j < g.selected.size(); ++j) {
        const DimensionRecord& rec = g.selected[j];
        model.dim_variables(h, r, t, rec.dim, vars);
        out[j] = project_one(vars, rec, nv);
    }
}

FeatureSelector select_features(const EmbeddingModel& model, const TripleStore& store,
                                const RelationPartition& partition, int d_out, int neg_ratio,
                                std::uint64_t seed, PruneScheme scheme, int n_bins, int threads) {
    if (scheme == PruneScheme::none) d_out = model.d;
    if (d_out < 1 || d_out > model.d)
        throw std::invalid_argument("select_features: need 1 <= d_out <= d");

    FeatureSelector sel;
    sel.family = model.family;
    sel.nv = nv_of(model.family);
    sel.d = model.d;
    sel.d_out = d_out;
    sel.scheme = scheme;
    sel.groups.resize(partition.k);

    for (std::int32_t g = 0; g < partition.k; ++g) {
        const auto samples = make_dft_samples(store, partition, g, neg_ratio, seed);
        std::vector<std::uint8_t> labels(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;

        std::vector<DimensionRecord> records(model.d);
        parallel_for(static_cast<std::size_t>(model.d), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t dim = lo; dim < hi; ++dim) {
                const auto rows = assemble_dim_variables(model, samples, static_cast<int>(dim));
                const auto pca = fit_pca_1d(rows, samples.size(), sel.nv);
                DimensionRecord rec;
                rec.dim = static_cast<int>(dim);
                rec.mean = pca.mean;
                rec.basis = pca.basis;
                rec.degenerate = pca.degenerate;
                if (!pca.degenerate) {
                    // project with the exact arithmetic project() uses, so stored
                    // features reproduce the selection-time values bit for bit
                    std::vector<double> e(samples.size());
                    for (std::size_t i = 0; i < samples.size(); ++i)
                        e[i] = project_one(rows.data() + i * sel.nv, rec, sel.nv);
                    const auto split = dft_cross_entropy(e, labels, n_bins);
                    rec.threshold = split.threshold;
                    rec.entropy = split.entropy;
                    rec.degenerate = split.degenerate;
                }
                records[dim] = std::move(rec);
            }
        });

        // zero-variance dimensions carry no signal: park them past the worst
        // finite entropy so no scheme ranks them as discriminant
        double worst = 0.0;
        bool any = false;
        for (const auto& r : records) {
            if (!r.degenerate) {
                worst = any ? std::max(worst, r.entropy) : r.entropy;
                any = true;
            }
        }
        if (!any) worst = std::log(2.0);
        for (auto& r : records) {
            if (r.degenerate) r.entropy = worst + 1e-3;
        }

        GroupSelector& gs = sel.groups[g];
        gs.curve = records;
        std::sort(gs.curve.begin(), gs.curve.end(), [](const auto& a, const auto& b) {
            if (a.entropy != b.entropy) return a.entropy < b.entropy;
            return a.dim < b.dim;
        });

        switch (scheme) {
            case PruneScheme::lowest:
            case PruneScheme::none:
                gs.selected.assign(gs.curve.begin(), gs.curve.begin() + d_out);
                break;
            case PruneScheme::highest:
                gs.selected.assign(gs.curve.end() - d_out, gs.curve.end());
                break;
            case PruneScheme::random: {
                Rng rng(mix_seed(seed, "prune-random", static_cast<std::uint64_t>(g)));
                std::vector<int> dims(model.d);
                std::iota(dims.begin(), dims.end(), 0);
                rng.shuffle(dims);
                std::vector<char> keep(model.d, 0);
                for (int i = 0; i < d_out; ++i) keep[dims[i]] = 1;
                for (const auto& r : gs.curve)
                    if (keep[r.dim]) gs.selected.push_back(r);
                break;
            }
        }
    }
    return sel;
}

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_selector(const FeatureSelector& s, const std::string& meta_path,
                   const std::string& group_path_prefix) {
    nlohmann::json j;
    j["version"] = 1;
    j["family"] = family_to_string(s.family);
    j["nv"] = s.nv;
    j["d"] = s.d;
    j["d_out"] = s.d_out;
    j["scheme"] = prune_scheme_to_string(s.scheme);
    j["num_groups"] = s.groups.size();
    std::ofstream meta(meta_path);
    if (!meta) throw data_error("cannot write " + meta_path);
    meta << j.dump(2) << '\n';

    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const std::string path = group_path_prefix + "g" + std::to_string(g) + ".tsv";
        std::ofstream out(path);
        if (!out) throw data_error("cannot write " + path);
        for (const auto& rec : s.groups[g].selected) {
            out << rec.dim << '\t' << fmt17(rec.entropy) << '\t' << fmt17(rec.threshold) << '\t';
            for (int j2 = 0; j2 < s.nv; ++j2) out << (j2 ? " " : "") << fmt17(rec.mean[j2]);
            out << '\t';
            for (int j2 = 0; j2 < s.nv; ++j2) out << (j2 ? " " : "") << fmt17(rec.basis[j2]);
            out << '\n';
        }
    }
}

FeatureSelector load_selector(const std::string& meta_path, const std::string& group_path_prefix) {
    std::ifstream meta(meta_path);
    if (!meta) throw data_error("cannot open " + meta_path);
    nlohmann::json j;
    try {
        meta >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(meta_path + ": bad selector json: " + e.what());
    }

    FeatureSelector s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.nv = j.at("nv").get<int>();
    s.d = j.at("d").get<int>();
    s.d_out = j.at("d_out").get<int>();
    s.scheme = prune_scheme_from_string(j.value("scheme", "lowest"));
    const std::size_t ng = j.at("num_groups").get<std::size_t>();
    s.groups.resize(ng);

    for (std::size_t g = 0; g < ng; ++g) {
        const std::string path = group_path_prefix + "g" + std::to_string(g) + ".tsv";
        std::ifstream in(path);
        if (!in) throw data_error("cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string dim_s, h_s, thr_s, mean_s, basis_s;
            if (!std::getline(ss, dim_s, '\t') || !std::getline(ss, h_s, '\t') ||
                !std::getline(ss, thr_s, '\t') || !std::getline(ss, mean_s, '\t') ||
                !std::getline(ss, basis_s)) {
                throw data_error(path + ": malformed selector line");
            }
            DimensionRecord rec;
            rec.dim = std::stoi(dim_s);
            rec.entropy = std::stod(h_s);
            rec.threshold = std::stod(thr_s);
            std::istringstream ms(mean_s), bs(basis_s);
            double v;
            while (ms >> v) rec.mean.push_back(v);
            while (bs >> v) rec.basis.push_back(v);
            if (rec.mean.size() != static_cast<std::size_t>(s.nv) ||
                rec.basis.size() != static_cast<std::size_t>(s.nv)) {
                throw data_error(path + ": vector width does not match n_v");
            }
            s.groups[g].selected.push_back(std::move(rec));
        }
        if (s.groups[g].selected.size() != static_cast<std::size_t>(s.d_out))
            throw data_error(path + ": expected " + std::to_string(s.d_out) + " records");
    }
    return s;
}

void write_dft_curve_csv(const GroupSelector& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "rank,dim,cross_entropy\n";
    for (std::size_t i = 0; i < g.curve.size(); ++i)
        out << i << ',' << g.curve[i].dim << ',' << fmt17(g.curve[i].entropy) << '\n';
}

}  // namespace kglite
