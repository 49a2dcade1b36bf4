#include "kglite/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace kglite {

Family family_from_string(const std::string& s) {
    std::string k;
    for (char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "transe") return Family::TransE;
    if (k == "distmult") return Family::DistMult;
    if (k == "rotate") return Family::RotatE;
    if (k == "complex") return Family::ComplEx;
    throw data_error("unknown model family: " + s);
}

std::string family_to_string(Family f) {
    switch (f) {
        case Family::TransE: return "TransE";
        case Family::DistMult: return "DistMult";
        case Family::RotatE: return "RotatE";
        case Family::ComplEx: return "ComplEx";
    }
    return "?";
}

double effective_gamma(Family f, double gamma) {
    // the additive margin only makes sense for distance scores, which are <= 0
    return (f == Family::TransE || f == Family::RotatE) ? gamma : 0.0;
}

double EmbeddingModel::score(std::int32_t h, std::int32_t r, std::int32_t t) const {
    const auto he = entity_row(h);
    const auto te = entity_row(t);
    const auto re = relation_row(r);
    switch (family) {
        case Family::TransE: {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                const double u = he[i] + re[i] - te[i];
                s += u * u;
            }
            return -std::sqrt(s);
        }
        case Family::DistMult: {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += he[i] * re[i] * te[i];
            return s;
        }
        case Family::RotatE: {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                const double a = he[2 * i], b = he[2 * i + 1];
                const double ct = std::cos(re[i]), st = std::sin(re[i]);
                const double wr = a * ct - b * st - te[2 * i];
                const double wi = a * st + b * ct - te[2 * i + 1];
                s += wr * wr + wi * wi;
            }
            return -s;
        }
        case Family::ComplEx: {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                const double hr = he[2 * i], hi = he[2 * i + 1];
                const double rr = re[2 * i], ri = re[2 * i + 1];
                const double tr = te[2 * i], ti = te[2 * i + 1];
                s += (hr * rr - hi * ri) * tr + (hr * ri + hi * rr) * ti;
            }
            return s;
        }
    }
    return 0.0;
}

void EmbeddingModel::dim_variables(std::int32_t h, std::int32_t r, std::int32_t t, int dim,
                                   double* out) const {
    if (dim < 0 || dim >= d) throw std::out_of_range("dimension index out of range");
    const auto he = entity_row(h);
    const auto te = entity_row(t);
    const auto re = relation_row(r);
    switch (family) {
        case Family::TransE:
        case Family::DistMult:
            out[0] = he[dim];
            out[1] = re[dim];
            out[2] = te[dim];
            break;
        case Family::RotatE:
            out[0] = he[2 * dim];
            out[1] = he[2 * dim + 1];
            out[2] = re[dim];
            out[3] = te[2 * dim];
            out[4] = te[2 * dim + 1];
            break;
        case Family::ComplEx:
            out[0] = he[2 * dim];
            out[1] = he[2 * dim + 1];
            out[2] = re[2 * dim];
            out[3] = re[2 * dim + 1];
            out[4] = te[2 * dim];
            out[5] = te[2 * dim + 1];
            break;
    }
}

void TrainConfig::validate() const {
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (n_neg < 1) throw std::invalid_argument("n_neg must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
}

EmbeddingModel init_model(Family family, int d, std::int64_t num_entities,
                          std::int64_t num_relations, double gamma, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("embedding dimension must be >= 1");
    EmbeddingModel m;
    m.family = family;
    m.d = d;
    m.gamma = effective_gamma(family, gamma);
    m.num_entities = num_entities;
    m.num_relations = num_relations;
    m.entity_table.resize(static_cast<std::size_t>(num_entities) * m.entity_stride());
    m.relation_table.resize(static_cast<std::size_t>(num_relations) * m.relation_stride());

    Rng rng(seed);
    const double bound = 6.0 / std::sqrt(static_cast<double>(d));
    for (double& v : m.entity_table) v = rng.uniform(-bound, bound);
    if (family == Family::RotatE) {
        const double pi = 3.14159265358979323846;
        for (double& v : m.relation_table) v = rng.uniform(-pi, pi);
    } else {
        for (double& v : m.relation_table) v = rng.uniform(-bound, bound);
    }
    return m;
}

std::vector<Triple> sample_negatives_uniform(const Triple& triple, int n_neg,
                                             std::int64_t num_entities, Rng& rng) {
    if (n_neg < 1) throw std::invalid_argument("n_neg must be >= 1");
    if (num_entities < 2) throw data_error("cannot corrupt triples with a single entity");
    std::vector<Triple> negs;
    negs.reserve(static_cast<std::size_t>(n_neg));
    for (int i = 0; i < n_neg; ++i) {
        Triple neg = triple;
        const bool corrupt_head = rng.coin();
        const std::int32_t truth = corrupt_head ? triple.h : triple.t;
        std::int32_t candidate;
        do {
            candidate = static_cast<std::int32_t>(rng.uniform_int(num_entities));
        } while (candidate == truth);
        (corrupt_head ? neg.h : neg.t) = candidate;
        negs.push_back(neg);
    }
    return negs;
}

namespace {

// adds coef * df/dtheta for one scored triple into the buffer
void add_score_grad(const EmbeddingModel& m, const Triple& tri, double coef, GradientBuffer& g) {
    const auto he = m.entity_row(tri.h);
    const auto te = m.entity_row(tri.t);
    const auto re = m.relation_row(tri.r);
    const int ew = m.entity_stride();
    const int rw = m.relation_stride();
    auto& gh = g.entity_slot(tri.h, ew);
    auto& gt = g.entity_slot(tri.t, ew);
    auto& gr = g.relation_slot(tri.r, rw);
    switch (m.family) {
        case Family::TransE: {
            double norm = 0.0;
            for (int i = 0; i < m.d; ++i) {
                const double u = he[i] + re[i] - te[i];
                norm += u * u;
            }
            norm = std::sqrt(norm);
            if (norm <= 0.0) return;  // subgradient 0 at the kink
            const double c = -coef / norm;
            for (int i = 0; i < m.d; ++i) {
                const double u = he[i] + re[i] - te[i];
                gh[i] += c * u;
                gr[i] += c * u;
                gt[i] -= c * u;
            }
            break;
        }
        case Family::DistMult: {
            for (int i = 0; i < m.d; ++i) {
                gh[i] += coef * re[i] * te[i];
                gr[i] += coef * he[i] * te[i];
                gt[i] += coef * he[i] * re[i];
            }
            break;
        }
        case Family::RotatE: {
            for (int i = 0; i < m.d; ++i) {
                const double a = he[2 * i], b = he[2 * i + 1];
                const double ct = std::cos(re[i]), st = std::sin(re[i]);
                const double rotre = a * ct - b * st;
                const double rotim = a * st + b * ct;
                const double wr = rotre - te[2 * i];
                const double wi = rotim - te[2 * i + 1];
                gh[2 * i] += coef * -2.0 * (wr * ct + wi * st);
                gh[2 * i + 1] += coef * -2.0 * (-wr * st + wi * ct);
                gr[i] += coef * -2.0 * (-wr * rotim + wi * rotre);
                gt[2 * i] += coef * 2.0 * wr;
                gt[2 * i + 1] += coef * 2.0 * wi;
            }
            break;
        }
        case Family::ComplEx: {
            for (int i = 0; i < m.d; ++i) {
                const double hr = he[2 * i], hi = he[2 * i + 1];
                const double rr = re[2 * i], ri = re[2 * i + 1];
                const double tr = te[2 * i], ti = te[2 * i + 1];
                gh[2 * i] += coef * (rr * tr + ri * ti);
                gh[2 * i + 1] += coef * (-ri * tr + rr * ti);
                gr[2 * i] += coef * (hr * tr + hi * ti);
                gr[2 * i + 1] += coef * (-hi * tr + hr * ti);
                gt[2 * i] += coef * (hr * rr - hi * ri);
                gt[2 * i + 1] += coef * (hr * ri + hi * rr);
            }
            break;
        }
    }
}

// softmax over alpha * scores with max-shift; alpha = 0 gives uniform weights
std::vector<double> adversarial_weights(std::span<const double> neg_scores, double alpha) {
    const std::size_t n = neg_scores.size();
    std::vector<double> p(n);
    if (alpha == 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
        return p;
    }
    double mx = neg_scores[0];
    for (double s : neg_scores) mx = std::max(mx, s);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(alpha * (neg_scores[i] - mx));
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

}  // namespace

double self_adversarial_loss(const EmbeddingModel& model, const Triple& positive,
                             std::span<const Triple> negatives, double alpha) {
    if (negatives.empty()) throw std::invalid_argument("self_adversarial_loss: no negatives");
    const double sp = model.loss_score(positive.h, positive.r, positive.t);
    std::vector<double> sn(negatives.size());
    for (std::size_t i = 0; i < negatives.size(); ++i)
        sn[i] = model.loss_score(negatives[i].h, negatives[i].r, negatives[i].t);
    const auto p = adversarial_weights(sn, alpha);
    double loss = -log_sigmoid(sp);
    for (std::size_t i = 0; i < negatives.size(); ++i) loss -= p[i] * log_sigmoid(-sn[i]);
    if (!std::isfinite(loss)) throw numeric_error("self_adversarial_loss: non-finite loss");
    return loss;
}

double self_adversarial_loss_grad(const EmbeddingModel& model, const Triple& positive,
                                  std::span<const Triple> negatives, double alpha,
                                  GradientBuffer& grad) {
    if (negatives.empty()) throw std::invalid_argument("self_adversarial_loss_grad: no negatives");
    const double sp = model.loss_score(positive.h, positive.r, positive.t);
    std::vector<double> sn(negatives.size());
    for (std::size_t i = 0; i < negatives.size(); ++i)
        sn[i] = model.loss_score(negatives[i].h, negatives[i].r, negatives[i].t);
    const auto p = adversarial_weights(sn, alpha);  // stop-gradient weights

    double loss = -log_sigmoid(sp);
    add_score_grad(model, positive, sigmoid(sp) - 1.0, grad);
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        loss -= p[i] * log_sigmoid(-sn[i]);
        add_score_grad(model, negatives[i], p[i] * sigmoid(sn[i]), grad);
    }
    if (!std::isfinite(loss)) throw numeric_error("self_adversarial_loss_grad: non-finite loss");
    return loss;
}

TrainResult train(const TripleStore& store, Family family, int d, const TrainConfig& config) {
    config.validate();
    if (store.train.empty()) throw data_error("train: empty train split");
    const std::int64_t ne = store.num_entities();
    const std::int64_t nr = store.num_relations();

    TrainResult result;
    result.model = init_model(family, d, ne, nr, config.gamma, config.seed);
    EmbeddingModel& model = result.model;

    Rng rng(mix_seed(config.seed, "kge-train"));
    std::vector<std::size_t> order(store.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    GradientBuffer grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            grad.clear();
            for (std::size_t i = begin; i < end; ++i) {
                const Triple& pos = store.train[order[i]];
                const auto negs = sample_negatives_uniform(pos, config.n_neg, ne, rng);
                epoch_loss += self_adversarial_loss_grad(model, pos, negs, config.alpha, grad);
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            double scale = inv;
            if (config.clip_gradients) {
                double sq = 0.0;
                for (const auto& [id, g] : grad.entity)
                    for (double v : g) sq += (inv * v) * (inv * v);
                for (const auto& [id, g] : grad.relation)
                    for (double v : g) sq += (inv * v) * (inv * v);
                const double norm = std::sqrt(sq);
                if (norm > 1.0) scale /= norm;
            }
            const double step = config.learning_rate * scale;
            for (const auto& [id, g] : grad.entity) {
                auto row = model.entity_row(id);
                for (std::size_t j = 0; j < g.size(); ++j) row[j] -= step * g[j];
            }
            for (const auto& [id, g] : grad.relation) {
                auto row = model.relation_row(id);
                for (std::size_t j = 0; j < g.size(); ++j) row[j] -= step * g[j];
            }
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss)) {
            throw numeric_error("training diverged at epoch " + std::to_string(epoch + 1) +
                                " (loss is not finite); lower the learning rate");
        }
        result.epoch_loss.push_back(epoch_loss);
        if (config.log_every > 0 && (epoch + 1) % config.log_every == 0) {
            std::cerr << "epoch " << (epoch + 1) << "/" << config.epochs << " loss " << epoch_loss
                      << "\n";
        }
    }
    return result;
}

namespace {

void write_table(const std::string& path, const std::vector<double>& table, int stride) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    char buf[32];
    const std::size_t rows = stride > 0 ? table.size() / stride : 0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (int j = 0; j < stride; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", table[i * stride + j]);
            if (j) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

std::vector<double> read_table(const std::string& path, std::int64_t rows, int stride,
                               const std::string& what) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + what + " table: " + path);
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(rows) * stride);
    std::string line;
    std::int64_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double v;
        int cols = 0;
        while (ss >> v) {
            table.push_back(v);
            ++cols;
        }
        if (cols != stride) {
            throw data_error(path + ": row " + std::to_string(row) + " has " + std::to_string(cols) +
                             " values, expected " + std::to_string(stride) + " for this family");
        }
        ++row;
    }
    if (row != rows) {
        throw data_error(path + ": " + std::to_string(row) + " rows, expected " +
                         std::to_string(rows));
    }
    return table;
}

}  // namespace

void save_model(const EmbeddingModel& model, const std::string& manifest_path, std::uint64_t seed) {
    namespace fs = std::filesystem;
    const fs::path mpath(manifest_path);
    const std::string stem = mpath.stem().string();
    const std::string ent_name = stem + "_entities.txt";
    const std::string rel_name = stem + "_relations.txt";
    const fs::path dir = mpath.parent_path();

    nlohmann::json j;
    j["family"] = family_to_string(model.family);
    j["d"] = model.d;
    j["num_entities"] = model.num_entities;
    j["num_relations"] = model.num_relations;
    j["seed"] = seed;
    j["gamma"] = model.gamma;
    j["entity_table"] = ent_name;
    j["relation_table"] = rel_name;

    std::ofstream out(manifest_path);
    if (!out) throw data_error("cannot write " + manifest_path);
    out << j.dump(2) << '\n';
    write_table((dir / ent_name).string(), model.entity_table, model.entity_stride());
    write_table((dir / rel_name).string(), model.relation_table, model.relation_stride());
}

EmbeddingModel load_model(const std::string& manifest_path, std::int64_t expected_entities,
                          std::int64_t expected_relations) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw data_error("cannot open manifest: " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(manifest_path + ": bad manifest json: " + e.what());
    }
    for (const char* field : {"family", "d", "num_entities", "num_relations"}) {
        if (!j.contains(field)) throw data_error(manifest_path + ": manifest missing \"" + field + "\"");
    }

    EmbeddingModel m;
    m.family = family_from_string(j["family"].get<std::string>());
    m.d = j["d"].get<int>();
    if (m.d < 1) throw data_error(manifest_path + ": invalid dimension");
    m.num_entities = j["num_entities"].get<std::int64_t>();
    m.num_relations = j["num_relations"].get<std::int64_t>();
    m.gamma = j.value("gamma", effective_gamma(m.family, 12.0));
    if (expected_entities >= 0 && m.num_entities != expected_entities) {
        throw data_error(manifest_path + ": manifest has " + std::to_string(m.num_entities) +
                         " entities, dataset has " + std::to_string(expected_entities));
    }
    if (expected_relations >= 0 && m.num_relations != expected_relations) {
        throw data_error(manifest_path + ": manifest has " + std::to_string(m.num_relations) +
                         " relations, dataset has " + std::to_string(expected_relations));
    }

    const fs::path dir = fs::path(manifest_path).parent_path();
    const std::string ent = j.value("entity_table", fs::path(manifest_path).stem().string() + "_entities.txt");
    const std::string rel = j.value("relation_table", fs::path(manifest_path).stem().string() + "_relations.txt");
    m.entity_table = read_table((dir / ent).string(), m.num_entities, m.entity_stride(), "entity");
    m.relation_table = read_table((dir / rel).string(), m.num_relations, m.relation_stride(), "relation");
    return m;
}

}  // namespace kglite
