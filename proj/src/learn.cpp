#include "emorec/learn.hpp"

#include "emorec/error.hpp"
#include "emorec/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace emorec {

namespace {

std::size_t label_index(EmotionLabel l) { return static_cast<std::size_t>(l); }

EmotionLabel majority(const ClassCounts& c) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] > c[best]) best = i;
    return static_cast<EmotionLabel>(best);
}

/// Column-major copy of the training matrix: cols[f * n + i].
std::vector<double> to_columns(std::span<const double> rows, std::size_t n, std::size_t dim) {
    std::vector<double> cols(n * dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < dim; ++f) cols[f * n + i] = rows[i * dim + f];
    return cols;
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const double> cols, std::span<const EmotionLabel> labels, std::size_t dim,
                int min_samples_split, int max_features, std::uint64_t seed)
        : cols_(cols),
          labels_(labels),
          n_(labels.size()),
          dim_(dim),
          min_split_(static_cast<std::size_t>(std::max(min_samples_split, 2))),
          max_features_(max_features <= 0 || static_cast<std::size_t>(max_features) >= dim
                            ? dim
                            : static_cast<std::size_t>(max_features)),
          rng_(seed),
          perm_(dim) {
        std::iota(perm_.begin(), perm_.end(), 0u);
    }

    DecisionTree build(std::vector<std::uint32_t> members) {
        DecisionTree tree;
        idx_ = std::move(members);
        struct Pending {
            std::size_t begin, end;
            int parent;
            bool left;
        };
        // Depth-first, left child first, so nodes land in preorder.
        std::vector<Pending> stack{{0, idx_.size(), -1, false}};
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            if (p.parent >= 0) {
                auto& parent = tree.nodes[static_cast<std::size_t>(p.parent)];
                (p.left ? parent.left : parent.right) = id;
            }
            TreeNode node;
            for (std::size_t i = p.begin; i < p.end; ++i) ++node.counts[label_index(labels_[idx_[i]])];

            const std::size_t size = p.end - p.begin;
            const bool pure = std::count(node.counts.begin(), node.counts.end(), 0u) >= 2;
            if (!pure && size >= min_split_) {
                if (auto split = best_split(p.begin, p.end, node.counts)) {
                    node.feature = static_cast<int>(split->feature);
                    node.threshold = split->threshold;
                    const double* col = cols_.data() + split->feature * n_;
                    const double thr = split->threshold;
                    auto mid = std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                              idx_.begin() + static_cast<std::ptrdiff_t>(p.end),
                                              [&](std::uint32_t i) { return col[i] <= thr; });
                    const auto cut = static_cast<std::size_t>(mid - idx_.begin());
                    stack.push_back({cut, p.end, id, false});
                    stack.push_back({p.begin, cut, id, true});
                }
            }
            tree.nodes[static_cast<std::size_t>(id)].feature = node.feature;
            tree.nodes[static_cast<std::size_t>(id)].threshold = node.threshold;
            tree.nodes[static_cast<std::size_t>(id)].counts = node.counts;
        }
        return tree;
    }

private:
    struct Split {
        std::size_t feature;
        double threshold;
    };

    std::vector<std::size_t> candidate_features() {
        if (max_features_ >= dim_) {
            std::vector<std::size_t> all(dim_);
            std::iota(all.begin(), all.end(), std::size_t{0});
            return all;
        }
        for (std::size_t i = 0; i < max_features_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, dim_ - 1);
            std::swap(perm_[i], perm_[pick(rng_)]);
        }
        std::vector<std::size_t> out(perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(max_features_));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::optional<Split> best_split(std::size_t begin, std::size_t end, const ClassCounts& total) {
        const std::size_t m = end - begin;
        scratch_.resize(m);
        // Maximizing sum c^2/n over both children minimizes weighted Gini.
        double best_score = -std::numeric_limits<double>::infinity();
        std::optional<Split> best;
        for (std::size_t f : candidate_features()) {
            const double* col = cols_.data() + f * n_;
            for (std::size_t k = 0; k < m; ++k) {
                const std::uint32_t i = idx_[begin + k];
                scratch_[k] = {col[i], static_cast<std::uint8_t>(label_index(labels_[i]))};
            }
            std::sort(scratch_.begin(), scratch_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch_.front().first == scratch_.back().first) continue;

            std::array<double, kEmotionCount> left{};
            std::array<double, kEmotionCount> right{};
            for (std::size_t c = 0; c < kEmotionCount; ++c) right[c] = total[c];
            for (std::size_t k = 0; k + 1 < m; ++k) {
                left[scratch_[k].second] += 1.0;
                right[scratch_[k].second] -= 1.0;
                const double a = scratch_[k].first;
                const double b = scratch_[k + 1].first;
                if (!(a < b)) continue;
                const auto nl = static_cast<double>(k + 1);
                const auto nr = static_cast<double>(m - k - 1);
                const double score = (left[0] * left[0] + left[1] * left[1] + left[2] * left[2]) / nl +
                                     (right[0] * right[0] + right[1] * right[1] + right[2] * right[2]) / nr;
                if (score > best_score) {
                    best_score = score;
                    double thr = a + (b - a) * 0.5;
                    if (!(thr < b)) thr = a;
                    best = Split{f, thr};
                }
            }
        }
        return best;
    }

    std::span<const double> cols_;
    std::span<const EmotionLabel> labels_;
    std::size_t n_;
    std::size_t dim_;
    std::size_t min_split_;
    std::size_t max_features_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> perm_;
    std::vector<std::uint32_t> idx_;
    std::vector<std::pair<double, std::uint8_t>> scratch_;
};

void check_training_set(std::span<const Instance> instances) {
    if (instances.empty()) throw InvalidArgument("empty training set");
    const std::size_t dim = instances.front().features.size();
    ClassCounts counts{};
    for (const auto& in : instances) {
        if (in.features.size() != dim) throw InvalidArgument("training instances differ in dimension");
        ++counts[label_index(in.label)];
    }
    if (std::count(counts.begin(), counts.end(), 0u) >= 2)
        throw InvalidArgument("training set contains a single class");
}

}  // namespace

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (mean_.size() != stddev_.size()) throw InvalidArgument("standardizer mean/stddev size mismatch");
}

Standardizer Standardizer::fit(std::span<const Instance> train) {
    if (train.empty()) throw InvalidArgument("cannot fit a standardizer on an empty training set");
    const std::size_t dim = train.front().features.size();
    const auto n = static_cast<double>(train.size());
    std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
    for (const auto& in : train) {
        if (in.features.size() != dim) throw InvalidArgument("training instances differ in dimension");
        for (std::size_t f = 0; f < dim; ++f) mean[f] += in.features[f];
    }
    for (double& m : mean) m /= n;
    for (const auto& in : train)
        for (std::size_t f = 0; f < dim; ++f) {
            const double d = in.features[f] - mean[f];
            sd[f] += d * d;
        }
    for (double& s : sd) s = std::sqrt(s / n);
    return Standardizer(std::move(mean), std::move(sd));
}

void Standardizer::transform_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != mean_.size() || out.size() != mean_.size())
        throw InvalidArgument("feature dimension " + std::to_string(x.size()) + " does not match " +
                              std::to_string(mean_.size()));
    for (std::size_t f = 0; f < x.size(); ++f) out[f] = stddev_[f] > 0.0 ? (x[f] - mean_[f]) / stddev_[f] : 0.0;
}

std::vector<double> Standardizer::transform(std::span<const double> x) const {
    std::vector<double> out(x.size());
    transform_into(x, out);
    return out;
}

Instance Standardizer::apply(const Instance& instance) const {
    Instance out = instance;
    out.features = transform(instance.features);
    return out;
}

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::KNN3: return "KNN3";
        case ClassifierKind::DT: return "DT";
        case ClassifierKind::RF: return "RF";
    }
    return "?";
}

std::optional<ClassifierKind> parse_classifier(std::string_view name) {
    if (name == "KNN3" || name == "knn" || name == "KNN" || name == "knn3") return ClassifierKind::KNN3;
    if (name == "DT" || name == "dt") return ClassifierKind::DT;
    if (name == "RF" || name == "rf") return ClassifierKind::RF;
    return std::nullopt;
}

EmotionLabel DecisionTree::predict(std::span<const double> x) const {
    if (nodes.empty()) throw InvalidArgument("empty decision tree");
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    return majority(nodes[i].counts);
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
        }
    }
    return best;
}

EmotionLabel knn_vote(std::span<const double> rows, std::span<const EmotionLabel> labels, std::size_t dim,
                      std::span<const double> query, std::size_t k) {
    const std::size_t n = labels.size();
    if (n == 0) throw InvalidArgument("knn over an empty training set");
    k = std::min(k, n);

    // Keep the k best (distance, index) pairs in ascending order; a later
    // index never displaces an equal distance.
    constexpr std::size_t kMaxK = 16;
    if (k > kMaxK) throw InvalidArgument("knn: k too large");
    std::array<double, kMaxK> best_d;
    std::array<std::size_t, kMaxK> best_i;
    std::size_t filled = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = rows.data() + r * dim;
        double d2 = 0.0;
        for (std::size_t f = 0; f < dim; ++f) {
            const double d = row[f] - query[f];
            d2 += d * d;
        }
        if (filled == k && !(d2 < best_d[k - 1])) continue;
        std::size_t pos = filled < k ? filled++ : k - 1;
        while (pos > 0 && best_d[pos - 1] > d2) {
            best_d[pos] = best_d[pos - 1];
            best_i[pos] = best_i[pos - 1];
            --pos;
        }
        best_d[pos] = d2;
        best_i[pos] = r;
    }

    ClassCounts votes{};
    for (std::size_t j = 0; j < filled; ++j) ++votes[label_index(labels[best_i[j]])];
    const std::uint32_t top = *std::max_element(votes.begin(), votes.end());
    for (std::size_t j = 0; j < filled; ++j)
        if (votes[label_index(labels[best_i[j]])] == top) return labels[best_i[j]];
    return labels[best_i[0]];
}

DecisionTree grow_tree(std::span<const double> rows, std::span<const EmotionLabel> labels, std::size_t dim,
                       std::span<const std::uint32_t> sample, int min_samples_split, int max_features,
                       std::uint64_t rng_seed) {
    const std::size_t n = labels.size();
    if (rows.size() != n * dim) throw InvalidArgument("grow_tree: matrix shape mismatch");
    const auto cols = to_columns(rows, n, dim);
    TreeBuilder builder(cols, labels, dim, min_samples_split, max_features, rng_seed);
    return builder.build({sample.begin(), sample.end()});
}

TrainedModel train(ClassifierKind kind, std::span<const Instance> instances, std::uint64_t seed,
                   const TrainOptions& options) {
    check_training_set(instances);
    if (options.knn_k < 1) throw InvalidArgument("knn k must be positive");
    if (options.rf_trees < 1) throw InvalidArgument("random forest needs at least one tree");

    TrainedModel model;
    model.kind_ = kind;
    model.options_ = options;
    model.standardizer_ = Standardizer::fit(instances);

    const std::size_t n = instances.size();
    const std::size_t dim = model.standardizer_.dimension();
    std::vector<double> rows(n * dim);
    std::vector<EmotionLabel> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.standardizer_.transform_into(instances[i].features, std::span<double>(rows).subspan(i * dim, dim));
        labels[i] = instances[i].label;
    }

    if (kind == ClassifierKind::KNN3) {
        model.knn_rows_ = std::move(rows);
        model.knn_labels_ = std::move(labels);
        return model;
    }

    const auto cols = to_columns(rows, n, dim);
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);

    if (kind == ClassifierKind::DT) {
        TreeBuilder builder(cols, labels, dim, options.min_samples_split, 0, seed);
        model.trees_.push_back(builder.build(all));
        model.tree_seeds_.push_back(seed);
        return model;
    }

    const int max_features = options.rf_max_features > 0
                                 ? options.rf_max_features
                                 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
    for (int t = 0; t < options.rf_trees; ++t) {
        const std::uint64_t tree_seed = mix_seed({seed, static_cast<std::uint64_t>(t)});
        TreeBuilder builder(cols, labels, dim, options.min_samples_split, max_features, tree_seed);
        std::vector<std::uint32_t> sample;
        if (options.rf_bootstrap) {
            // Bootstrap draws come from their own stream so the split stream is
            // the same whether or not bootstrapping is enabled.
            std::mt19937_64 rng(mix_seed({tree_seed, 0xb00757a9ULL}));
            std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
            sample.resize(n);
            for (auto& s : sample) s = pick(rng);
        } else {
            sample = all;
        }
        model.trees_.push_back(builder.build(std::move(sample)));
        model.tree_seeds_.push_back(tree_seed);
    }
    return model;
}

EmotionLabel TrainedModel::predict_standardized(std::span<const double> z) const {
    switch (kind_) {
        case ClassifierKind::KNN3:
            return knn_vote(knn_rows_, knn_labels_, dimension(), z, static_cast<std::size_t>(options_.knn_k));
        case ClassifierKind::DT: return trees_.front().predict(z);
        case ClassifierKind::RF: {
            ClassCounts votes{};
            for (const auto& t : trees_) ++votes[label_index(t.predict(z))];
            return majority(votes);
        }
    }
    return EmotionLabel::NEUTRAL;
}

EmotionLabel TrainedModel::predict(std::span<const double> features) const {
    if (features.size() != dimension())
        throw InvalidArgument("model expects " + std::to_string(dimension()) + " features, got " +
                              std::to_string(features.size()));
    std::vector<double> z(features.size());
    standardizer_.transform_into(features, z);
    return predict_standardized(z);
}

EmotionLabel predict(const TrainedModel& model, std::span<const double> features) { return model.predict(features); }

std::uint64_t EvaluationMetrics::total() const {
    std::uint64_t s = 0;
    for (const auto& row : confusion)
        for (auto v : row) s += v;
    return s;
}

EvaluationMetrics metrics_from_confusion(const Confusion& confusion) {
    EvaluationMetrics m;
    m.confusion = confusion;
    const std::uint64_t total = m.total();
    std::uint64_t correct = 0;
    for (std::size_t c = 0; c < kEmotionCount; ++c) correct += confusion[c][c];
    m.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;

    double f_sum = 0.0;
    int present = 0;
    for (std::size_t c = 0; c < kEmotionCount; ++c) {
        std::uint64_t row = 0, col = 0;
        for (std::size_t j = 0; j < kEmotionCount; ++j) {
            row += confusion[c][j];
            col += confusion[j][c];
        }
        ClassMetrics& cm = m.per_class[c];
        cm.present = row > 0 || col > 0;
        const auto tp = static_cast<double>(confusion[c][c]);
        cm.precision = col ? tp / static_cast<double>(col) : 0.0;
        cm.recall = row ? tp / static_cast<double>(row) : 0.0;
        const double pr = cm.precision + cm.recall;
        cm.f_measure = pr > 0.0 ? 2.0 * cm.precision * cm.recall / pr : 0.0;
        if (cm.present) {
            f_sum += cm.f_measure;
            ++present;
        }
    }
    m.macro_f = present ? f_sum / present : 0.0;
    return m;
}

EvaluationMetrics evaluate(std::span<const std::pair<EmotionLabel, EmotionLabel>> predictions) {
    Confusion c{};
    for (const auto& [truth, pred] : predictions) ++c[label_index(truth)][label_index(pred)];
    return metrics_from_confusion(c);
}

}  // namespace emorec
