// Text serialization of trained models.
//
//   emorec-model 1
//   kind RF
//   options k=3 trees=100 min_split=2 max_features=0 bootstrap=1
//   dim <d>
//   mean <d values>
//   std <d values>
//   instances <n>            (KNN3) followed by n lines `<LABEL> <d values>`
//   trees <t>                (DT, RF) followed per tree by
//   tree <seed> <node count>
//   S <feature> <threshold> <c0> <c1> <c2>   split node, preorder
//   L <c0> <c1> <c2>                         leaf
//   end

#include "emorec/error.hpp"
#include "emorec/learn.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace emorec {

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::string_view token() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("unexpected end of model text");
        return text_.substr(start, pos_ - start);
    }

    void expect(std::string_view word) {
        if (token() != word) fail("expected `" + std::string(word) + "`");
    }

    template <class T>
    T number() {
        const auto tok = token();
        T v{};
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail("bad number `" + std::string(tok) + "`");
        return v;
    }

    /// Parses `key=value` and checks the key.
    template <class T>
    T keyed(std::string_view key) {
        const auto tok = token();
        if (tok.size() <= key.size() || tok.substr(0, key.size()) != key || tok[key.size()] != '=')
            fail("expected `" + std::string(key) + "=`");
        const auto val = tok.substr(key.size() + 1);
        T v{};
        auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
        if (ec != std::errc{} || ptr != val.data() + val.size()) fail("bad value for " + std::string(key));
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("<model>", 0, msg + " at byte " + std::to_string(pos_));
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

void write_values(std::ostringstream& out, const std::vector<double>& v) {
    for (double x : v) out << ' ' << format_double(x);
}

void write_counts(std::ostringstream& out, const ClassCounts& c) { out << ' ' << c[0] << ' ' << c[1] << ' ' << c[2]; }

ClassCounts read_counts(Reader& in) {
    ClassCounts c{};
    for (auto& v : c) v = in.number<std::uint32_t>();
    return c;
}

}  // namespace

std::string TrainedModel::serialize() const {
    std::ostringstream out;
    out << "emorec-model 1\n";
    out << "kind " << to_string(kind_) << '\n';
    out << "options k=" << options_.knn_k << " trees=" << options_.rf_trees << " min_split=" << options_.min_samples_split
        << " max_features=" << options_.rf_max_features << " bootstrap=" << (options_.rf_bootstrap ? 1 : 0) << '\n';
    out << "dim " << dimension() << '\n';
    out << "mean";
    write_values(out, standardizer_.mean());
    out << "\nstd";
    write_values(out, standardizer_.stddev());
    out << '\n';
    if (kind_ == ClassifierKind::KNN3) {
        out << "instances " << knn_labels_.size() << '\n';
        const std::size_t d = dimension();
        for (std::size_t i = 0; i < knn_labels_.size(); ++i) {
            out << to_string(knn_labels_[i]);
            for (std::size_t f = 0; f < d; ++f) out << ' ' << format_double(knn_rows_[i * d + f]);
            out << '\n';
        }
    } else {
        out << "trees " << trees_.size() << '\n';
        for (std::size_t t = 0; t < trees_.size(); ++t) {
            out << "tree " << tree_seeds_[t] << ' ' << trees_[t].nodes.size() << '\n';
            // Nodes are stored in preorder already.
            for (const auto& node : trees_[t].nodes) {
                if (node.is_leaf()) {
                    out << 'L';
                } else {
                    out << "S " << node.feature << ' ' << format_double(node.threshold);
                }
                write_counts(out, node.counts);
                out << '\n';
            }
        }
    }
    out << "end\n";
    return std::move(out).str();
}

TrainedModel TrainedModel::deserialize(std::string_view text) {
    Reader in(text);
    in.expect("emorec-model");
    if (in.number<int>() != 1) in.fail("unsupported model version");
    TrainedModel m;
    in.expect("kind");
    const auto kind = parse_classifier(in.token());
    if (!kind) in.fail("unknown classifier kind");
    m.kind_ = *kind;
    in.expect("options");
    m.options_.knn_k = in.keyed<int>("k");
    m.options_.rf_trees = in.keyed<int>("trees");
    m.options_.min_samples_split = in.keyed<int>("min_split");
    m.options_.rf_max_features = in.keyed<int>("max_features");
    m.options_.rf_bootstrap = in.keyed<int>("bootstrap") != 0;
    in.expect("dim");
    const auto dim = in.number<std::size_t>();
    std::vector<double> mean(dim), sd(dim);
    in.expect("mean");
    for (auto& v : mean) v = in.number<double>();
    in.expect("std");
    for (auto& v : sd) v = in.number<double>();
    m.standardizer_ = Standardizer(std::move(mean), std::move(sd));

    if (m.kind_ == ClassifierKind::KNN3) {
        in.expect("instances");
        const auto n = in.number<std::size_t>();
        m.knn_rows_.resize(n * dim);
        m.knn_labels_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto label = parse_emotion(in.token());
            if (!label) in.fail("unknown label");
            m.knn_labels_[i] = *label;
            for (std::size_t f = 0; f < dim; ++f) m.knn_rows_[i * dim + f] = in.number<double>();
        }
    } else {
        in.expect("trees");
        const auto count = in.number<std::size_t>();
        for (std::size_t t = 0; t < count; ++t) {
            in.expect("tree");
            m.tree_seeds_.push_back(in.number<std::uint64_t>());
            const auto n_nodes = in.number<std::size_t>();
            DecisionTree tree;
            tree.nodes.resize(n_nodes);
            // Rebuild child links from preorder: a split's left child follows
            // it directly, its right child follows the left subtree.
            std::vector<std::size_t> open;  // splits still waiting for a right child
            for (std::size_t i = 0; i < n_nodes; ++i) {
                TreeNode& node = tree.nodes[i];
                const auto tag = in.token();
                if (tag == "S") {
                    node.feature = in.number<int>();
                    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= dim) in.fail("feature out of range");
                    node.threshold = in.number<double>();
                } else if (tag != "L") {
                    in.fail("expected node tag");
                }
                node.counts = read_counts(in);
                if (i > 0) {
                    TreeNode& prev = tree.nodes[i - 1];
                    if (!prev.is_leaf()) {
                        prev.left = static_cast<int>(i);
                    } else {
                        if (open.empty()) in.fail("malformed preorder tree");
                        tree.nodes[open.back()].right = static_cast<int>(i);
                        open.pop_back();
                    }
                }
                if (!node.is_leaf()) open.push_back(i);
            }
            if (!open.empty() || n_nodes == 0) in.fail("incomplete tree");
            m.trees_.push_back(std::move(tree));
        }
    }
    in.expect("end");
    return m;
}

}  // namespace emorec
