// sgm: train, apply and evaluate sparse generative text models.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sgm/baselines.hpp"
#include "sgm/eval.hpp"
#include "sgm/index.hpp"
#include "sgm/inference.hpp"
#include "sgm/optimize.hpp"
#include "sgm/settings.hpp"

using namespace sgm;

namespace {

struct SettingFlags {
    std::string config;
    std::map<std::string, std::string> flags;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "key=value settings file (flags override it)")->check(CLI::ExistingFile);
        for (const auto& key : Settings::known_keys()) cmd->add_option("--" + key, flags[key], "setting " + key);
    }

    Settings collect() const {
        Settings s = config.empty() ? Settings{} : Settings::read(config);
        for (const auto& [k, v] : flags)
            if (!v.empty()) s.set(k, v);
        return s;
    }
};

Collection load_corpus(const std::string& path, bool expect_labels, std::optional<std::size_t> dict_size) {
    try {
        return read_collection(path, expect_labels, dict_size);
    } catch (const CorpusError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::optional<std::size_t> dict_opt(std::size_t n) { return n ? std::optional<std::size_t>(n) : std::nullopt; }

// Output sink: a file when a path is given, stdout otherwise.
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) f(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Either an index or a baseline ranker, behind one scoring interface.
struct Scoring {
    std::optional<InvertedIndex> index;
    std::optional<BaselineRanker> baseline;

    std::size_t num_labels() const { return index ? index->num_labels() : baseline->num_labels(); }

    std::pair<LabelSet, double> classify(const SparseVector& v) const {
        if (index) {
            const SparseVector q = weight_query(*index, v, VectorRole::test_doc);
            const Vector joint = label_log_joints(*index, q);
            Eigen::Index best = 0;
            for (Eigen::Index c = 1; c < joint.size(); ++c)
                if (joint[c] > joint[best]) best = c;
            return {index->decode(static_cast<std::size_t>(best)), joint[best]};
        }
        const auto best = baseline->rank(v, 1).front();
        return {LabelSet{best.label}, best.score};
    }

    std::vector<Ranked> rank(const SparseVector& v, std::size_t k) const {
        if (index) return sgm::rank(*index, weight_query(*index, v, VectorRole::query), k);
        return baseline->rank(v, k);
    }
};

Scoring make_scoring(const std::string& scorer_name, const std::string& index_path, const std::string& train_path,
                     const Settings& settings, std::size_t dict_size) {
    const Scorer scorer = parse_scorer(scorer_name);
    Scoring s;
    if (scorer == Scorer::sgm) {
        if (index_path.empty()) throw std::invalid_argument("--scorer sgm needs --index");
        if (!train_path.empty()) throw std::invalid_argument("--train is only used by the vsm and bm25 scorers");
        s.index = load_index(index_path);
    } else {
        if (train_path.empty()) throw std::invalid_argument("--scorer " + scorer_name + " needs --train");
        if (!index_path.empty()) throw std::invalid_argument("--index is only used by the sgm scorer");
        const ModelSettings m = resolve(settings);
        s.baseline.emplace(load_corpus(train_path, true, dict_opt(dict_size)), scorer, m.bm25, m.weighting);
    }
    return s;
}

void write_predictions(std::ostream& out, const std::vector<std::pair<LabelSet, double>>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << i << ' ' << format_label_set(rows[i].first) << ' ' << format_double(rows[i].second) << '\n';
}

void write_rankings(std::ostream& out, const std::vector<std::vector<Ranked>>& rows) {
    for (std::size_t q = 0; q < rows.size(); ++q)
        for (std::size_t r = 0; r < rows[q].size(); ++r)
            out << q << ' ' << r + 1 << ' ' << rows[q][r].label << ' ' << format_double(rows[q][r].score) << '\n';
}

std::vector<std::pair<std::string, double>> read_dataset_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string name;
        double v = 0.0;
        if (!(ss >> name) || name[0] == '#') continue;
        if (!(ss >> v)) throw std::runtime_error(path + ": expected '<dataset> <score>' in '" + line + "'");
        out.emplace_back(name, v);
    }
    return out;
}

enum class DevMetric { micro_f1, macro_f1, map, ndcg };

DevMetric parse_metric(const std::string& s) {
    if (s == "micro_f1") return DevMetric::micro_f1;
    if (s == "macro_f1") return DevMetric::macro_f1;
    if (s == "map") return DevMetric::map;
    if (s == "ndcg") return DevMetric::ndcg;
    throw std::invalid_argument("unknown metric '" + s + "'");
}

double dev_score(const InvertedIndex& index, const Collection& dev, DevMetric metric, std::size_t ndcg_k) {
    if (metric == DevMetric::micro_f1 || metric == DevMetric::macro_f1) {
        std::vector<LabelSet> preds, refs;
        for (const Document& d : dev.docs()) {
            preds.push_back(classify(index, weight_query(index, d.vec, VectorRole::test_doc)));
            refs.push_back(d.labels);
        }
        return metric == DevMetric::micro_f1 ? micro_f1(preds, refs) : macro_f1(preds, refs);
    }
    std::vector<RankedJudgment> js;
    for (const Document& d : dev.docs()) {
        RankedJudgment j;
        for (const Ranked& r : rank(index, weight_query(index, d.vec, VectorRole::query), index.num_labels()))
            j.ranking.push_back(r.label);
        for (LabelId l : d.labels) j.grades[l] = 1;
        js.push_back(std::move(j));
    }
    return metric == DevMetric::map ? mean_average_precision(js) : mean_ndcg_at_k(js, ndcg_k);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse generative text models: training, inference, evaluation"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train a model and build its index");
    std::string train_path, model_out, index_out;
    std::size_t dict_size = 0;
    SettingFlags train_flags;
    train->add_option("--train", train_path, "Labelled training corpus")->required();
    train->add_option("--model-out", model_out, "Write the model (text format)");
    train->add_option("--index-out", index_out, "Write the inverted index (binary)");
    train->add_option("--dict-size", dict_size, "Dictionary size N (default 1 + max term id)");
    train_flags.attach(train);

    // predict / rank
    std::string scorer = "sgm", index_path, base_train, test_path, out_path;
    std::size_t threads = 1, k = 10;
    SettingFlags apply_flags;
    auto* predict = app.add_subcommand("predict", "Classify documents");
    auto* rank_cmd = app.add_subcommand("rank", "Rank labels per query");
    for (auto* cmd : {predict, rank_cmd}) {
        cmd->add_option("--scorer", scorer, "sgm, vsm or bm25")->check(CLI::IsMember({"sgm", "vsm", "bm25"}));
        cmd->add_option("--index", index_path, "Index built by train (sgm)");
        cmd->add_option("--train", base_train, "Training corpus (vsm, bm25)");
        cmd->add_option("--test", test_path, "Documents or queries")->required();
        cmd->add_option("--out", out_path, "Output file (default stdout)");
        cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--dict-size", dict_size, "Dictionary size N");
    }
    rank_cmd->add_option("-k,--top", k, "Labels per query")->check(CLI::PositiveNumber);
    apply_flags.attach(predict);
    apply_flags.attach(rank_cmd);

    // eval
    auto* eval = app.add_subcommand("eval", "Compute metrics");
    std::string pred_path, ref_path, ranking_path, judgment_path, scores_a, scores_b;
    std::size_t ndcg_k = 20;
    eval->add_option("--pred", pred_path, "Prediction file");
    eval->add_option("--ref", ref_path, "Labelled reference corpus");
    eval->add_option("--ranking", ranking_path, "Ranking file");
    eval->add_option("--judgments", judgment_path, "Judgment file");
    eval->add_option("--ndcg-k", ndcg_k, "NDCG cutoff")->check(CLI::PositiveNumber);
    eval->add_option("--scores-a", scores_a, "Per-dataset scores of the tested system");
    eval->add_option("--scores-b", scores_b, "Per-dataset scores of the baseline system");

    // search
    auto* search = app.add_subcommand("search", "Random search over settings on a development split");
    std::string dev_path, trace_path, best_out, metric_name = "micro_f1";
    std::vector<std::string> params;
    SearchConfig search_cfg;
    SettingFlags search_flags;
    search->add_option("--train", train_path, "Development training corpus")->required();
    search->add_option("--dev", dev_path, "Labelled development test corpus")->required();
    search->add_option("--param", params, "Searched setting as name:min:max")->required();
    search->add_option("--iterations", search_cfg.iterations, "Iterations (N of NxM)");
    search->add_option("--subiterations", search_cfg.subiterations, "Candidates per iteration (M of NxM)");
    search->add_option("--decay", search_cfg.decay, "Step-size decay per iteration");
    search->add_option("--ties", search_cfg.ties_kept, "Tied best points kept");
    search->add_option("--seed", search_cfg.seed, "Random seed");
    search->add_option("--threads", search_cfg.threads, "Concurrent evaluations")->check(CLI::PositiveNumber);
    search->add_option("--metric", metric_name, "micro_f1, macro_f1, map or ndcg");
    search->add_option("--ndcg-k", ndcg_k, "NDCG cutoff")->check(CLI::PositiveNumber);
    search->add_option("--trace", trace_path, "Trace output file");
    search->add_option("--best-out", best_out, "Write the best settings as key=value");
    search->add_option("--dict-size", dict_size, "Dictionary size N");
    search_flags.attach(search);

    // index dump
    auto* index_cmd = app.add_subcommand("index", "Index utilities");
    index_cmd->require_subcommand(1);
    auto* dump = index_cmd->add_subcommand("dump", "Print an index in readable form");
    dump->add_option("--index", index_path, "Index file")->required();

    // split
    auto* split = app.add_subcommand("split", "Seeded random holdout split of a corpus");
    std::string split_in, split_train, split_test;
    double fraction = 0.1;
    std::uint64_t split_seed = 0;
    split->add_option("--input", split_in, "Corpus to split")->required();
    split->add_option("--train-out", split_train, "Remaining documents")->required();
    split->add_option("--test-out", split_test, "Held-out documents")->required();
    split->add_option("--fraction", fraction, "Held-out share")->check(CLI::Range(0.0, 1.0));
    split->add_option("--seed", split_seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const ModelSettings cfg = resolve(train_flags.collect());
            const Collection data = load_corpus(train_path, true, dict_opt(dict_size));
            const GenerativeModel model = train_model(data, cfg);
            const InvertedIndex index = build_index(model);
            if (!model_out.empty()) save_model(model_out, model);
            if (!index_out.empty()) save_index(index_out, index);
            const IndexStats st = index_stats(index);
            std::cout << "kind=" << to_string(model.kind) << " labels=" << model.num_labels()
                      << " terms=" << model.num_terms << " nodes=" << model.nodes.size()
                      << " postings=" << st.num_postings << '\n';
        } else if (predict->parsed() || rank_cmd->parsed()) {
            const Scoring scoring = make_scoring(scorer, index_path, base_train, apply_flags.collect(), dict_size);
            const Collection test = load_corpus(test_path, false, dict_opt(dict_size));
            Sink sink(out_path);
            if (predict->parsed()) {
                std::vector<std::pair<LabelSet, double>> rows(test.num_docs());
                parallel_for(rows.size(), threads, [&](std::size_t i) { rows[i] = scoring.classify(test.doc(i).vec); });
                write_predictions(sink.out(), rows);
            } else {
                std::vector<std::vector<Ranked>> rows(test.num_docs());
                parallel_for(rows.size(), threads, [&](std::size_t i) { rows[i] = scoring.rank(test.doc(i).vec, k); });
                write_rankings(sink.out(), rows);
            }
        } else if (eval->parsed()) {
            bool any = false;
            if (!pred_path.empty() || !ref_path.empty()) {
                if (pred_path.empty() || ref_path.empty()) throw std::invalid_argument("--pred and --ref go together");
                std::ifstream in(pred_path);
                if (!in) throw std::runtime_error("cannot open " + pred_path);
                const auto preds = read_predictions(in);
                std::vector<LabelSet> refs;
                const Collection ref = load_corpus(ref_path, true, std::nullopt);
                for (const Document& d : ref.docs()) refs.push_back(d.labels);
                std::cout << "micro_f1=" << format_double(micro_f1(preds, refs)) << '\n'
                          << "macro_f1=" << format_double(macro_f1(preds, refs)) << '\n';
                any = true;
            }
            if (!ranking_path.empty() || !judgment_path.empty()) {
                if (ranking_path.empty() || judgment_path.empty())
                    throw std::invalid_argument("--ranking and --judgments go together");
                std::ifstream rin(ranking_path), jin(judgment_path);
                if (!rin) throw std::runtime_error("cannot open " + ranking_path);
                if (!jin) throw std::runtime_error("cannot open " + judgment_path);
                const auto js = join_judgments(read_rankings(rin), read_judgments(jin));
                std::cout << "queries=" << js.size() << '\n'
                          << "map=" << format_double(mean_average_precision(js)) << '\n'
                          << "ndcg@" << ndcg_k << '=' << format_double(mean_ndcg_at_k(js, ndcg_k)) << '\n';
                any = true;
            }
            if (!scores_a.empty() || !scores_b.empty()) {
                if (scores_a.empty() || scores_b.empty()) throw std::invalid_argument("--scores-a and --scores-b go together");
                const auto a = read_dataset_scores(scores_a);
                const auto b = read_dataset_scores(scores_b);
                std::map<std::string, double> bmap(b.begin(), b.end());
                std::vector<double> xa, xb;
                std::cout << "# dataset a b ri\n";
                for (const auto& [name, v] : a) {
                    const auto it = bmap.find(name);
                    if (it == bmap.end()) throw std::runtime_error("dataset '" + name + "' missing from " + scores_b);
                    xa.push_back(v);
                    xb.push_back(it->second);
                    std::cout << name << ' ' << format_double(v) << ' ' << format_double(it->second) << ' '
                              << format_double(ri(it->second, v)) << '\n';
                }
                const TTest t = paired_t_test_one_tailed(xa, xb);
                std::cout << "datasets=" << xa.size() << '\n'
                          << "t=" << format_double(t.t) << '\n'
                          << "df=" << format_double(t.df) << '\n'
                          << "p=" << format_double(t.p) << '\n'
                          << "flag=" << significance_flag(t.p) << '\n';
                any = true;
            }
            if (!any) throw std::invalid_argument("eval needs --pred/--ref, --ranking/--judgments or --scores-a/--scores-b");
        } else if (search->parsed()) {
            const Settings base = search_flags.collect();
            const DevMetric metric = parse_metric(metric_name);
            const Collection tr = load_corpus(train_path, true, dict_opt(dict_size));
            const Collection dev = load_corpus(dev_path, true, tr.num_terms());
            SearchSpace space;
            for (const auto& p : params) space.params.push_back(parse_search_param(p));
            for (const auto& p : space.params) Settings{}.set(p.name, "0");

            const auto settings_at = [&](const std::vector<double>& x) {
                Settings s = base;
                for (std::size_t i = 0; i < x.size(); ++i) s.set(space.params[i].name, format_double(x[i]));
                return s;
            };
            const Objective objective = [&](const std::vector<double>& x) {
                const GenerativeModel model = train_model(tr, resolve(settings_at(x)));
                return dev_score(build_index(model), dev, metric, ndcg_k);
            };
            const SearchResult r = random_search(objective, space, search_cfg);

            Sink trace(trace_path);
            if (!trace_path.empty()) {
                for (const TraceEntry& e : r.trace) {
                    trace.out() << e.iteration << ' ' << e.subiteration;
                    for (double x : e.point) trace.out() << ' ' << format_double(x);
                    trace.out() << ' ' << format_double(e.value) << '\n';
                }
            }
            const Settings best = settings_at(r.best_points.front());
            std::cout << "evaluations=" << r.trace.size() << '\n'
                      << "best_value=" << format_double(r.best_value) << '\n';
            for (const auto& p : space.params) std::cout << p.name << '=' << *best.get(p.name) << '\n';
            if (!best_out.empty()) {
                Sink out(best_out);
                for (const auto& [key, v] : best.values()) out.out() << key << '=' << v << '\n';
            }
        } else if (dump->parsed()) {
            dump_index(std::cout, load_index(index_path));
        } else if (split->parsed()) {
            const Collection data = load_corpus(split_in, false, std::nullopt);
            std::vector<std::size_t> order(data.num_docs());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::mt19937_64 rng(split_seed);
            std::shuffle(order.begin(), order.end(), rng);
            const auto held = static_cast<std::size_t>(fraction * static_cast<double>(order.size()) + 0.5);
            std::vector<bool> is_test(order.size(), false);
            for (std::size_t i = 0; i < held; ++i) is_test[order[i]] = true;
            Sink a(split_train), b(split_test);
            for (std::size_t i = 0; i < data.num_docs(); ++i) write_document(is_test[i] ? b.out() : a.out(), data.doc(i));
            std::cout << "train=" << data.num_docs() - held << " test=" << held << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "sgm: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
