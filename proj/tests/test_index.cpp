#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace sgm;

TEST_CASE("toy index decomposition") {
    const InvertedIndex ix = build_index(testing::toy_model());
    CHECK(ix.num_postings() == 2);
    CHECK(index_stats(ix).num_postings == 2);
    CHECK(index_stats(ix).num_terms == 2);
    const auto p0 = ix.postings(0);
    REQUIRE(p0.size() == 1);
    CHECK(ix.node_label(p0[0].node) == 0);
    CHECK(p0[0].delta == doctest::Approx(std::log(0.75) - std::log(0.5) - std::log(0.5)));
    CHECK(p0[0].delta == doctest::Approx(std::log(3.0)));
    const double rebuilt = std::exp(ix.root_logprob(0) + ix.log_alpha(p0[0].node) + p0[0].delta);
    CHECK(rebuilt == doctest::Approx(0.75));
    CHECK(ix.root_logprob(5) == kNegInf);
    CHECK(ix.postings(5).empty());
    CHECK(ix.postings(-1).empty());
}

TEST_CASE("terms without label support only have a root entry") {
    SmoothingConfig s = testing::toy_smoothing();
    const GenerativeModel m = train_mnb(testing::parse("1 0:2\n2 1:2\n", true, 4), s);
    const InvertedIndex ix = build_index(m);
    CHECK(ix.postings(3).empty());
    CHECK(ix.root_logprob(3) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("postings of the two-snippet corpus") {
    const InvertedIndex ix = build_index(train_mnb(testing::two_snippets(), testing::toy_smoothing()));
    const auto the = ix.postings(1);
    REQUIRE(the.size() == 2);
    CHECK(ix.label_ids()[static_cast<std::size_t>(ix.node_label(the[0].node))] == 1);
    CHECK(ix.label_ids()[static_cast<std::size_t>(ix.node_label(the[1].node))] == 2);
    CHECK(ix.postings(11).size() == 1);
    CHECK(ix.postings(5).size() == 2);
}

TEST_CASE("reconstruction matches dense smoothed probabilities") {
    std::mt19937_64 rng(17);
    int checked = 0;
    while (checked < 200) {
        const bool tdm = rng() % 2 == 0;
        const GenerativeModel m = testing::random_model(rng, rng() % 7, tdm, 6, 20);
        const InvertedIndex ix = build_index(m);
        const auto dense = smoothed_node_distributions(m);
        const NodeId leaf = ix.leaves()[testing::pick(rng, ix.leaves().size())];
        const auto term = static_cast<TermId>(testing::pick(rng, m.num_terms));
        if (ix.root_logprob(term) == kNegInf) continue;
        double logp = ix.root_logprob(term) + ix.path_log_alpha(leaf);
        for (NodeId n = leaf; n > 0; n = ix.parent(n))
            for (const Posting& p : ix.postings(term))
                if (p.node == n) logp += p.delta;
        CHECK(std::abs(std::exp(logp) - dense[static_cast<std::size_t>(leaf)][term]) < 1e-10);
        ++checked;
    }
}

TEST_CASE("postings sorted by node and counted per support") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const GenerativeModel m = testing::random_model(rng, static_cast<std::size_t>(trial), trial % 2 == 0);
        const InvertedIndex ix = build_index(m);
        std::size_t support = 0;
        for (std::size_t i = 1; i < m.nodes.size(); ++i) support += m.nodes[i].dist.l0();
        CHECK(ix.num_postings() == support);
        for (std::size_t t = 0; t < ix.num_terms(); ++t) {
            const auto list = ix.postings(static_cast<TermId>(t));
            for (std::size_t k = 1; k < list.size(); ++k) CHECK(list[k - 1].node < list[k].node);
        }
    }
}

TEST_CASE("zero backoff weight is rejected") {
    GenerativeModel m = testing::toy_model();
    m.nodes[1].alpha = 0.0;
    CHECK_THROWS_AS(build_index(m), std::invalid_argument);
}

TEST_CASE("binary serialization is deterministic and lossless") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        GenerativeModel m = testing::random_model(rng, static_cast<std::size_t>(trial), trial % 2 == 0);
        if (trial % 2) m.codec = powerset_encode(testing::parse("1 0:1\n1,2 1:1\n")).second;
        const InvertedIndex a = build_index(m);
        const InvertedIndex b = build_index(m);
        std::ostringstream sa, sb;
        save_index(sa, a);
        save_index(sb, b);
        CHECK(sa.str() == sb.str());

        std::istringstream in(sa.str());
        const InvertedIndex back = load_index(in);
        std::ostringstream again;
        save_index(again, back);
        CHECK(again.str() == sa.str());
        const SparseVector q = testing::random_vector(rng, m.num_terms, 5, true);
        CHECK((label_log_joints(back, q) - label_log_joints(a, q)).cwiseAbs().maxCoeff() == 0.0);
    }
    std::istringstream junk("SGMINDX");
    CHECK_THROWS(load_index(junk));
}

TEST_CASE("dump lists every term") {
    std::ostringstream out;
    dump_index(out, build_index(testing::toy_model()));
    const std::string s = out.str();
    CHECK(s.find("postings=2") != std::string::npos);
    CHECK(s.find("term 0 ") != std::string::npos);
    CHECK(s.find("term 1 ") != std::string::npos);
}
