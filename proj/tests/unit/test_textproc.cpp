#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"
#include "granuscore/text_util.hpp"
#include "granuscore/textproc.hpp"

#include "../support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace granuscore;
using granuscore::testsupport::trained_fixture;

namespace {

std::vector<std::string> unit_texts(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& eu : extract_units(text)) out.push_back(eu.unit.text);
    return out;
}

} // namespace

TEST_CASE("noun phrases stay intact (annotator goldens)") {
    // possessive + adjectives + noun is one unit, never fragmented
    auto units = unit_texts("He sits on his old wooden chair");
    CHECK(std::find(units.begin(), units.end(), "his old wooden chair") != units.end());
    for (const auto& u : units) {
        CHECK(u != "old");
        CHECK(u != "wooden");
        CHECK(u != "chair");
    }

    // frozen golden for the full sentence
    CHECK(units == std::vector<std::string>{"sits", "his old wooden chair"});

    CHECK(unit_texts("Tony Hawk landed the first 900 in San Diego") ==
          std::vector<std::string>{"Tony Hawk", "landed", "the first 900", "San Diego"});
    CHECK(unit_texts("A sportsman landed the first 900 in the United States") ==
          std::vector<std::string>{"A sportsman", "landed", "the first 900",
                                   "the United States"});
    CHECK(unit_texts("He fixed his CUBE road bike using a rusty wrench") ==
          std::vector<std::string>{"fixed", "his CUBE road bike", "using", "a rusty wrench"});
}

TEST_CASE("stop words and symbols produce no units") {
    CHECK(extract_units("the of and").empty());
    CHECK(extract_units("!!! ???").empty());
    CHECK(extract_units("").empty());
    CHECK(extract_units("   \n\t ").empty());
}

TEST_CASE("spans index into the source text") {
    std::string text = "He sits on his old wooden chair";
    for (const auto& eu : extract_units(text)) {
        CHECK(eu.unit.end <= text.size());
        CHECK(eu.unit.start < eu.unit.end);
        CHECK(trim(text.substr(eu.unit.start, eu.unit.end - eu.unit.start)) == eu.unit.text);
    }
}

TEST_CASE("sentence segmentation indexes units by sentence") {
    std::string text = "Tony Hawk landed the trick. He sits on his old wooden chair. The of and.";
    auto units = extract_units(text);
    std::set<size_t> sentences;
    for (const auto& eu : units) sentences.insert(eu.sentence);
    CHECK(sentences == std::set<size_t>{0, 1}); // third sentence is all stop words
    // abbreviations do not split sentences
    auto dr = extract_units("Dr. Hawk rode in San Diego. A friend watched.");
    size_t max_sentence = 0;
    for (const auto& eu : dr) max_sentence = std::max(max_sentence, eu.sentence);
    CHECK(max_sentence == 1);
    // decimals do not split either
    auto dec = extract_units("The value 3.5 rose in Paris");
    for (const auto& eu : dec) CHECK(eu.sentence == 0);
}

TEST_CASE("lqm worked examples") {
    CHECK(lqm({10, 20, 30, 40, 50}, 0.8) == doctest::Approx(25.0));
    CHECK(lqm({10, 20, 30, 40, 50}, 1.0) == doctest::Approx(30.0)); // plain mean
    CHECK(lqm({42.0}, 0.1) == doctest::Approx(42.0));               // m = max(1, .)
    CHECK(lqm({3, 1, 2}, 0.34) == doctest::Approx(1.5));            // ceil(1.02) = 2 smallest
    CHECK_THROWS_AS(lqm({}, 0.8), DataError);
    CHECK_THROWS_AS(lqm({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(lqm({1.0}, 1.5), ConfigError);
}

TEST_CASE("lqm ordering invariants on random lists") {
    StreamRng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        size_t n = 1 + rng.next_below(20);
        std::vector<double> values(n);
        for (auto& v : values) v = 100.0 * rng.next_double();
        double q = 0.05 + 0.95 * rng.next_double();
        double l = lqm(values, q);
        double mn = aggregate(values, AggOp::min);
        double mx = aggregate(values, AggOp::max);
        double mean = aggregate(values, AggOp::mean);
        CHECK(l >= mn - 1e-12);
        CHECK(l <= mean + 1e-12);
        CHECK(mean <= mx + 1e-12);
        CHECK(lqm(values, 1.0) == doctest::Approx(mean));
    }
}

TEST_CASE("aggregate operators") {
    CHECK(aggregate({3, 1, 2}, AggOp::min) == 1.0);
    CHECK(aggregate({1, 2, 3}, AggOp::sum) == 6.0);
    CHECK(aggregate({1, 2, 3}, AggOp::max) == 3.0);
    std::vector<double> weights{1.0, 3.0};
    CHECK(aggregate({10, 30}, AggOp::weighted_mean, 1.0, &weights) == doctest::Approx(25.0));
    CHECK_THROWS_AS(aggregate({}, AggOp::mean), DataError);
    CHECK_THROWS_AS(aggregate({1.0}, AggOp::weighted_mean), ConfigError);
}

TEST_CASE("aggregation names parse and round-trip") {
    for (const char* name :
         {"sent-lqm-0.8-pool-mean", "doc-pool-max", "sent-weighted-mean-pool-sum",
          "sent-mean-pool-lqm-0.3", "sent-min-pool-min", "doc-pool-lqm-0.1"}) {
        AggregationSpec spec = AggregationSpec::parse(name);
        CHECK(spec.name() == name);
    }
    CHECK(AggregationSpec::defaults().name() == "sent-lqm-0.8-pool-mean");
    CHECK_THROWS_AS(AggregationSpec::parse("bogus"), ConfigError);
    CHECK_THROWS_AS(AggregationSpec::parse("sent-mean"), ConfigError);
    CHECK_THROWS_AS(AggregationSpec::parse("sent-lqm-1.5-pool-mean"), ConfigError);
}

TEST_CASE("score_text fallback and identity cases") {
    const auto& fx = trained_fixture();
    // stop words only -> coarsest score, fallback flagged
    ScoreReport empty = score_text("the of and", *fx.scorer);
    CHECK(empty.document_score == 100.0);
    CHECK(empty.fallback_used);
    CHECK(empty.sentences.empty());

    // single sentence, single unit -> document score equals that unit's score
    const std::string& name = fx.world.concept_names.front();
    ScoreReport single = score_text(name, *fx.scorer);
    REQUIRE(single.sentences.size() == 1);
    REQUIRE(single.sentences[0].units.size() == 1);
    CHECK(single.document_score == doctest::Approx(*single.sentences[0].units[0].score));
    CHECK_FALSE(single.fallback_used);
    CHECK(single.document_score == doctest::Approx(fx.scorer->score(name)));
}

TEST_CASE("two-step aggregation follows the spec operators") {
    // three sentences with one concept each; lqm(0.8) over 3 sentence scores
    // averages all three (m = ceil(2.4) = 3)
    const auto& fx = trained_fixture();
    const auto& names = fx.world.concept_names;
    std::string text = names[0] + ". " + names[1] + ". " + names[2] + ".";
    ScoreReport r = score_text(text, *fx.scorer);
    REQUIRE(r.sentence_scores.size() == 3);
    double expect = (r.sentence_scores[0] + r.sentence_scores[1] + r.sentence_scores[2]) / 3.0;
    CHECK(r.document_score == doctest::Approx(expect));

    // order-symmetric operators are invariant to sentence permutation
    std::string permuted = names[2] + ". " + names[0] + ". " + names[1] + ".";
    ScoreReport r2 = score_text(permuted, *fx.scorer);
    CHECK(r2.document_score == doctest::Approx(r.document_score));

    // trailing whitespace changes nothing
    ScoreReport r3 = score_text(text + "   \n", *fx.scorer);
    CHECK(r3.document_score == doctest::Approx(r.document_score));
}

TEST_CASE("replacing a unit with a higher-scoring unit never lowers the sentence mean") {
    const auto& fx = trained_fixture();
    // rank concepts by unit score, then compare two-unit sentences
    std::vector<std::pair<double, std::string>> ranked;
    for (size_t i = 0; i < 12; ++i) {
        ranked.emplace_back(fx.scorer->score(fx.world.concept_names[i]),
                            fx.world.concept_names[i]);
    }
    std::sort(ranked.begin(), ranked.end());
    const auto& low = ranked.front();
    const auto& high = ranked.back();
    const auto& mid = ranked[ranked.size() / 2];
    ScoreReport with_low = score_text(mid.second + " of " + low.second, *fx.scorer);
    ScoreReport with_high = score_text(mid.second + " of " + high.second, *fx.scorer);
    CHECK(with_high.sentence_scores[0] >= with_low.sentence_scores[0]);
}

TEST_CASE("coarsening a referent raises the document score (worked triple)") {
    const auto& fx = trained_fixture();
    double fine = score_text("Tony Hawk landed the first 900 in San Diego", *fx.scorer)
                      .document_score;
    double mid = score_text("A skateboarder landed the first 900 in California", *fx.scorer)
                     .document_score;
    double coarse =
        score_text("A sportsman landed the first 900 in the United States", *fx.scorer)
            .document_score;
    CHECK(fine < mid);
    CHECK(mid < coarse);
}

TEST_CASE("backend misses carry the text location") {
    const auto& fx = trained_fixture();
    try {
        score_text("Unknowable gibberishword", *fx.scorer);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        std::string what = e.what();
        CHECK(what.find("Unknowable gibberishword") != std::string::npos);
        CHECK(what.find("sentence 0") != std::string::npos);
    }
}

TEST_CASE("document scope pools every unit directly") {
    const auto& fx = trained_fixture();
    const auto& names = fx.world.concept_names;
    std::string text = names[0] + " of " + names[1] + ". " + names[2] + ".";
    AggregationSpec doc = AggregationSpec::parse("doc-pool-max");
    ScoreReport r = score_text(text, *fx.scorer, doc);
    double expect = std::max({fx.scorer->score(names[0]), fx.scorer->score(names[1]),
                              fx.scorer->score(names[2])});
    CHECK(r.document_score == doctest::Approx(expect));
}
