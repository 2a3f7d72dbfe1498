#include <doctest.h>

#include <sstream>

#include "litscreen/errors.hpp"
#include "litscreen/pipeline.hpp"
#include "litscreen/synthetic.hpp"

using namespace litscreen;
using pipeline::Recipe;

namespace {

corpus::Corpus small_corpus() {
    synthetic::Options o;
    o.n_documents = 300;
    o.noise_vocabulary = 400;
    o.n_planted = 20;
    o.seed = 9;
    return synthetic::generate(o).corpus;
}

pipeline::PipelineOptions quick() {
    pipeline::PipelineOptions o;
    o.forest.n_trees = 20;
    o.forest.seed = 5;
    return o;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("recipe names") {
    CHECK(Recipe::parse("model1") == Recipe::model1());
    CHECK(Recipe::parse("model2") == Recipe::model2());
    CHECK(Recipe::parse("model3:250") == Recipe::model3(250));
    CHECK(Recipe::parse("model3_n250") == Recipe::model3(250));
    CHECK(Recipe::model3(250).name() == "model3:250");
    CHECK(Recipe::model3(250).id() == "model3_n250");
    CHECK(Recipe::parse(Recipe::model3(7).id()) == Recipe::model3(7));
    CHECK_FALSE(Recipe::model1().uses_forest());
    CHECK_THROWS_AS(Recipe::parse("model4"), ConfigError);
    CHECK_THROWS_AS(Recipe::parse("model3:x"), ConfigError);
}

TEST_CASE("feature pipeline widths") {
    const auto c = small_corpus();
    const pipeline::Resources res;
    const auto seqs = textprep::preprocess_all(c, res.lemmas);
    const auto labels = c.labels("test");
    std::vector<std::string> ids;
    for (const auto& d : c.documents()) ids.push_back(d.id);
    const auto prov = select::rows_digest(ids);
    const auto m2 = pipeline::FeaturePipeline::fit(seqs, labels, res.clusters, Recipe::model2(), quick(), prov);
    CHECK(m2.transform(seqs).cols() == 15);
    CHECK_FALSE(m2.ranking().has_value());
    const auto m3 = pipeline::FeaturePipeline::fit(seqs, labels, res.clusters, Recipe::model3(25), quick(), prov);
    CHECK(m3.transform(seqs).cols() == 40);
    REQUIRE(m3.ranking().has_value());
    CHECK(m3.features().token_columns.size() == 25);
}

TEST_CASE("trained model round trip") {
    const auto c = small_corpus();
    const pipeline::Resources res;
    for (const auto& recipe : {Recipe::model1(), Recipe::model2(), Recipe::model3(30)}) {
        const auto model = pipeline::train_model(c, recipe, res, quick());
        std::stringstream buf;
        model.save(buf);
        const auto back = pipeline::TrainedModel::load(buf, res.clusters);
        CHECK(back.recipe == recipe);
        CHECK(back.serialize() == model.serialize());
        CHECK(back.score(c, res) == model.score(c, res));
    }
}

TEST_CASE("scoring with different preprocessing inputs is refused") {
    const auto c = small_corpus();
    const pipeline::Resources res;
    const auto model = pipeline::train_model(c, Recipe::model2(), res, quick());
    pipeline::Resources other;
    other.lemmas = textprep::LemmaTable::parse("mice\tmouse\n");
    CHECK_THROWS_AS(model.score(c, other), ProvenanceError);
    CHECK_NOTHROW(model.score(c, res));
}

TEST_CASE("training needs labels") {
    corpus::Corpus c({{"a", "hiv", "", std::nullopt, {}}, {"b", "sex work", "", corpus::Label::Relevant, {}}});
    CHECK_THROWS_AS(pipeline::train_model(c, Recipe::model2(), pipeline::Resources{}, quick()), DataError);
}

}  // TEST_SUITE
