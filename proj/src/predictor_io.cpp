#include "predictor_io.hpp"

namespace kbfg {

namespace {

constexpr int kPredictorFormatVersion = 1;

ordered_json tree_to_json(const DecisionTreeModel& t) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : t.nodes) {
        ordered_json jn;
        jn["f"] = n.feature;
        jn["t"] = n.threshold;
        jn["eq"] = n.equality;
        jn["l"] = n.left;
        jn["r"] = n.right;
        jn["v"] = n.value;
        jn["p"] = n.pos_fraction;
        nodes.push_back(std::move(jn));
    }
    ordered_json j;
    j["type"] = "decision_tree";
    j["classification"] = t.classification;
    j["nodes"] = std::move(nodes);
    return j;
}

DecisionTreeModel tree_from_json(const ordered_json& j) {
    DecisionTreeModel t;
    t.classification = j.at("classification").get<bool>();
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.equality = jn.at("eq").get<bool>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.value = jn.at("v").get<double>();
        n.pos_fraction = jn.at("p").get<double>();
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) fail("predictor file: empty tree");
    return t;
}

ordered_json model_to_json(const Model& m) {
    if (const auto* t = dynamic_cast<const DecisionTreeModel*>(&m)) return tree_to_json(*t);
    if (const auto* f = dynamic_cast<const RandomForestModel*>(&m)) {
        ordered_json j;
        j["type"] = "random_forest";
        j["classification"] = f->classification;
        j["n_classes"] = f->n_classes;
        ordered_json trees = ordered_json::array();
        for (const auto& t : f->trees) trees.push_back(tree_to_json(t));
        j["trees"] = std::move(trees);
        return j;
    }
    if (const auto* k = dynamic_cast<const KnnModel*>(&m)) {
        ordered_json j;
        j["type"] = "knn";
        j["classification"] = k->classification;
        j["n_classes"] = k->n_classes;
        j["k"] = k->k;
        j["nominal_dim"] = k->nominal_dim;
        j["targets"] = k->targets;
        j["points"] = k->points;
        return j;
    }
    if (const auto* l = dynamic_cast<const LinearModel*>(&m)) {
        ordered_json j;
        j["type"] = "linear";
        j["n_classes"] = l->n_classes;
        j["dim_card"] = l->dim_card;
        j["dim_offset"] = l->dim_offset;
        j["expanded"] = l->expanded;
        j["weights"] = l->weights;
        return j;
    }
    fail("cannot serialize unknown model type");
}

std::shared_ptr<const Model> model_from_json(const ordered_json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "decision_tree")
        return std::make_shared<DecisionTreeModel>(tree_from_json(j));
    if (type == "random_forest") {
        auto f = std::make_shared<RandomForestModel>();
        f->classification = j.at("classification").get<bool>();
        f->n_classes = j.at("n_classes").get<int>();
        for (const auto& jt : j.at("trees")) f->trees.push_back(tree_from_json(jt));
        if (f->trees.empty()) fail("predictor file: empty forest");
        return f;
    }
    if (type == "knn") {
        auto k = std::make_shared<KnnModel>();
        k->classification = j.at("classification").get<bool>();
        k->n_classes = j.at("n_classes").get<int>();
        k->k = j.at("k").get<int>();
        k->nominal_dim = j.at("nominal_dim").get<std::vector<uint8_t>>();
        k->targets = j.at("targets").get<std::vector<double>>();
        k->points = j.at("points").get<std::vector<std::vector<double>>>();
        return k;
    }
    if (type == "linear") {
        auto l = std::make_shared<LinearModel>();
        l->n_classes = j.at("n_classes").get<int>();
        l->dim_card = j.at("dim_card").get<std::vector<int>>();
        l->dim_offset = j.at("dim_offset").get<std::vector<size_t>>();
        l->expanded = j.at("expanded").get<size_t>();
        l->weights = j.at("weights").get<std::vector<std::vector<double>>>();
        return l;
    }
    fail("predictor file: unknown model type '" + type + "'");
}

}  // namespace

ordered_json learner_spec_to_json(const LearnerSpec& spec) {
    ordered_json j;
    j["algorithm"] = algorithm_name(spec.algorithm);
    j["max_depth"] = spec.max_depth;
    j["min_samples_leaf"] = spec.min_samples_leaf;
    j["pruning"] = spec.pruning;
    j["tree_count"] = spec.tree_count;
    j["feature_fraction"] = spec.feature_fraction;
    j["bootstrap"] = spec.bootstrap;
    j["neighbors"] = spec.neighbors;
    j["learning_rate"] = spec.learning_rate;
    j["epochs"] = spec.epochs;
    j["l2"] = spec.l2;
    j["seed"] = spec.seed;
    return j;
}

LearnerSpec learner_spec_from_json(const ordered_json& j) {
    LearnerSpec s;
    s.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    if (j.contains("max_depth")) s.max_depth = j.at("max_depth").get<int>();
    if (j.contains("min_samples_leaf")) s.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    if (j.contains("pruning")) s.pruning = j.at("pruning").get<bool>();
    if (j.contains("tree_count")) s.tree_count = j.at("tree_count").get<int>();
    if (j.contains("feature_fraction")) s.feature_fraction = j.at("feature_fraction").get<double>();
    if (j.contains("bootstrap")) s.bootstrap = j.at("bootstrap").get<bool>();
    if (j.contains("neighbors")) s.neighbors = j.at("neighbors").get<int>();
    if (j.contains("learning_rate")) s.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("epochs")) s.epochs = j.at("epochs").get<int>();
    if (j.contains("l2")) s.l2 = j.at("l2").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<uint64_t>();
    s.validate();
    return s;
}

ordered_json feature_kind_to_json(const FeatureKind& k) {
    ordered_json j;
    if (k.is_nominal()) {
        j["kind"] = "nominal";
        j["categories"] = k.categories;
    } else {
        j["kind"] = "continuous";
    }
    return j;
}

FeatureKind feature_kind_from_json(const ordered_json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "continuous") return FeatureKind::continuous();
    if (kind == "nominal")
        return FeatureKind::nominal(j.at("categories").get<std::vector<std::string>>());
    fail("unknown feature kind '" + kind + "'");
}

ordered_json predictor_to_json(const Predictor& p) {
    ordered_json j;
    j["spec"] = learner_spec_to_json(p.spec);
    ordered_json inputs = ordered_json::array();
    for (const auto& f : p.inputs) {
        ordered_json jf;
        jf["name"] = f.name;
        jf["kind"] = feature_kind_to_json(f.kind);
        if (!f.description.empty()) jf["description"] = f.description;
        inputs.push_back(std::move(jf));
    }
    j["inputs"] = std::move(inputs);
    j["target_kind"] = feature_kind_to_json(p.target_kind);
    j["impute"] = p.impute;
    j["model"] = model_to_json(*p.model);
    return j;
}

Predictor predictor_from_json(const ordered_json& j) {
    Predictor p;
    p.spec = learner_spec_from_json(j.at("spec"));
    for (const auto& jf : j.at("inputs")) {
        Feature f;
        f.name = jf.at("name").get<std::string>();
        f.kind = feature_kind_from_json(jf.at("kind"));
        if (jf.contains("description")) f.description = jf.at("description").get<std::string>();
        p.inputs.push_back(std::move(f));
    }
    p.target_kind = feature_kind_from_json(j.at("target_kind"));
    p.impute = j.at("impute").get<std::vector<double>>();
    if (p.impute.size() != p.inputs.size()) fail("predictor file: impute length mismatch");
    p.model = model_from_json(j.at("model"));
    return p;
}

ordered_json generated_features_to_json(const std::vector<GeneratedFeature>& features) {
    ordered_json j;
    j["format"] = "kbfg-predictors";
    j["version"] = kPredictorFormatVersion;
    ordered_json arr = ordered_json::array();
    for (const auto& f : features) {
        ordered_json jf;
        jf["name"] = f.name;
        jf["source_dataset"] = f.source_dataset;
        jf["source_target"] = f.source_target;
        jf["utility_at_acceptance"] = f.utility_at_acceptance;
        jf["information_gain"] = f.information_gain;
        jf["value_kind"] = feature_kind_to_json(f.value_kind);
        jf["inputs"] = f.input_names();
        if (f.committee.empty()) {
            jf["predictor"] = predictor_to_json(f.predictor);
        } else {
            ordered_json members = ordered_json::array();
            for (const auto& m : f.committee) members.push_back(predictor_to_json(m));
            jf["committee"] = std::move(members);
        }
        arr.push_back(std::move(jf));
    }
    j["features"] = std::move(arr);
    return j;
}

std::vector<GeneratedFeature> generated_features_from_json(const ordered_json& j) {
    if (j.at("format").get<std::string>() != "kbfg-predictors")
        fail("predictor file: unrecognized format tag");
    if (j.at("version").get<int>() != kPredictorFormatVersion)
        fail("predictor file: unsupported version");
    std::vector<GeneratedFeature> out;
    for (const auto& jf : j.at("features")) {
        GeneratedFeature f;
        f.name = jf.at("name").get<std::string>();
        f.source_dataset = jf.at("source_dataset").get<std::string>();
        f.source_target = jf.at("source_target").get<std::string>();
        f.utility_at_acceptance = jf.at("utility_at_acceptance").get<double>();
        f.information_gain = jf.at("information_gain").get<double>();
        f.value_kind = feature_kind_from_json(jf.at("value_kind"));
        if (jf.contains("committee")) {
            for (const auto& jm : jf.at("committee"))
                f.committee.push_back(predictor_from_json(jm));
        } else {
            f.predictor = predictor_from_json(jf.at("predictor"));
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace kbfg
