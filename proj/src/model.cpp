#include "lobbench/model.hpp"

#include "lobbench/enet.hpp"
#include "lobbench/svm.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lobbench {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "lobbench.model";
constexpr int kModelVersion = 1;

void check_rows(const TrainedModel& model, const Dataset& rows) {
    if (rows.features != model.features) throw ParameterError("predict: feature order differs from the model's");
    if (model.stats && !rows.standardized)
        throw ParameterError("predict: rows must be standardized with the model's column stats");
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Row-major nested arrays.
json mat_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
    return rows;
}

Eigen::MatrixXd mat_from(const json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::VectorXd row = vec_from(j[r]);
        if (row.size() != cols) throw DataError("model: matrix row has the wrong length");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

}  // namespace

std::string_view to_string(LearnerKind k) { return k == LearnerKind::enet ? "enet" : "svm"; }

LearnerKind parse_learner(std::string_view s) {
    if (s == "enet") return LearnerKind::enet;
    if (s == "svm") return LearnerKind::svm;
    throw ParameterError("unknown learner '" + std::string(s) + "'");
}

TrainedModel fit_learner(const Dataset& train, const LearnerSpec& spec) {
    return spec.kind == LearnerKind::enet ? enet_fit(train, spec.enet) : svm_fit(train, spec.svm);
}

Prediction predict_with_scores(const TrainedModel& model, const Dataset& rows) {
    check_rows(model, rows);
    rows.validate();
    const Eigen::Index n = rows.rows();
    Prediction out;
    out.labels.resize(static_cast<std::size_t>(n));

    if (model.kind() == LearnerKind::enet) {
        const auto& clf = model.enet();
        out.scores = rows.x * clf.coefficients;
        out.scores.rowwise() += clf.intercepts.transpose();
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < kNumClasses; ++c)
                if (out.scores(i, c) > out.scores(i, best)) best = c;
            out.labels[static_cast<std::size_t>(i)] = label_from_index(best);
        }
        return out;
    }

    const auto& clf = model.svm();
    out.scores = Eigen::MatrixXd::Zero(n, kNumClasses);
    Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, kNumClasses);
    for (const auto& m : clf.machines) {
        const int pc = class_index(m.positive);
        const int nc = class_index(m.negative);
        Eigen::VectorXd d = Eigen::VectorXd::Constant(n, m.bias);
        if (m.support_vectors.rows() > 0)
            d.noalias() += polynomial_kernel(rows.x, m.support_vectors, clf.params.degree) * m.coefficients;
        out.scores.col(pc) += d;
        out.scores.col(nc) -= d;
        for (Eigen::Index i = 0; i < n; ++i) ++votes(i, d(i) > 0.0 ? pc : nc);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c) {
            if (votes(i, c) > votes(i, best) ||
                (votes(i, c) == votes(i, best) && out.scores(i, c) > out.scores(i, best)))
                best = c;
        }
        out.labels[static_cast<std::size_t>(i)] = label_from_index(best);
    }
    return out;
}

std::vector<Label> predict(const TrainedModel& model, const Dataset& rows) {
    return predict_with_scores(model, rows).labels;
}

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["kind"] = std::string(to_string(model.kind()));
    j["converged"] = model.converged;
    json feats = json::array();
    for (const auto& f : model.features) feats.push_back(f.name());
    j["features"] = feats;

    if (model.stats) j["column_stats"] = json::parse(stats_to_json(*model.stats));

    if (model.kind() == LearnerKind::enet) {
        const auto& clf = model.enet();
        j["params"] = {{"lambda", clf.params.lambda},
                       {"alpha_star", clf.params.alpha_star},
                       {"max_iters", clf.params.max_iters},
                       {"tol", clf.params.tol}};
        json classes = json::array();
        for (int c = 0; c < kNumClasses; ++c)
            classes.push_back({{"label", std::string(to_string(label_from_index(c)))},
                               {"intercept", clf.intercepts(c)},
                               {"coefficients", vec_json(clf.coefficients.col(c))},
                               {"converged", clf.converged[c]},
                               {"sweeps", clf.sweeps[c]}});
        j["classes"] = classes;
    } else {
        const auto& clf = model.svm();
        j["params"] = {{"degree", clf.params.degree},
                       {"c", clf.params.c},
                       {"tol", clf.params.tol},
                       {"max_iters", clf.params.max_iters}};
        json machines = json::array();
        for (const auto& m : clf.machines)
            machines.push_back({{"positive", std::string(to_string(m.positive))},
                                {"negative", std::string(to_string(m.negative))},
                                {"bias", m.bias},
                                {"converged", m.converged},
                                {"iterations", m.iterations},
                                {"coefficients", vec_json(m.coefficients)},
                                {"support_vectors", mat_json(m.support_vectors)}});
        j["machines"] = machines;
    }
    return j.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    }
    if (j.value("format", "") != kModelFormat) throw DataError("model: unexpected format tag");
    if (j.value("version", 0) != kModelVersion) throw DataError("model: unsupported version");

    try {
        TrainedModel model;
        model.converged = j.at("converged").get<bool>();
        for (const auto& f : j.at("features")) model.features.push_back(FeatureId::parse(f.get<std::string>()));
        const auto p = static_cast<Eigen::Index>(model.features.size());

        if (j.contains("column_stats")) model.stats = stats_from_json(j.at("column_stats").dump());

        const auto kind = parse_learner(j.at("kind").get<std::string>());
        const auto& params = j.at("params");
        if (kind == LearnerKind::enet) {
            EnetClassifier clf;
            clf.params.lambda = params.at("lambda").get<double>();
            clf.params.alpha_star = params.at("alpha_star").get<double>();
            clf.params.max_iters = params.at("max_iters").get<int>();
            clf.params.tol = params.at("tol").get<double>();
            const auto& classes = j.at("classes");
            if (classes.size() != kNumClasses) throw DataError("model: expected three class entries");
            clf.coefficients.resize(p, kNumClasses);
            for (int c = 0; c < kNumClasses; ++c) {
                const auto& e = classes[static_cast<std::size_t>(c)];
                if (parse_label(e.at("label").get<std::string>()) != label_from_index(c))
                    throw DataError("model: class entries out of order");
                const Eigen::VectorXd coef = vec_from(e.at("coefficients"));
                if (coef.size() != p) throw DataError("model: coefficient count differs from feature count");
                clf.coefficients.col(c) = coef;
                clf.intercepts(c) = e.at("intercept").get<double>();
                clf.converged[c] = e.at("converged").get<bool>();
                clf.sweeps[c] = e.at("sweeps").get<int>();
            }
            model.body = std::move(clf);
        } else {
            SvmClassifier clf;
            clf.params.degree = params.at("degree").get<int>();
            clf.params.c = params.at("c").get<double>();
            clf.params.tol = params.at("tol").get<double>();
            clf.params.max_iters = params.at("max_iters").get<long>();
            for (const auto& e : j.at("machines")) {
                BinarySvm m;
                m.positive = parse_label(e.at("positive").get<std::string>());
                m.negative = parse_label(e.at("negative").get<std::string>());
                m.bias = e.at("bias").get<double>();
                m.converged = e.at("converged").get<bool>();
                m.iterations = e.at("iterations").get<long>();
                m.coefficients = vec_from(e.at("coefficients"));
                m.support_vectors = mat_from(e.at("support_vectors"), p);
                if (m.support_vectors.rows() != m.coefficients.size())
                    throw DataError("model: support vector count differs from coefficient count");
                clf.machines.push_back(std::move(m));
            }
            model.body = std::move(clf);
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace lobbench
