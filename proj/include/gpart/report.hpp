#pragma once

#include <json.hpp>

#include "gpart/infer.hpp"

namespace gpart {

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::json to_json(const QualityMetrics& q) {
    return {
        {"ac", q.ac},           {"ari", q.ari},
        {"precision", q.precision}, {"recall", q.recall},
        {"f1", q.f1},           {"modularity", q.modularity},
        {"k_pred", q.k_pred},   {"k_true", q.k_true},
    };
}

inline QualityMetrics quality_from_json(const nlohmann::json& j) {
    QualityMetrics q;
    q.ac = j.at("ac").get<double>();
    q.ari = j.at("ari").get<double>();
    q.precision = j.at("precision").get<double>();
    q.recall = j.at("recall").get<double>();
    q.f1 = j.at("f1").get<double>();
    q.modularity = j.at("modularity").get<double>();
    q.k_pred = j.at("k_pred").get<NodeId>();
    q.k_true = j.at("k_true").get<NodeId>();
    return q;
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j{
        {"schema_version", kReportSchemaVersion},
        {"phase", r.phase},
        {"n", r.n},
        {"m", r.m},
        {"n_super", r.n_super},
        {"k_init", r.k_init},
        {"k_final", r.k_final},
        {"zero_embedding_rows", r.zero_embedding_rows},
        {"timings",
         {{"feat_s", r.timings.feat_s},
          {"ffp_s", r.timings.ffp_s},
          {"init_s", r.timings.init_s},
          {"refine_s", r.timings.refine_s},
          {"total_s", r.timings.total_s}}},
    };
    if (r.quality) j["quality"] = to_json(*r.quality);
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
        throw std::invalid_argument("unsupported report schema version");
    }
    RunReport r;
    r.phase = j.at("phase").get<std::string>();
    r.n = j.at("n").get<std::int64_t>();
    r.m = j.at("m").get<std::int64_t>();
    r.n_super = j.at("n_super").get<std::int64_t>();
    r.k_init = j.at("k_init").get<NodeId>();
    r.k_final = j.at("k_final").get<NodeId>();
    r.zero_embedding_rows = j.at("zero_embedding_rows").get<std::int64_t>();
    const auto& t = j.at("timings");
    r.timings.feat_s = t.at("feat_s").get<double>();
    r.timings.ffp_s = t.at("ffp_s").get<double>();
    r.timings.init_s = t.at("init_s").get<double>();
    r.timings.refine_s = t.at("refine_s").get<double>();
    r.timings.total_s = t.at("total_s").get<double>();
    if (j.contains("quality")) r.quality = quality_from_json(j.at("quality"));
    return r;
}

}  // namespace gpart
