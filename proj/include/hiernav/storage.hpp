#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiernav/behavior.hpp"
#include "hiernav/dynmodel.hpp"
#include "hiernav/errors.hpp"
#include "hiernav/replay.hpp"
#include "hiernav/td3.hpp"

namespace hiernav {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j,
                            int indent = 2) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << j.dump(indent) << "\n";
}

inline nlohmann::json to_json(const MidLevelSpace& s) {
    return {{"dim", s.dim},
            {"interest_dims", s.interest_dims},
            {"angular_dims", s.angular_dims},
            {"raw_feature_dims", s.raw_feature_dims},
            {"sincos_feature_dims", s.sincos_feature_dims}};
}

inline MidLevelSpace mid_space_from_json(const nlohmann::json& j) {
    MidLevelSpace s;
    s.dim = j.at("dim").get<int>();
    s.interest_dims = j.at("interest_dims").get<std::vector<int>>();
    s.angular_dims = j.at("angular_dims").get<std::vector<int>>();
    s.raw_feature_dims = j.at("raw_feature_dims").get<std::vector<int>>();
    s.sincos_feature_dims = j.at("sincos_feature_dims").get<std::vector<int>>();
    return s;
}

namespace detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Behavior library directory: library.json + behavior_<id>.json (learned) +
// replay_<id>.json (retained tail of each training buffer).
// ---------------------------------------------------------------------------

inline void save_library(const std::filesystem::path& dir, const LibraryBuildResult& built,
                         const std::string& env_type, double tail_fraction) {
    std::filesystem::create_directories(dir);
    nlohmann::json lib;
    lib["version"] = 1;
    lib["env_type"] = env_type;
    lib["scripted"] = built.library.scripted;
    nlohmann::json specs = nlohmann::json::array();
    for (const Behavior& b : built.library.behaviors)
        specs.push_back({{"id", b.spec().id}, {"v", detail::vector_to_json(b.spec().v)}});
    lib["specs"] = std::move(specs);
    write_json_file(dir / "library.json", lib);

    for (int i = 0; i < built.library.size(); ++i) {
        const Behavior& b = built.library[i];
        if (!b.scripted())
            write_json_file(dir / ("behavior_" + std::to_string(b.spec().id) + ".json"),
                            to_json(b.policy_net()));
    }

    for (std::size_t i = 0; i < built.replays.size(); ++i) {
        const ReplayBuffer& buffer = built.replays[i];
        const std::size_t n = buffer.size();
        const std::size_t keep = static_cast<std::size_t>(std::ceil(tail_fraction * n));
        const std::size_t start = n - std::min(n, keep);
        nlohmann::json j;
        j["version"] = 1;
        j["behavior_id"] = built.library[static_cast<int>(i)].spec().id;
        j["pretrimmed"] = true;
        j["source_size"] = n;
        j["tail_fraction_applied"] = tail_fraction;
        nlohmann::json transitions = nlohmann::json::array();
        for (std::size_t k = start; k < n; ++k) {
            const Transition& t = buffer.at(k);
            transitions.push_back({{"o", detail::vector_to_json(t.obs_t)},
                                   {"a", detail::vector_to_json(t.action)},
                                   {"o2", detail::vector_to_json(t.obs_t1)},
                                   {"i", t.step_index}});
        }
        j["transitions"] = std::move(transitions);
        write_json_file(dir / ("replay_" + std::to_string(built.library[static_cast<int>(i)].spec().id) +
                               ".json"),
                        j, -1);
    }
}

struct LoadedLibrary {
    BehaviorLibrary library;
    std::string env_type;
    std::vector<int> behavior_ids;
};

// Rebuilds the library; scripted controllers are reconstructed from their
// specs against the provided environment.
inline LoadedLibrary load_library(const std::filesystem::path& dir, const Env& env) {
    const nlohmann::json lib = read_json_file(dir / "library.json");
    if (lib.at("version").get<int>() != 1) throw ParseError("library.json: unsupported version");
    LoadedLibrary out;
    out.env_type = lib.at("env_type").get<std::string>();
    const bool scripted = lib.at("scripted").get<bool>();
    std::vector<BehaviorSpec> specs;
    for (const auto& sj : lib.at("specs")) {
        BehaviorSpec spec;
        spec.id = sj.at("id").get<int>();
        spec.v = detail::vector_from_json(sj.at("v"));
        out.behavior_ids.push_back(spec.id);
        specs.push_back(std::move(spec));
    }
    if (scripted) {
        out.library = make_scripted_library(env, specs);
        return out;
    }
    out.library.scripted = false;
    for (auto& spec : specs) {
        const auto path = dir / ("behavior_" + std::to_string(spec.id) + ".json");
        if (!std::filesystem::exists(path)) throw Error("missing behavior network: " + path.string());
        out.library.behaviors.emplace_back(spec, mlp_from_json(read_json_file(path)));
    }
    return out;
}

struct LoadedReplay {
    ReplayBuffer buffer;
    bool pretrimmed = false;
};

inline std::optional<LoadedReplay> load_replay(const std::filesystem::path& dir, int behavior_id) {
    const auto path = dir / ("replay_" + std::to_string(behavior_id) + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    const nlohmann::json j = read_json_file(path);
    const auto& transitions = j.at("transitions");
    LoadedReplay out{ReplayBuffer(std::max<std::size_t>(transitions.size(), 1)),
                     j.value("pretrimmed", false)};
    for (const auto& tj : transitions) {
        out.buffer.add(Transition{detail::vector_from_json(tj.at("o")),
                                  detail::vector_from_json(tj.at("a")),
                                  detail::vector_from_json(tj.at("o2")), tj.at("i").get<int>()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics models: dynamics_<id>.json alongside the library, L recorded.
// ---------------------------------------------------------------------------

inline void save_dynamics(const std::filesystem::path& dir, const BehaviorDynamicsModel& model,
                          const nlohmann::json& report = {}) {
    nlohmann::json j;
    j["version"] = 1;
    j["behavior_id"] = model.behavior_id;
    j["L"] = model.L;
    j["space"] = to_json(model.space);
    j["net"] = to_json(model.net);
    if (!report.is_null() && !report.empty()) j["fit_report"] = report;
    write_json_file(dir / ("dynamics_" + std::to_string(model.behavior_id) + ".json"), j);
}

inline BehaviorDynamicsModel load_dynamics_model(const std::filesystem::path& dir,
                                                 int behavior_id) {
    const auto path = dir / ("dynamics_" + std::to_string(behavior_id) + ".json");
    if (!std::filesystem::exists(path)) throw Error("missing dynamics model: " + path.string());
    const nlohmann::json j = read_json_file(path);
    BehaviorDynamicsModel m;
    m.behavior_id = j.at("behavior_id").get<int>();
    m.L = j.at("L").get<int>();
    m.space = mid_space_from_json(j.at("space"));
    m.net = mlp_from_json(j.at("net"));
    return m;
}

inline bool has_dynamics(const std::filesystem::path& dir, const std::vector<int>& ids) {
    for (int id : ids)
        if (!std::filesystem::exists(dir / ("dynamics_" + std::to_string(id) + ".json")))
            return false;
    return true;
}

}  // namespace hiernav
