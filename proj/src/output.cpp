#include "foldsim/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "foldsim/version.hpp"

namespace foldsim {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::vector<std::string> coordinate_joint_ids(const KinematicTree& tree) {
    std::vector<std::string> ids(tree.coordinate_index.size());
    for (const auto& [joint, index] : tree.coordinate_index) {
        ids[index] = joint;
    }
    return ids;
}

std::string trajectory_csv(const Trajectory& trajectory,
                           const std::vector<std::string>& joint_ids) {
    std::ostringstream out;
    out << "t";
    for (const std::string& id : joint_ids) out << ",q_" << id;
    for (const std::string& id : joint_ids) out << ",qd_" << id;
    out << ",constraint_err,ke,pe\n";
    for (const TrajectorySample& sample : trajectory.samples) {
        out << fmt17(sample.state.t);
        for (int i = 0; i < sample.state.q.size(); ++i) out << "," << fmt17(sample.state.q[i]);
        for (int i = 0; i < sample.state.qdot.size(); ++i) {
            out << "," << fmt17(sample.state.qdot[i]);
        }
        out << "," << fmt17(sample.constraint_error) << "," << fmt17(sample.kinetic_energy)
            << "," << fmt17(sample.potential_energy) << "\n";
    }
    return out.str();
}

nlohmann::ordered_json frames_json(const MechanismSpec& mech, const KinematicTree& tree,
                                   const Trajectory& trajectory, int max_frames) {
    if (max_frames < 1) throw ValueError("max_frames must be >= 1");
    const ArticulatedModel model(mech, tree);

    nlohmann::ordered_json doc;
    doc["body_ids"] = nlohmann::ordered_json::array();
    for (const auto& node : model.nodes()) {
        doc["body_ids"].push_back(node.id);
    }

    const int n = static_cast<int>(trajectory.samples.size());
    const int stride = std::max(1, (n + max_frames - 1) / max_frames);
    doc["frames"] = nlohmann::ordered_json::array();
    for (int i = 0; i < n; i += stride) {
        const TrajectorySample& sample = trajectory.samples[i];
        const auto states = model.sweep(sample.state.q);
        nlohmann::ordered_json frame;
        frame["t"] = sample.state.t;
        nlohmann::ordered_json bodies;
        for (std::size_t b = 0; b < model.nodes().size(); ++b) {
            nlohmann::ordered_json vertices = nlohmann::ordered_json::array();
            for (const Eigen::Vector2d& v : model.nodes()[b].geometry->polygon) {
                const Eigen::Vector3d w =
                    states.point_world(static_cast<int>(b), {v.x(), v.y(), 0.0});
                vertices.push_back({w.x(), w.y(), w.z()});
            }
            bodies[model.nodes()[b].id] = std::move(vertices);
        }
        frame["bodies"] = std::move(bodies);
        doc["frames"].push_back(std::move(frame));
    }
    return doc;
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a:") + buf;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json doc;
    doc["tool"] = "foldsim";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["input"] = input_path;
    doc["input_hash"] = input_hash;
    doc["config"] = config;
    doc["outputs"] = outputs;
    return doc;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    out << contents;
    if (!out) throw Error("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace foldsim
