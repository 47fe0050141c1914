#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "foldsim/dynamics.hpp"

namespace foldsim {

/// Trajectory table: `t,q_<jointid>...,qd_<jointid>...,constraint_err,ke,pe`,
/// one row per sample, 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory,
                           const std::vector<std::string>& joint_ids);

/// Joint ids in coordinate-index order.
std::vector<std::string> coordinate_joint_ids(const KinematicTree& tree);

/// World-frame polygon vertices of every body (dummy included) for up to
/// max_frames evenly strided samples.
nlohmann::ordered_json frames_json(const MechanismSpec& mech, const KinematicTree& tree,
                                   const Trajectory& trajectory, int max_frames);

/// FNV-1a 64-bit content hash, hex encoded.
std::string content_hash(const std::string& bytes);

struct RunManifest {
    std::string command;
    std::string input_path;
    std::string input_hash;
    nlohmann::ordered_json config;
    std::vector<std::string> outputs; // file names relative to the output dir

    nlohmann::ordered_json to_json() const;
};

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace foldsim
