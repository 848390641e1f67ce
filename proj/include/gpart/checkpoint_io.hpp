#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpart/model.hpp"

namespace gpart {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checkpoint container layout (all integers little-endian):
//   bytes 0..3   magic "GPCK"
//   bytes 4..7   uint32 format version
//   bytes 8..15  uint64 JSON header length in bytes
//   header       UTF-8 JSON: model config plus an ordered block table
//                [{name, rows, cols}, ...]
//   payload      per block, rows*cols IEEE-754 float64 values, row-major,
//                in block-table order
// The block table makes the file self-describing so other implementations
// can read it without this code.
inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    nlohmann::json header;
    header["config"] = {
        {"k", ckpt.config.k},
        {"l_feat", ckpt.config.l_feat},
        {"l_gnn", ckpt.config.l_gnn},
        {"l_clf", ckpt.config.l_clf},
        {"projection_seed", ckpt.config.projection_seed},
    };
    nlohmann::json blocks = nlohmann::json::array();
    std::vector<const Mat*> mats;
    for_each_param(ckpt, [&](const std::string& name, const Mat& m) {
        blocks.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
        mats.push_back(&m);
    });
    header["blocks"] = blocks;
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint file for writing: " + path);
    out.write("GPCK", 4);
    const std::uint32_t version = ckpt.format_version;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t hlen = header_str.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const Mat* m : mats) {
        out.write(reinterpret_cast<const char*>(m->data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m->size())));
    }
    if (!out) throw CheckpointError("write failed: " + path);
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint reader assumes a little-endian host");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GPCK", 4) != 0) {
        throw CheckpointError("not a checkpoint file (bad magic): " + path);
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    if (!in || hlen > (1u << 20)) throw CheckpointError("corrupt checkpoint header length");
    std::string header_str(hlen, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw CheckpointError("truncated checkpoint header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
    }

    ModelCheckpoint ckpt;
    try {
        const auto& cfg = header.at("config");
        ckpt.config.k = cfg.at("k").get<int>();
        ckpt.config.l_feat = cfg.at("l_feat").get<int>();
        ckpt.config.l_gnn = cfg.at("l_gnn").get<int>();
        ckpt.config.l_clf = cfg.at("l_clf").get<int>();
        ckpt.config.projection_seed = cfg.at("projection_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("malformed checkpoint config: ") + e.what());
    }
    ckpt.format_version = version;

    const auto make_zero = [&](int layers) {
        Mlp mlp;
        for (int l = 0; l < layers; ++l) {
            mlp.layers.push_back({Mat::Zero(ckpt.config.k, ckpt.config.k), Mat::Zero(1, ckpt.config.k)});
        }
        return mlp;
    };
    ckpt.feature_mlp = make_zero(ckpt.config.l_feat);
    ckpt.g_sim = make_zero(ckpt.config.l_clf);
    ckpt.g_dis = make_zero(ckpt.config.l_clf);

    const auto& blocks = header.at("blocks");
    std::size_t idx = 0;
    for_each_param(ckpt, [&](const std::string& name, Mat& m) {
        if (idx >= blocks.size()) throw CheckpointError("checkpoint block table too short");
        const auto& blk = blocks[idx++];
        if (blk.at("name").get<std::string>() != name ||
            blk.at("rows").get<Eigen::Index>() != m.rows() ||
            blk.at("cols").get<Eigen::Index>() != m.cols()) {
            throw CheckpointError("checkpoint block '" + name + "' has inconsistent shape");
        }
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
        if (!in) throw CheckpointError("truncated checkpoint payload at block '" + name + "'");
    });
    if (idx != blocks.size()) throw CheckpointError("checkpoint block table too long");

    bool finite = true;
    for_each_param(ckpt, [&](const std::string&, const Mat& m) { finite = finite && m.allFinite(); });
    if (!finite) throw CheckpointError("checkpoint contains non-finite weights");
    return ckpt;
}

}  // namespace gpart
