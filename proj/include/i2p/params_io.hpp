#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace i2p {

// parameter sets on disk: one flat little-endian float64 blob plus a JSON
// sidecar listing names, shapes and the generating seed

struct NamedMatrix {
    std::string name;
    Eigen::MatrixXd value;
};

inline void save_params(const std::string& bin_path, const std::string& json_path,
                        const std::vector<NamedMatrix>& mats, std::uint64_t seed) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open for write: " + bin_path);
    nlohmann::json meta;
    meta["seed"] = seed;
    meta["dtype"] = "float64_le";
    meta["tensors"] = nlohmann::json::array();
    for (const auto& m : mats) {
        meta["tensors"].push_back({{"name", m.name}, {"rows", m.value.rows()}, {"cols", m.value.cols()}});
        // row-major on disk
        for (Eigen::Index r = 0; r < m.value.rows(); ++r)
            for (Eigen::Index c = 0; c < m.value.cols(); ++c) {
                const double v = m.value(r, c);
                bin.write(reinterpret_cast<const char*>(&v), sizeof(double));
            }
    }
    std::ofstream js(json_path);
    if (!js) throw std::runtime_error("cannot open for write: " + json_path);
    js << meta.dump(2) << '\n';
}

inline std::vector<NamedMatrix> load_params(const std::string& bin_path, const std::string& json_path,
                                            std::uint64_t* seed_out = nullptr) {
    std::ifstream js(json_path);
    if (!js) throw std::runtime_error("cannot open for read: " + json_path);
    nlohmann::json meta = nlohmann::json::parse(js);
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open for read: " + bin_path);

    if (seed_out) *seed_out = meta.at("seed").get<std::uint64_t>();
    std::vector<NamedMatrix> out;
    for (const auto& t : meta.at("tensors")) {
        NamedMatrix m;
        m.name = t.at("name").get<std::string>();
        m.value.resize(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
        for (Eigen::Index r = 0; r < m.value.rows(); ++r)
            for (Eigen::Index c = 0; c < m.value.cols(); ++c) {
                double v;
                if (!bin.read(reinterpret_cast<char*>(&v), sizeof(double)))
                    throw std::runtime_error("parameter blob truncated: " + bin_path);
                m.value(r, c) = v;
            }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace i2p
