#include "thermoscope/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "thermoscope/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; add byte swapping for this target");

namespace thermoscope {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'C', 'K', 'P', 'T', '0', '1'};

nlohmann::json config_to_json(const CnnConfig& c) {
    return {{"n_blocks", c.n_blocks},     {"base_filters", c.base_filters},
            {"kernel_time", c.kernel_time}, {"kernel_rx", c.kernel_rx},
            {"pool_time", c.pool_time},   {"dropout_rate", c.dropout_rate},
            {"n_pts", c.n_pts},           {"input_time", c.input_time},
            {"input_rx", c.input_rx}};
}

CnnConfig config_from_json(const nlohmann::json& j) {
    CnnConfig c;
    c.n_blocks = j.at("n_blocks").get<int>();
    c.base_filters = j.at("base_filters").get<int>();
    c.kernel_time = j.at("kernel_time").get<int>();
    c.kernel_rx = j.at("kernel_rx").get<int>();
    c.pool_time = j.at("pool_time").get<int>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.n_pts = j.at("n_pts").get<int>();
    c.input_time = j.at("input_time").get<int>();
    c.input_rx = j.at("input_rx").get<int>();
    return c;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

template <typename T>
void save_checkpoint(const CnnModel<T>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
    nlohmann::json header;
    header["config"] = config_to_json(model.config());
    header["target_mean"] = model.target_mean();
    header["target_std"] = model.target_std();
    header["meta"] = {{"seed", meta.seed},
                      {"epochs_trained", meta.epochs_trained},
                      {"best_epoch", meta.best_epoch},
                      {"best_val_mse", meta.best_val_mse}};
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& t : model.params().tensors) shapes.push_back(t.shape);
    header["shapes"] = shapes;
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetLoadError("checkpoint: cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(sizeof(T)));
    write_u32(out, static_cast<std::uint32_t>(hs.size()));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& t : model.params().tensors) {
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(T)));
    }
    if (!out) throw DatasetLoadError("checkpoint: short write to " + path.string());
}

template <typename T>
CnnModel<T> load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetLoadError("checkpoint: cannot open " + path.string());

    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DatasetLoadError("checkpoint: bad magic/version in " + path.string());
    }
    const std::uint32_t width = read_u32(in);
    if (width != sizeof(T)) {
        throw DatasetLoadError("checkpoint: scalar width " + std::to_string(width) +
                               " does not match requested width " + std::to_string(sizeof(T)) +
                               " in " + path.string());
    }
    const std::uint32_t hlen = read_u32(in);
    std::string hs(hlen, '\0');
    in.read(hs.data(), hlen);
    if (!in) throw DatasetLoadError("checkpoint: truncated header in " + path.string());

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw DatasetLoadError("checkpoint: corrupt header in " + path.string() + ": " + e.what());
    }

    CnnModel<T> model(config_from_json(header.at("config")), 0);
    model.set_target_stats(header.at("target_mean").get<double>(),
                           header.at("target_std").get<double>());
    if (meta != nullptr) {
        const auto& m = header.at("meta");
        meta->seed = m.at("seed").get<std::uint64_t>();
        meta->epochs_trained = m.at("epochs_trained").get<int>();
        meta->best_epoch = m.at("best_epoch").get<int>();
        meta->best_val_mse = m.at("best_val_mse").get<double>();
    }

    const auto shapes = header.at("shapes");
    if (shapes.size() != model.params().tensors.size()) {
        throw DatasetLoadError("checkpoint: tensor count mismatch in " + path.string());
    }
    for (std::size_t i = 0; i < model.params().tensors.size(); ++i) {
        auto& t = model.params().tensors[i];
        if (shapes[i].get<std::vector<int>>() != t.shape) {
            throw DatasetLoadError("checkpoint: tensor shape mismatch in " + path.string());
        }
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(T)));
    }
    if (!in) throw DatasetLoadError("checkpoint: truncated parameter data in " + path.string());
    model.set_mode(CnnMode::eval);
    return model;
}

template void save_checkpoint<float>(const CnnModel<float>&, const CheckpointMeta&,
                                     const std::filesystem::path&);
template void save_checkpoint<double>(const CnnModel<double>&, const CheckpointMeta&,
                                      const std::filesystem::path&);
template CnnModel<float> load_checkpoint<float>(const std::filesystem::path&, CheckpointMeta*);
template CnnModel<double> load_checkpoint<double>(const std::filesystem::path&, CheckpointMeta*);

}  // namespace thermoscope
