#pragma once

#include <cstdint>
#include <filesystem>

#include "thermoscope/cnn.hpp"

namespace thermoscope {

struct CheckpointMeta {
    std::uint64_t seed = 0;
    int epochs_trained = 0;
    int best_epoch = 0;
    double best_val_mse = 0.0;
};

// Versioned binary layout: magic, scalar width, JSON header (config, target
// stats, metadata, shapes), then raw little-endian IEEE-754 parameter blobs.
// Round-trips bit-exactly.
template <typename T>
void save_checkpoint(const CnnModel<T>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

template <typename T>
CnnModel<T> load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

}  // namespace thermoscope
