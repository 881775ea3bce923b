#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "osc/nn/model.hpp"
#include "osc/nn/tensor.hpp"

namespace osc::data {

inline constexpr std::size_t kImageBytes = 3072;  // 3 planes of 32x32, row-major
inline constexpr std::size_t kRecordBytes = 1 + kImageBytes;
inline constexpr int kClasses = 10;
inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kSide = 32;

using RecordBytes = std::array<std::uint8_t, kRecordBytes>;

struct Record {
    std::uint8_t label = 0;
    std::array<std::uint8_t, kImageBytes> pixels{};
};

// `bytes` must hold exactly one record. Throws FormatError on a size mismatch and
// CorruptRecordError (carrying `offset`) when the label byte exceeds 9.
Record decode_record(std::span<const std::uint8_t> bytes, std::size_t offset = 0);
RecordBytes encode_record(const Record& record);

// Pixels are held as the original bytes and scaled by 1/255 when read, so a
// full training set costs 150 MB rather than 1.2 GB of doubles.
class ImageDataset final : public nn::Dataset {
public:
    ImageDataset() = default;
    // pixels.size() must equal labels.size() * kImageBytes; labels in [0, 10).
    ImageDataset(std::vector<std::uint8_t> pixels, std::vector<int> labels);

    std::size_t size() const override { return labels_.size(); }
    nn::Shape sample_shape() const override { return {kChannels, kSide, kSide}; }
    int label(std::size_t i) const override { return labels_.at(i); }
    void copy_sample(std::size_t i, std::span<double> out) const override;

    const std::vector<int>& labels() const { return labels_; }
    std::span<const std::uint8_t> image_bytes(std::size_t i) const;
    Record record(std::size_t i) const;
    double pixel(std::size_t i, std::size_t c, std::size_t y, std::size_t x) const;

    // [N, 3, 32, 32] in [0, 1].
    nn::Tensor images() const;
    std::array<std::size_t, kClasses> label_histogram() const;
    ImageDataset select(std::span<const std::size_t> indices) const;

private:
    std::vector<std::uint8_t> pixels_;
    std::vector<int> labels_;
};

// Parses a whole batch file image. Offsets in errors are relative to `bytes`.
ImageDataset parse_records(std::span<const std::uint8_t> bytes);
ImageDataset read_batch_file(const std::filesystem::path& file);

struct Cifar10 {
    ImageDataset train;
    ImageDataset test;
};

// Reads data_batch_1.bin .. data_batch_5.bin and test_batch.bin from `dir`, or
// from `dir`/cifar-10-batches-bin when that is where they live. A missing file
// is a FormatError naming it.
Cifar10 load_cifar10(const std::filesystem::path& dir);

// Exactly n / 10 samples per class, each class shuffled with a generator seeded
// by `seed`, then the union shuffled. Throws ConfigError when n is not a
// multiple of 10, exceeds the dataset, or a class is short.
std::vector<std::size_t> stratified_indices(const ImageDataset& ds, std::size_t n, std::uint64_t seed);
ImageDataset stratified_subset(const ImageDataset& ds, std::size_t n, std::uint64_t seed);

enum class SyntheticKind { Constant, Gradient };

// Constant: every pixel byte equals `value`. Gradient: byte (c, y, x) is
// value + 4 * (x + y) + c, wrapping mod 256. Throws DomainError for a label
// outside [0, 10).
RecordBytes synthetic_check_image(SyntheticKind kind, int label, std::uint8_t value = 0);

// Writes a CIFAR-layout directory whose classes are separable by colour, for
// exercising the benchmark pipeline without the real archive.
void write_synthetic_archive(const std::filesystem::path& dir, std::size_t train_per_class,
                             std::size_t test_per_class, std::uint64_t seed);

}  // namespace osc::data
