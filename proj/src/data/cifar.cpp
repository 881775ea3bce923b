#include "osc/data/cifar.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <string>

#include "osc/error.hpp"

namespace osc::data {

namespace fs = std::filesystem;

Record decode_record(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (bytes.size() != kRecordBytes) {
        throw FormatError("record at offset " + std::to_string(offset) + " has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(kRecordBytes));
    }
    if (bytes[0] >= kClasses) {
        throw CorruptRecordError("label byte " + std::to_string(bytes[0]) + " out of range", offset);
    }
    Record r;
    r.label = bytes[0];
    std::copy(bytes.begin() + 1, bytes.end(), r.pixels.begin());
    return r;
}

RecordBytes encode_record(const Record& record) {
    RecordBytes out{};
    out[0] = record.label;
    std::copy(record.pixels.begin(), record.pixels.end(), out.begin() + 1);
    return out;
}

ImageDataset::ImageDataset(std::vector<std::uint8_t> pixels, std::vector<int> labels)
    : pixels_(std::move(pixels)), labels_(std::move(labels)) {
    if (pixels_.size() != labels_.size() * kImageBytes) {
        throw ShapeError("ImageDataset: " + std::to_string(pixels_.size()) + " pixel bytes for " +
                         std::to_string(labels_.size()) + " labels");
    }
    for (int l : labels_) {
        if (l < 0 || l >= kClasses) throw LabelError("ImageDataset: label " + std::to_string(l) + " outside [0, 10)");
    }
}

std::span<const std::uint8_t> ImageDataset::image_bytes(std::size_t i) const {
    if (i >= size()) throw ShapeError("ImageDataset: index " + std::to_string(i) + " out of range");
    return std::span<const std::uint8_t>(pixels_).subspan(i * kImageBytes, kImageBytes);
}

void ImageDataset::copy_sample(std::size_t i, std::span<double> out) const {
    if (out.size() != kImageBytes) throw ShapeError("ImageDataset::copy_sample: wrong output size");
    auto src = image_bytes(i);
    for (std::size_t j = 0; j < kImageBytes; ++j) out[j] = src[j] / 255.0;
}

Record ImageDataset::record(std::size_t i) const {
    Record r;
    auto src = image_bytes(i);
    r.label = static_cast<std::uint8_t>(labels_[i]);
    std::copy(src.begin(), src.end(), r.pixels.begin());
    return r;
}

double ImageDataset::pixel(std::size_t i, std::size_t c, std::size_t y, std::size_t x) const {
    if (c >= kChannels || y >= kSide || x >= kSide) throw ShapeError("ImageDataset::pixel: coordinate out of range");
    return image_bytes(i)[(c * kSide + y) * kSide + x] / 255.0;
}

nn::Tensor ImageDataset::images() const {
    nn::Tensor t({size(), kChannels, kSide, kSide});
    auto d = t.data();
    for (std::size_t j = 0; j < pixels_.size(); ++j) d[j] = pixels_[j] / 255.0;
    return t;
}

std::array<std::size_t, kClasses> ImageDataset::label_histogram() const {
    std::array<std::size_t, kClasses> h{};
    for (int l : labels_) ++h[static_cast<std::size_t>(l)];
    return h;
}

ImageDataset ImageDataset::select(std::span<const std::size_t> indices) const {
    std::vector<std::uint8_t> px;
    px.reserve(indices.size() * kImageBytes);
    std::vector<int> lb;
    lb.reserve(indices.size());
    for (std::size_t i : indices) {
        auto src = image_bytes(i);
        px.insert(px.end(), src.begin(), src.end());
        lb.push_back(labels_[i]);
    }
    return ImageDataset(std::move(px), std::move(lb));
}

ImageDataset parse_records(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % kRecordBytes != 0) {
        throw FormatError("batch of " + std::to_string(bytes.size()) + " bytes is not a multiple of " +
                          std::to_string(kRecordBytes));
    }
    const std::size_t n = bytes.size() / kRecordBytes;
    std::vector<std::uint8_t> px;
    px.reserve(n * kImageBytes);
    std::vector<int> lb;
    lb.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t offset = r * kRecordBytes;
        const std::uint8_t label = bytes[offset];
        if (label >= kClasses) {
            throw CorruptRecordError("label byte " + std::to_string(label) + " out of range", offset);
        }
        lb.push_back(label);
        px.insert(px.end(), bytes.begin() + offset + 1, bytes.begin() + offset + kRecordBytes);
    }
    return ImageDataset(std::move(px), std::move(lb));
}

ImageDataset read_batch_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FormatError("cannot open " + file.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_records(bytes);
    } catch (const CorruptRecordError& e) {
        throw CorruptRecordError(file.string() + ": " + e.what(), e.offset());
    } catch (const FormatError& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

namespace {

const char* const kTrainFiles[] = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin",
                                   "data_batch_5.bin"};
const char* const kTestFile = "test_batch.bin";

ImageDataset concat(const std::vector<ImageDataset>& parts) {
    std::vector<std::uint8_t> px;
    std::vector<int> lb;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto src = p.image_bytes(i);
            px.insert(px.end(), src.begin(), src.end());
        }
        lb.insert(lb.end(), p.labels().begin(), p.labels().end());
    }
    return ImageDataset(std::move(px), std::move(lb));
}

}  // namespace

Cifar10 load_cifar10(const fs::path& dir) {
    fs::path root = dir;
    if (!fs::exists(root / kTestFile) && fs::exists(root / "cifar-10-batches-bin" / kTestFile)) {
        root /= "cifar-10-batches-bin";
    }
    std::vector<ImageDataset> parts;
    for (const char* name : kTrainFiles) {
        if (!fs::exists(root / name)) throw FormatError("missing CIFAR-10 batch " + (root / name).string());
        parts.push_back(read_batch_file(root / name));
    }
    if (!fs::exists(root / kTestFile)) throw FormatError("missing CIFAR-10 batch " + (root / kTestFile).string());
    Cifar10 out;
    out.train = concat(parts);
    out.test = read_batch_file(root / kTestFile);
    return out;
}

std::vector<std::size_t> stratified_indices(const ImageDataset& ds, std::size_t n, std::uint64_t seed) {
    if (n % kClasses != 0) throw ConfigError("subset size " + std::to_string(n) + " is not a multiple of 10");
    if (n > ds.size()) {
        throw ConfigError("subset size " + std::to_string(n) + " exceeds dataset size " + std::to_string(ds.size()));
    }
    const std::size_t per_class = n / kClasses;
    std::vector<std::vector<std::size_t>> by_class(kClasses);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.label(i))].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (int c = 0; c < kClasses; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.size() < per_class) {
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                              " samples, subset needs " + std::to_string(per_class));
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

ImageDataset stratified_subset(const ImageDataset& ds, std::size_t n, std::uint64_t seed) {
    const auto idx = stratified_indices(ds, n, seed);
    return ds.select(idx);
}

RecordBytes synthetic_check_image(SyntheticKind kind, int label, std::uint8_t value) {
    if (label < 0 || label >= kClasses) throw DomainError("synthetic label " + std::to_string(label) + " outside [0, 10)");
    Record r;
    r.label = static_cast<std::uint8_t>(label);
    for (std::size_t c = 0; c < kChannels; ++c) {
        for (std::size_t y = 0; y < kSide; ++y) {
            for (std::size_t x = 0; x < kSide; ++x) {
                const std::size_t v = kind == SyntheticKind::Constant ? value : value + 4 * (x + y) + c;
                r.pixels[(c * kSide + y) * kSide + x] = static_cast<std::uint8_t>(v & 0xff);
            }
        }
    }
    return encode_record(r);
}

namespace {

void write_split(const fs::path& file, std::size_t per_class, std::size_t shard, std::size_t shards,
                 std::mt19937_64& rng) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw FormatError("cannot write " + file.string());
    std::uniform_int_distribution<int> noise(-40, 40);
    for (std::size_t k = shard; k < per_class * kClasses; k += shards) {
        const int label = static_cast<int>(k % kClasses);
        Record r;
        r.label = static_cast<std::uint8_t>(label);
        const int base[3] = {20 + 23 * label, 230 - 21 * label, label % 2 == 0 ? 60 : 190};
        for (std::size_t c = 0; c < kChannels; ++c) {
            for (std::size_t p = 0; p < kSide * kSide; ++p) {
                r.pixels[c * kSide * kSide + p] = static_cast<std::uint8_t>(std::clamp(base[c] + noise(rng), 0, 255));
            }
        }
        const auto bytes = encode_record(r);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw FormatError("write failed for " + file.string());
}

}  // namespace

void write_synthetic_archive(const fs::path& dir, std::size_t train_per_class, std::size_t test_per_class,
                             std::uint64_t seed) {
    fs::create_directories(dir);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < std::size(kTrainFiles); ++s) {
        write_split(dir / kTrainFiles[s], train_per_class, s, std::size(kTrainFiles), rng);
    }
    write_split(dir / kTestFile, test_per_class, 0, 1, rng);
}

}  // namespace osc::data
