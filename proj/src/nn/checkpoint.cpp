#include "osc/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <string>

#include "osc/error.hpp"

namespace osc::nn {

namespace {

constexpr std::array<char, 4> kMagic = {'O', 'S', 'C', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("checkpoint truncated reading ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t narrow(std::size_t v) {
    if (v > 0xffffffffu) throw FormatError("checkpoint dimension exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_tensors(std::span<const Tensor* const> tensors, std::ostream& os) {
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, narrow(tensors.size()));
    for (const Tensor* t : tensors) {
        put_u32(os, narrow(t->rank()));
        for (std::size_t d : t->shape()) put_u32(os, narrow(d));
    }
    for (const Tensor* t : tensors) {
        for (double v : t->data()) put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    if (!os) throw FormatError("checkpoint write failed");
}

std::vector<Tensor> read_tensors(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("checkpoint: bad magic");
    const std::uint32_t count = get_u32(is, "tensor count");
    std::vector<Shape> shapes(count);
    for (auto& shape : shapes) {
        const std::uint32_t rank = get_u32(is, "rank");
        if (rank > 8) throw FormatError("checkpoint: implausible rank " + std::to_string(rank));
        for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(get_u32(is, "dimension"));
    }
    std::vector<Tensor> out;
    out.reserve(count);
    for (auto& shape : shapes) {
        Tensor t(shape);
        for (double& v : t.data()) v = std::bit_cast<float>(get_u32(is, "values"));
        out.push_back(std::move(t));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes");
    return out;
}

void save_checkpoint(const Model& model, std::ostream& os) {
    std::vector<const Tensor*> tensors;
    for (const Parameter* p : model.parameters()) tensors.push_back(&p->value);
    write_tensors(tensors, os);
}

void load_checkpoint(Model& model, std::istream& is) {
    std::vector<Tensor> tensors = read_tensors(is);
    std::vector<Parameter*> params = model.parameters();
    if (tensors.size() != params.size()) {
        throw FormatError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model has " +
                          std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (tensors[i].shape() != params[i]->value.shape()) {
            throw FormatError("checkpoint tensor " + std::to_string(i) + " (" + params[i]->name + ") has shape " +
                              to_string(tensors[i].shape()) + ", model expects " +
                              to_string(params[i]->value.shape()));
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(tensors[i]);
}

}  // namespace osc::nn
