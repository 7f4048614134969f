#include "dolb/accelerated_lattice.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <thread>

namespace dolb {

int DynamicsRegistry::register_chain(const DynamicsChain& chain) {
    validate_chain(chain);
    for (const ChainLink& link : chain.links) {
        if (link.type == LinkType::BGK || link.type == LinkType::TRT ||
            link.type == LinkType::RR) {
            const double om = chain.params.collision.omega;
            if (!(om > 0.0 && om < 2.0)) {
                throw std::invalid_argument("relaxation rate " + std::to_string(om) +
                                            " outside the stable range (0, 2)");
            }
        }
    }
    const std::string s = chain_string(chain);
    const std::vector<double> params = serialize_params(chain);
    for (std::size_t slot = 0; slot < instances_.size(); ++slot) {
        const Instance& inst = instances_[slot];
        if (inst.chain_str != s || inst.param_len != std::int64_t(params.size())) continue;
        if (std::equal(params.begin(), params.end(),
                       params_table_.begin() + inst.param_offset)) {
            return int(slot);
        }
    }
    strings_.insert(s);
    Instance inst;
    inst.chain_str = s;
    inst.links = chain.links;
    inst.param_offset = params.empty() ? 0 : std::int64_t(params_table_.size());
    inst.param_len = std::int64_t(params.size());
    params_table_.insert(params_table_.end(), params.begin(), params.end());
    instances_.push_back(std::move(inst));
    return int(instances_.size()) - 1;
}

int DynamicsRegistry::tag_for(const std::string& chain_str) const {
    const auto it = strings_.find(chain_str);
    if (it == strings_.end()) {
        throw std::invalid_argument("chain \"" + chain_str + "\" is not registered");
    }
    return int(std::distance(strings_.begin(), it));
}

const std::string& DynamicsRegistry::chain_for(int tag) const {
    if (tag < 0 || tag >= int(strings_.size())) {
        throw std::out_of_range("tag " + std::to_string(tag) + " is not registered");
    }
    auto it = strings_.begin();
    std::advance(it, tag);
    return *it;
}

std::vector<std::string> DynamicsRegistry::chain_strings() const {
    return {strings_.begin(), strings_.end()};
}

DynamicsChain DynamicsRegistry::chain_at_slot(int slot) const {
    const Instance& inst = instances_.at(std::size_t(slot));
    DynamicsChain chain;
    chain.links = inst.links;
    chain.params = deserialize_params(
        inst.links, params_table_.data() + inst.param_offset, std::size_t(inst.param_len));
    return chain;
}

DispatchSet DispatchSet::all_of(const DynamicsRegistry& registry) {
    std::set<int> tags;
    for (int t = 0; t < registry.num_tags(); ++t) tags.insert(t);
    return DispatchSet(std::move(tags));
}

DispatchSet DispatchSet::from_strings(const DynamicsRegistry& registry,
                                      const std::vector<std::string>& names) {
    std::set<int> tags;
    for (const std::string& name : names) tags.insert(registry.tag_for(name));
    return DispatchSet(std::move(tags));
}

template <typename T>
AcceleratedBlock<T>::AcceleratedBlock(std::array<std::int64_t, 3> interior_dims,
                                      std::array<std::int64_t, 3> origin_,
                                      std::array<std::int64_t, 3> global_dims,
                                      std::array<bool, 3> periodic_)
    : interior(interior_dims), origin(origin_), periodic(periodic_) {
    for (int a = 0; a < 3; ++a) {
        if (interior[a] < 1) throw std::invalid_argument("block extents must be >= 1");
        ext[a] = interior[a] + 2;
    }
    const std::size_t v = std::size_t(vol());
    f_in.assign(19 * v, T(0));
    f_out.assign(19 * v, T(0));
    tag.assign(v, kEnvelopeTag);
    param_index.assign(v, -1);
    cell_index.assign(v, -1);
    for (std::int64_t z = 0; z < interior[2]; ++z) {
        for (std::int64_t y = 0; y < interior[1]; ++y) {
            for (std::int64_t x = 0; x < interior[0]; ++x) {
                const std::int64_t at = idx(x + 1, y + 1, z + 1);
                cell_index[std::size_t(at)] =
                    ((origin[2] + z) * global_dims[1] + origin[1] + y) * global_dims[0] +
                    origin[0] + x;
            }
        }
    }
}

template <typename T>
std::vector<ChainRecipe<T>> compile_recipes(const DynamicsRegistry& registry) {
    std::vector<ChainRecipe<T>> recipes;
    recipes.reserve(std::size_t(registry.num_instances()));
    for (int slot = 0; slot < registry.num_instances(); ++slot) {
        recipes.push_back(compile_chain<T>(registry.chain_at_slot(slot)));
    }
    return recipes;
}

namespace {

template <typename T>
void step_range(AcceleratedBlock<T>& b, const std::vector<ChainRecipe<T>>& recipes,
                std::int64_t z_begin, std::int64_t z_end) {
    const std::int64_t vol = b.vol();
    const T* fin = b.f_in.data();
    T* fout = b.f_out.data();
    std::array<std::int64_t, 19> pull;
    for (int i = 0; i < D3Q19::q; ++i) {
        pull[std::size_t(i)] =
            (D3Q19::c[i][2] * b.ext[1] + D3Q19::c[i][1]) * b.ext[0] + D3Q19::c[i][0];
    }
    for (std::int64_t z = z_begin; z < z_end; ++z) {
        for (std::int64_t y = 1; y <= b.interior[1]; ++y) {
            std::int64_t at = b.idx(1, y, z);
            for (std::int64_t x = 1; x <= b.interior[0]; ++x, ++at) {
                Populations<T> f;
                for (int i = 0; i < D3Q19::q; ++i) {
                    f[i] = fin[std::size_t(i) * std::size_t(vol) +
                               std::size_t(at - pull[std::size_t(i)])];
                }
                recipes[std::size_t(b.param_index[std::size_t(at)])].apply(f);
                for (int i = 0; i < D3Q19::q; ++i) {
                    fout[std::size_t(i) * std::size_t(vol) + std::size_t(at)] = f[i];
                }
            }
        }
    }
}

}  // namespace

template <typename T>
void collide_and_stream(AcceleratedBlock<T>& block, const DynamicsRegistry& registry,
                        const std::vector<ChainRecipe<T>>& recipes, const DispatchSet& dispatch,
                        int nthreads) {
    // Eager scan: fail before touching any population when a tag is missing.
    // Tags are spatially uniform over long runs, so only changes are inserted.
    std::set<std::int32_t> present;
    std::int32_t prev = kEnvelopeTag - 1;
    for (std::int64_t z = 1; z <= block.interior[2]; ++z) {
        for (std::int64_t y = 1; y <= block.interior[1]; ++y) {
            const std::int64_t row = block.idx(1, y, z);
            for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                const std::int32_t t = block.tag[std::size_t(row + x)];
                if (t != prev) {
                    present.insert(t);
                    prev = t;
                }
            }
        }
    }
    for (const std::int32_t t : present) {
        if (t == kEnvelopeTag || !dispatch.contains(t)) {
            throw DispatchError(t == kEnvelopeTag ? "<untagged cell>" : registry.chain_for(t));
        }
    }

    const std::int64_t z_lo = 1;
    const std::int64_t z_hi = block.interior[2] + 1;
    if (nthreads <= 1 || z_hi - z_lo < 2) {
        step_range(block, recipes, z_lo, z_hi);
    } else {
        const int n = std::min<std::int64_t>(nthreads, z_hi - z_lo);
        std::vector<std::thread> threads;
        const std::int64_t span = z_hi - z_lo;
        for (int k = 0; k < n; ++k) {
            const std::int64_t b0 = z_lo + span * k / n;
            const std::int64_t b1 = z_lo + span * (k + 1) / n;
            threads.emplace_back(
                [&block, &recipes, b0, b1]() { step_range(block, recipes, b0, b1); });
        }
        for (auto& th : threads) th.join();
    }
    block.f_in.swap(block.f_out);
}

template <typename T>
void refresh_envelope_periodic(AcceleratedBlock<T>& block) {
    // Axis-by-axis sweeps; each sweep spans the full extent of the axes
    // already handled so that edge values wrap correctly.
    const std::int64_t vol = block.vol();
    for (int axis = 0; axis < 3; ++axis) {
        if (!block.periodic[std::size_t(axis)]) continue;
        const std::int64_t n = block.interior[std::size_t(axis)];
        std::array<std::int64_t, 3> lo = {1, 1, 1};
        std::array<std::int64_t, 3> hi = {block.ext[0] - 1, block.ext[1] - 1, block.ext[2] - 1};
        for (int a = 0; a < axis; ++a) {
            lo[std::size_t(a)] = 0;
            hi[std::size_t(a)] = block.ext[std::size_t(a)];
        }
        for (int side = 0; side < 2; ++side) {
            // side 0: low envelope plane <- high interior plane, side 1: the converse.
            std::array<std::int64_t, 3> src_lo = lo, src_hi = hi, dst_lo = lo;
            src_lo[std::size_t(axis)] = side == 0 ? n : 1;
            src_hi[std::size_t(axis)] = src_lo[std::size_t(axis)] + 1;
            dst_lo[std::size_t(axis)] = side == 0 ? 0 : n + 1;
            for (std::int64_t z = src_lo[2]; z < src_hi[2]; ++z) {
                for (std::int64_t y = src_lo[1]; y < src_hi[1]; ++y) {
                    for (std::int64_t x = src_lo[0]; x < src_hi[0]; ++x) {
                        std::array<std::int64_t, 3> d = {x, y, z};
                        d[std::size_t(axis)] = dst_lo[std::size_t(axis)];
                        const std::int64_t src = block.idx(x, y, z);
                        const std::int64_t dst = block.idx(d[0], d[1], d[2]);
                        for (int i = 0; i < D3Q19::q; ++i) {
                            block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(dst)] =
                                block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(src)];
                        }
                    }
                }
            }
        }
    }
}

std::vector<std::string> show_required_models(const ReferenceLattice& reference) {
    return reference.required_models();
}

template <typename T>
AcceleratedBlock<T> mirror_to_accelerated(const ReferenceLattice& reference,
                                          DynamicsRegistry& registry) {
    const auto dims = reference.dims();
    AcceleratedBlock<T> block(dims, {0, 0, 0}, dims, reference.periodic());

    std::map<const Dynamics*, int> slot_of;
    for (const Dynamics* dyn : reference.chain_instances()) {
        slot_of[dyn] = registry.register_chain(dyn->chain());
    }

    const std::int64_t vol = block.vol();
    for (std::int64_t z = 0; z < dims[2]; ++z) {
        for (std::int64_t y = 0; y < dims[1]; ++y) {
            for (std::int64_t x = 0; x < dims[0]; ++x) {
                const auto& cell = reference.cell(x, y, z);
                if (cell.dynamics == nullptr) {
                    throw std::invalid_argument("mirror_to_accelerated: cell without a chain");
                }
                const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                const int slot = slot_of.at(cell.dynamics);
                block.param_index[std::size_t(at)] = slot;
                block.tag[std::size_t(at)] = std::int32_t(registry.tag_of_slot(slot));
                for (int i = 0; i < D3Q19::q; ++i) {
                    block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)] =
                        T(cell.f[i]);
                }
            }
        }
    }
    return block;
}

template <typename T>
ReferenceLattice mirror_to_reference(const AcceleratedBlock<T>& block,
                                     const DynamicsRegistry& registry) {
    ReferenceLattice reference(block.interior, block.periodic);
    const std::int64_t vol = block.vol();
    std::map<int, DynamicsChain> chains;
    for (std::int64_t z = 0; z < block.interior[2]; ++z) {
        for (std::int64_t y = 0; y < block.interior[1]; ++y) {
            for (std::int64_t x = 0; x < block.interior[0]; ++x) {
                const std::int64_t at = block.idx(x + 1, y + 1, z + 1);
                const int slot = block.param_index[std::size_t(at)];
                if (slot < 0) {
                    throw std::invalid_argument("mirror_to_reference: untagged interior cell");
                }
                auto it = chains.find(slot);
                if (it == chains.end()) {
                    it = chains.emplace(slot, registry.chain_at_slot(slot)).first;
                }
                reference.set_chain({{x, y, z}, {x + 1, y + 1, z + 1}}, it->second);
                auto& cell = reference.cell(x, y, z);
                for (int i = 0; i < D3Q19::q; ++i) {
                    cell.f[i] =
                        double(block.f_in[std::size_t(i) * std::size_t(vol) + std::size_t(at)]);
                }
            }
        }
    }
    return reference;
}

namespace {

constexpr char kDumpMagic[5] = {'D', 'O', 'L', 'B', '1'};

}  // namespace

template <typename T>
void write_field_dump(const std::string& path, const AcceleratedBlock<T>& block) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open \"" + path + "\" for writing");
    out.write(kDumpMagic, 5);
    const std::uint8_t prec = sizeof(T);
    const std::uint32_t q = D3Q19::q;
    out.write(reinterpret_cast<const char*>(&prec), 1);
    out.write(reinterpret_cast<const char*>(&q), 4);
    std::array<std::uint64_t, 3> dims;
    for (int a = 0; a < 3; ++a) dims[std::size_t(a)] = std::uint64_t(block.interior[a]);
    out.write(reinterpret_cast<const char*>(dims.data()), 24);
    const std::int64_t vol = block.vol();
    std::vector<T> plane(std::size_t(block.interior[0]));
    for (int i = 0; i < D3Q19::q; ++i) {
        for (std::int64_t z = 0; z < block.interior[2]; ++z) {
            for (std::int64_t y = 0; y < block.interior[1]; ++y) {
                const std::int64_t at = block.idx(1, y + 1, z + 1);
                std::memcpy(plane.data(),
                            block.f_in.data() + std::size_t(i) * std::size_t(vol) +
                                std::size_t(at),
                            plane.size() * sizeof(T));
                out.write(reinterpret_cast<const char*>(plane.data()),
                          std::streamsize(plane.size() * sizeof(T)));
            }
        }
    }
    if (!out) throw std::runtime_error("short write to \"" + path + "\"");
}

FieldDump read_field_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open \"" + path + "\" for reading");
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kDumpMagic, 5) != 0) {
        throw std::runtime_error("\"" + path + "\" is not a DOLB1 field dump");
    }
    std::uint8_t prec = 0;
    std::uint32_t q = 0;
    in.read(reinterpret_cast<char*>(&prec), 1);
    in.read(reinterpret_cast<char*>(&q), 4);
    if (q != D3Q19::q || (prec != 4 && prec != 8)) {
        throw std::runtime_error("unsupported field dump header in \"" + path + "\"");
    }
    std::array<std::uint64_t, 3> dims;
    in.read(reinterpret_cast<char*>(dims.data()), 24);
    FieldDump dump;
    dump.precision_bytes = prec;
    for (int a = 0; a < 3; ++a) dump.dims[a] = std::int64_t(dims[std::size_t(a)]);
    const std::size_t n = std::size_t(dump.dims[0] * dump.dims[1] * dump.dims[2]) * 19;
    dump.data.resize(n);
    if (prec == 8) {
        in.read(reinterpret_cast<char*>(dump.data.data()), std::streamsize(n * 8));
    } else {
        std::vector<float> tmp(n);
        in.read(reinterpret_cast<char*>(tmp.data()), std::streamsize(n * 4));
        std::copy(tmp.begin(), tmp.end(), dump.data.begin());
    }
    if (!in) throw std::runtime_error("truncated field dump \"" + path + "\"");
    return dump;
}

template struct AcceleratedBlock<float>;
template struct AcceleratedBlock<double>;
template std::vector<ChainRecipe<float>> compile_recipes<float>(const DynamicsRegistry&);
template std::vector<ChainRecipe<double>> compile_recipes<double>(const DynamicsRegistry&);
template void collide_and_stream<float>(AcceleratedBlock<float>&, const DynamicsRegistry&,
                                        const std::vector<ChainRecipe<float>>&,
                                        const DispatchSet&, int);
template void collide_and_stream<double>(AcceleratedBlock<double>&, const DynamicsRegistry&,
                                         const std::vector<ChainRecipe<double>>&,
                                         const DispatchSet&, int);
template void refresh_envelope_periodic<float>(AcceleratedBlock<float>&);
template void refresh_envelope_periodic<double>(AcceleratedBlock<double>&);
template AcceleratedBlock<float> mirror_to_accelerated<float>(const ReferenceLattice&,
                                                              DynamicsRegistry&);
template AcceleratedBlock<double> mirror_to_accelerated<double>(const ReferenceLattice&,
                                                                DynamicsRegistry&);
template ReferenceLattice mirror_to_reference<float>(const AcceleratedBlock<float>&,
                                                     const DynamicsRegistry&);
template ReferenceLattice mirror_to_reference<double>(const AcceleratedBlock<double>&,
                                                      const DynamicsRegistry&);
template void write_field_dump<float>(const std::string&, const AcceleratedBlock<float>&);
template void write_field_dump<double>(const std::string&, const AcceleratedBlock<double>&);

}  // namespace dolb
