#include "rtspectra/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rtspectra/errors.hpp"

static_assert(std::endian::native == std::endian::little, "field snapshots assume a little-endian host");

namespace rtspectra {

namespace {

constexpr char kMagic[8] = {'R', 'T', 'S', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <class T>
    T get(const char* what) {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T)))
            throw ParseError(std::string("field snapshot: truncated while reading ") + what, offset_);
        offset_ += sizeof(T);
        return v;
    }

    void bytes(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw ParseError(std::string("field snapshot: truncated while reading ") + what,
                             offset_ + static_cast<std::size_t>(in_.gcount()));
        offset_ += n;
    }

    std::size_t offset() const { return offset_; }

private:
    std::istream& in_;
    std::size_t offset_ = 0;
};

void write_header(std::ostream& out, FieldKind kind, const StaggeredGrid& g, std::uint64_t count) {
    out.write(kMagic, 8);
    put<std::uint32_t>(out, kFieldFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    for (int a = 0; a < 3; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.cells(a)));
    for (int a = 0; a < 3; ++a) put<double>(out, g.h(a));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.gravity_axis()));
    put<std::uint64_t>(out, count);
}

struct Header {
    FieldKind kind;
    StaggeredGrid grid;
    std::uint64_t count;
};

Header read_header(Reader& r) {
    char magic[8];
    r.bytes(magic, 8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) throw ParseError("field snapshot: bad magic", 0);
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFieldFormatVersion)
        throw ParseError("field snapshot: unsupported version " + std::to_string(version), 8);
    const auto kind = r.get<std::uint32_t>("kind");
    if (kind > 1) throw ParseError("field snapshot: unknown field kind " + std::to_string(kind), 12);
    const auto dim = r.get<std::uint32_t>("dim");
    if (dim != 2 && dim != 3) throw ParseError("field snapshot: dim must be 2 or 3", 16);
    std::array<int, 3> cells{};
    for (int a = 0; a < 3; ++a) {
        const auto c = r.get<std::uint32_t>("cells");
        if (c == 0 || c > (1u << 20)) throw ParseError("field snapshot: implausible cell count", 20 + 4 * a);
        cells[a] = static_cast<int>(c);
    }
    BoxDomain d;
    d.dim = static_cast<int>(dim);
    for (int a = 0; a < 3; ++a) {
        const double h = r.get<double>("spacing");
        if (!(h > 0.0)) throw ParseError("field snapshot: spacing must be positive", 32 + 8 * a);
        d.lengths[a] = a < d.dim ? h * cells[a] : 1.0;
    }
    const auto ga = r.get<std::uint32_t>("gravity axis");
    if (ga >= dim) throw ParseError("field snapshot: gravity axis out of range", 56);
    d.gravity_axis = static_cast<int>(ga);
    const auto count = r.get<std::uint64_t>("value count");
    try {
        return {static_cast<FieldKind>(kind), StaggeredGrid(d, cells), count};
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("field snapshot: invalid grid: ") + e.what(), 16);
    }
}

void read_payload(Reader& r, std::span<double> dst, std::uint64_t count) {
    if (count != dst.size())
        throw ParseError("field snapshot: value count " + std::to_string(count) + " does not match grid (" +
                             std::to_string(dst.size()) + ")",
                         60);
    r.bytes(reinterpret_cast<char*>(dst.data()), dst.size() * sizeof(double), "payload");
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

void check_csv_size(const StaggeredGrid& g, std::size_t max_cells) {
    if (g.num_cells() > max_cells)
        throw PreconditionError("csv export: grid " + g.describe() + " exceeds " + std::to_string(max_cells) +
                                " cells; use the binary format");
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
    write_header(out, FieldKind::Scalar, f.grid(), f.size());
    out.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.size() * 8));
}

void write_field(std::ostream& out, const VectorField& f) {
    write_header(out, FieldKind::Vector, f.grid(), f.flat_size());
    out.write(reinterpret_cast<const char*>(f.flat().data()), static_cast<std::streamsize>(f.flat_size() * 8));
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
    auto out = open_out(path, std::ios::binary);
    write_field(out, f);
}

void write_field(const std::filesystem::path& path, const VectorField& f) {
    auto out = open_out(path, std::ios::binary);
    write_field(out, f);
}

ScalarField read_scalar_field(std::istream& in) {
    Reader r(in);
    const Header h = read_header(r);
    if (h.kind != FieldKind::Scalar) throw ParseError("field snapshot: expected a scalar field", 12);
    ScalarField f(h.grid);
    read_payload(r, f.values(), h.count);
    return f;
}

VectorField read_vector_field(std::istream& in) {
    Reader r(in);
    const Header h = read_header(r);
    if (h.kind != FieldKind::Vector) throw ParseError("field snapshot: expected a vector field", 12);
    VectorField f(h.grid);
    read_payload(r, f.flat(), h.count);
    return f;
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_scalar_field(in);
}

VectorField read_vector_field(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_vector_field(in);
}

void write_csv(const std::filesystem::path& path, const ScalarField& f, std::size_t max_cells) {
    const auto& g = f.grid();
    check_csv_size(g, max_cells);
    auto out = open_out(path, std::ios::out);
    out.precision(17);
    out << (g.dim() == 3 ? "x0,x1,x2,value\n" : "x0,x1,value\n");
    const auto& e = g.cell_extent();
    for (int k = 0; k < e.n[2]; ++k)
        for (int j = 0; j < e.n[1]; ++j)
            for (int i = 0; i < e.n[0]; ++i) {
                out << g.center(0, i) << ',' << g.center(1, j) << ',';
                if (g.dim() == 3) out << g.center(2, k) << ',';
                out << f.at(i, j, k) << '\n';
            }
}

void write_csv(const std::filesystem::path& path, const VectorField& f, std::size_t max_cells) {
    const auto& g = f.grid();
    check_csv_size(g, max_cells);
    auto out = open_out(path, std::ios::out);
    out.precision(17);
    out << (g.dim() == 3 ? "x0,x1,x2,v0,v1,v2\n" : "x0,x1,v0,v1\n");
    const auto& e = g.cell_extent();
    for (int k = 0; k < e.n[2]; ++k)
        for (int j = 0; j < e.n[1]; ++j)
            for (int i = 0; i < e.n[0]; ++i) {
                out << g.center(0, i) << ',' << g.center(1, j);
                if (g.dim() == 3) out << ',' << g.center(2, k);
                for (int a = 0; a < g.dim(); ++a) {
                    std::array<int, 3> hi{i, j, k};
                    hi[a] += 1;
                    out << ',' << 0.5 * (f.at(a, i, j, k) + f.at(a, hi[0], hi[1], hi[2]));
                }
                out << '\n';
            }
}

}  // namespace rtspectra
