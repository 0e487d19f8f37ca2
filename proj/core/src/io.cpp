#include "homolab/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>

namespace homolab {

namespace {
constexpr char kMagic[4] = {'H', 'L', 'G', 'F'};
constexpr uint32_t kVersion = 1;

std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_grid_binary(const std::string& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid_binary: cannot open " + path);
    out.write(kMagic, 4);
    uint32_t v = kVersion, dim = static_cast<uint32_t>(f.grid.dim),
             cent = f.centering == Centering::Cell ? 0 : 1,
             periodic = f.grid.periodic ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&v), 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&cent), 4);
    out.write(reinterpret_cast<const char*>(&periodic), 4);
    for (int a = 0; a < f.grid.dim; ++a) {
        uint64_t n = static_cast<uint64_t>(f.grid.cells[a]);
        out.write(reinterpret_cast<const char*>(&n), 8);
    }
    for (int a = 0; a < f.grid.dim; ++a)
        out.write(reinterpret_cast<const char*>(&f.grid.origin[a]), 8);
    out.write(reinterpret_cast<const char*>(&f.grid.h), 8);
    uint64_t count = f.data.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(f.data.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
}

ScalarField read_grid_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_grid_binary: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_grid_binary: bad magic in " + path);
    uint32_t v, dim, cent, periodic;
    in.read(reinterpret_cast<char*>(&v), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&cent), 4);
    in.read(reinterpret_cast<char*>(&periodic), 4);
    if (v != kVersion) throw std::runtime_error("read_grid_binary: unsupported version");
    Grid g;
    g.dim = static_cast<int>(dim);
    g.periodic = periodic != 0;
    for (int a = 0; a < g.dim; ++a) {
        uint64_t n;
        in.read(reinterpret_cast<char*>(&n), 8);
        g.cells[a] = static_cast<int64_t>(n);
    }
    for (int a = 0; a < g.dim; ++a) in.read(reinterpret_cast<char*>(&g.origin[a]), 8);
    in.read(reinterpret_cast<char*>(&g.h), 8);
    uint64_t count;
    in.read(reinterpret_cast<char*>(&count), 8);
    ScalarField f(g, cent == 0 ? Centering::Cell : Centering::Node);
    if (count != f.data.size()) throw std::runtime_error("read_grid_binary: size mismatch");
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("read_grid_binary: truncated file");
    return f;
}

void write_grid_csv(const std::string& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
    out << "index";
    for (int a = 0; a < f.grid.dim; ++a) out << ",x" << a;
    out << ",value\n";
    int64_t n = static_cast<int64_t>(f.data.size());
    for (int64_t i = 0; i < n; ++i) {
        Vec x = f.centering == Centering::Cell ? f.grid.cell_center(f.grid.cell_coords(i))
                                               : f.grid.node_pos(f.grid.node_coords(i));
        out << i;
        for (int a = 0; a < f.grid.dim; ++a) out << "," << format_full(x[a]);
        out << "," << format_full(f.data[static_cast<size_t>(i)]) << "\n";
    }
}

void write_mask_csv(const std::string& path, const HeatKernelMask& mask) {
    ScalarField f(mask.grid, Centering::Cell);
    f.data = mask.weights;
    write_grid_csv(path, f);
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path, bool append) : impl_(new Impl) {
    impl_->out.open(path, append ? std::ios::app : std::ios::out);
    if (!impl_->out) {
        delete impl_;
        throw std::runtime_error("CsvWriter: cannot open " + path);
    }
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::comment(const std::string& line) { impl_->out << "# " << line << "\n"; }

std::string CsvWriter::quote(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->out << ",";
        impl_->out << quote(cells[i]);
    }
    impl_->out << "\n";
}

ResultCache::ResultCache(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir_);
}

bool ResultCache::has(const std::string& key) const {
    return std::filesystem::exists(dir_ + "/" + key + ".json");
}

std::string ResultCache::read(const std::string& key) const {
    std::ifstream in(dir_ + "/" + key + ".json");
    if (!in) throw std::runtime_error("ResultCache: missing key " + key);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

void ResultCache::write(const std::string& key, const std::string& json_payload) {
    std::lock_guard<std::mutex> lock(cache_mutex());
    std::string tmp = dir_ + "/" + key + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("ResultCache: cannot write " + tmp);
        out << json_payload;
    }
    std::filesystem::rename(tmp, dir_ + "/" + key + ".json");
}

std::vector<std::string> ResultCache::keys() const {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
        if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    }
    return out;
}

}  // namespace homolab
