// Grid binary layout, CSV emission, and the JSON result cache.
#pragma once

#include <string>
#include <vector>

#include "homolab/grid.hpp"

namespace homolab {

/// Binary layout: magic "HLGF", u32 version, u32 dim, u32 centering,
/// per-axis u64 cells, f64 origin, f64 spacing, then row-major f64 payload.
void write_grid_binary(const std::string& path, const ScalarField& f);
ScalarField read_grid_binary(const std::string& path);

void write_grid_csv(const std::string& path, const ScalarField& f);

/// Heat-kernel mask weights as CSV rows (index, coordinates, weight).
void write_mask_csv(const std::string& path, const HeatKernelMask& mask);

/// RFC-4180-style CSV writer (quotes fields containing comma/quote/newline).
class CsvWriter {
   public:
    explicit CsvWriter(const std::string& path, bool append = false);
    ~CsvWriter();
    void comment(const std::string& line);  // "# ..." header line
    void row(const std::vector<std::string>& cells);
    static std::string quote(const std::string& cell);

   private:
    struct Impl;
    Impl* impl_;
};

std::string format_full(double v);  // round-trip decimal form

/// Single-writer JSON cache: one file per key under dir.
class ResultCache {
   public:
    explicit ResultCache(const std::string& dir);
    bool has(const std::string& key) const;
    std::string read(const std::string& key) const;
    void write(const std::string& key, const std::string& json_payload);
    std::vector<std::string> keys() const;

   private:
    std::string dir_;
};

}  // namespace homolab
