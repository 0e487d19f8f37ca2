// Line-oriented experiment configuration with strict key checking.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homolab/field.hpp"
#include "homolab/solver.hpp"

namespace homolab {

struct ExperimentConfig {
    FieldSpec field;
    int grid_k = 2;            // cells per unit
    int level = 3;             // triadic level
    std::vector<int> levels;   // ladder for rate fits (optional)
    std::vector<double> eps;   // ladder for two-scale runs
    int samples = 8;
    uint64_t seed = 1;
    double tol = 1e-10;
    int max_iter = 0;
    std::string out_dir = "out";

    /// Canonical text form; parsing it back is bit-identical.
    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    /// FNV-1a hash of the canonical serialization, as fixed-width hex.
    std::string hash() const;

    SolverOptions solver_options() const {
        SolverOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        return o;
    }
};

/// Canonical text block for a FieldSpec alone.
std::string serialize_field_spec(const FieldSpec& spec);
FieldSpec parse_field_spec(const std::string& text);

/// FNV-1a hash of the canonical field-spec block alone, fixed-width hex.
std::string field_spec_hash(const FieldSpec& spec);

std::string matrix_to_string(const SymMat& m);
SymMat matrix_from_string(const std::string& s, int dim);

uint64_t fnv1a(const std::string& s);

}  // namespace homolab
