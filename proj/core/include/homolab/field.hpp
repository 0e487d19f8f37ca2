// Stationary random coefficient fields with unit range of dependence.
//
// Laws are evaluated pointwise from counter-based hashes of
// (master seed, law tag, integer cell coordinates), so evaluation is pure
// and independent of call order and thread schedule.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "homolab/grid.hpp"
#include "homolab/rng.hpp"
#include "homolab/smallmat.hpp"

namespace homolab {

enum class LawKind { Constant, Checkerboard, PoissonInclusions, MollifiedWhiteNoise, Layered1D };

struct ConstantLaw {
    SymMat value;
};

struct CheckerboardLaw {
    std::vector<SymMat> values;
    std::vector<double> probs;
};

struct PoissonInclusionsLaw {
    double intensity = 1.0;       // points per unit volume
    double radius_min = 0.0;      // radius drawn uniformly from [min, max]
    double radius_max = 0.25;     // must stay <= 1/2
    SymMat inside;                // value within distance radius of a point
    SymMat outside;
};

struct MollifiedWhiteNoiseLaw {
    double kernel_radius = 0.25;  // support radius of the bump, <= 1/2
    int noise_res = 4;            // i.i.d. normals on a lattice of spacing 1/noise_res
    double map_scale = 1.0;       // sigmoid steepness of the pointwise map
};

struct Layered1DLaw {
    std::vector<double> values;   // scalar conductivities, d = 1
    std::vector<double> probs;
};

struct FieldSpec {
    int dim = 2;
    double lambda = 2.0;  // ellipticity upper bound
    LawKind kind = LawKind::Constant;
    ConstantLaw constant{SymMat::identity(2)};
    CheckerboardLaw checkerboard;
    PoissonInclusionsLaw poisson;
    MollifiedWhiteNoiseLaw mollified;
    Layered1DLaw layered;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    std::string law_name() const;
};

/// One realization of the law: a deterministic map x -> a(x).
class CoefficientSample {
   public:
    CoefficientSample(const FieldSpec& spec, uint64_t seed);

    const FieldSpec& spec() const { return spec_; }
    uint64_t seed() const { return seed_; }
    int dim() const { return spec_.dim; }

    /// a(x): symmetric with eigenvalues in [1, lambda].
    SymMat eval(const Vec& x) const;

    /// Scalar entry a_11(x), convenient for diagnostics.
    double eval11(const Vec& x) const { return eval(x)(0, 0); }

   private:
    FieldSpec spec_;
    uint64_t seed_;
    HashKey key_;

    SymMat eval_checkerboard(const Vec& x) const;
    SymMat eval_poisson(const Vec& x) const;
    SymMat eval_mollified(const Vec& x) const;
};

CoefficientSample sample_field(const FieldSpec& spec, uint64_t seed);

/// Cell-wise coefficient array: entry for cell Q is eval at the cell center.
std::vector<SymMat> restrict_to_grid(const CoefficientSample& field, const Grid& grid);

/// Periodized restriction for torus problems: eval at cell centers of the
/// torus fundamental domain.
std::vector<SymMat> restrict_to_torus(const CoefficientSample& field, const Grid& torus);

struct DependenceRow {
    double distance = 0;
    double correlation = 0;
    bool degenerate = false;  // zero variance (constant law)
};

/// Empirical correlation of a_11 between cells at given distances, across
/// n_samples independent seeds.
std::vector<DependenceRow> dependence_diagnostic(const FieldSpec& spec, uint64_t seed,
                                                 int n_samples,
                                                 const std::vector<double>& distances);

}  // namespace homolab
