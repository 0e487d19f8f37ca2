// Shared helpers for the acceptance suite. Each criterion prints exactly one
// PASS/FAIL line; the binary exits nonzero if any criterion fails.
#pragma once

#include <doctest.h>

#include <cstdio>

#include "homolab/field.hpp"

namespace acceptance {

inline void report(int number, const char* name, bool pass) {
    std::printf("ACCEPTANCE %02d %s  %s\n", number, pass ? "PASS" : "FAIL", name);
    std::fflush(stdout);
    CHECK_MESSAGE(pass, "criterion ", number, ": ", name);
}

inline homolab::FieldSpec checkerboard_1_4() {
    homolab::FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = homolab::LawKind::Checkerboard;
    spec.checkerboard.values = {homolab::SymMat::identity(2, 1.0),
                                homolab::SymMat::identity(2, 4.0)};
    spec.checkerboard.probs = {0.5, 0.5};
    return spec;
}

inline homolab::FieldSpec layered_1_4() {
    homolab::FieldSpec spec;
    spec.dim = 1;
    spec.lambda = 4.0;
    spec.kind = homolab::LawKind::Layered1D;
    spec.layered.values = {1.0, 4.0};
    spec.layered.probs = {0.5, 0.5};
    return spec;
}

inline homolab::FieldSpec poisson_law() {
    homolab::FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = homolab::LawKind::PoissonInclusions;
    spec.poisson.intensity = 0.8;
    spec.poisson.radius_min = 0.2;
    spec.poisson.radius_max = 0.4;
    spec.poisson.inside = homolab::SymMat::identity(2, 4.0);
    spec.poisson.outside = homolab::SymMat::identity(2, 1.0);
    return spec;
}

inline homolab::FieldSpec mollified_law() {
    homolab::FieldSpec spec;
    spec.dim = 2;
    spec.lambda = 4.0;
    spec.kind = homolab::LawKind::MollifiedWhiteNoise;
    spec.mollified.kernel_radius = 0.25;
    spec.mollified.noise_res = 4;
    spec.mollified.map_scale = 1.0;
    return spec;
}

inline homolab::FieldSpec constant_law(double c) {
    homolab::FieldSpec spec;
    spec.dim = 2;
    spec.lambda = std::max(2.0, c);
    spec.kind = homolab::LawKind::Constant;
    spec.constant.value = homolab::SymMat::identity(2, c);
    return spec;
}

}  // namespace acceptance
