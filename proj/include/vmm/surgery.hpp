#pragma once

#include <optional>
#include <vector>

#include "vmm/mixed.hpp"
#include "vmm/radial.hpp"

namespace vmm {

// How inner-band samples of the second trace are carried out to the boundary.
enum class Extension { NearestInnerSample, LinearAlongNormal, MaxConstant };

struct SurgeryConfig {
    int iterations = 1;
    double c_band = 2.0;  // band width in units of eps
    Extension extension = Extension::LinearAlongNormal;

    void validate() const;
};

struct RadialSurgeryStep {
    std::optional<RadialErrors> errors;
    std::optional<double> trace_error;  // |lap u_h(R) - lap u(R)|
    double boundary_laplacian = 0.0;    // data used for this solve
    double inner_sample = 0.0;          // lap u_h at R - c_band eps
};

struct RadialSurgeryResult {
    HermiteState state;
    std::vector<RadialSurgeryStep> trace;  // iterations + 1 entries
};

// Entry 0 is the plain solve with the Laplacian trace opts.trace().
RadialSurgeryResult radial_surgical_solve(const RadialProblem& problem, const IntervalMesh& mesh,
                                          const RadialOptions& opts, const SurgeryConfig& config,
                                          const RadialProfile* exact = nullptr);

// Boundary data on one side of the rectangle: values at boundary lattice nodes,
// interpolated linearly in the tangential coordinate.
struct SideTable {
    std::vector<double> coord;
    std::vector<double> value;

    double operator()(double t) const;
};

struct MixedSurgeryStep {
    std::optional<MixedErrors> errors;
    std::optional<double> trace_error;  // max over boundary nodes of |s_h nu.nu - D^2 u nu.nu|
    SideTable sides[4];                 // left, right, bottom, top data used for this solve
};

struct MixedSurgeryResult {
    MixedState state;
    std::vector<MixedSurgeryStep> trace;
};

// Entry 0 is continuation_solve(spec, space, eps, eps_start, schedule, opts).
MixedSurgeryResult mixed_surgical_solve(const ProblemSpec& spec, const MixedSpace& space, double eps,
                                        const SurgeryConfig& config, double eps_start = 0.0,
                                        const ContinuationSchedule& schedule = {}, const MixedOptions& opts = {});

}  // namespace vmm
