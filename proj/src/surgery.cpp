#include "vmm/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <memory>
#include <string>

#include "vmm/errors.hpp"

namespace vmm {

void SurgeryConfig::validate() const
{
    if (iterations < 1) throw InvalidArgument("SurgeryConfig: iterations must be at least 1");
    if (!(c_band > 0.0)) throw InvalidArgument("SurgeryConfig: c_band must be positive");
}

namespace {

template <class Solve>
auto tagged(int iteration, Solve&& solve)
{
    try {
        return solve();
    } catch (const NonConvergenceError& e) {
        throw NonConvergenceError("surgery iteration " + std::to_string(iteration) + ": " + e.what(), e.history());
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError("surgery iteration " + std::to_string(iteration) + ": " + e.what(), e.row(),
                                  e.pivot());
    }
}

}  // namespace

RadialSurgeryResult radial_surgical_solve(const RadialProblem& problem, const IntervalMesh& mesh,
                                          const RadialOptions& opts, const SurgeryConfig& config,
                                          const RadialProfile* exact)
{
    config.validate();
    if (!(opts.eps > 0.0)) throw InvalidArgument("radial_surgical_solve: eps must be positive");
    const double d = config.c_band * opts.eps;
    if (d >= 0.5 * problem.R) throw InvalidArgument("radial_surgical_solve: band covers half the domain");

    RadialSurgeryResult out;
    RadialOptions o = opts;
    auto record = [&](const HermiteState& s) {
        RadialSurgeryStep step;
        step.boundary_laplacian = o.trace();
        const auto prof = s.profile();
        step.inner_sample = prof.lap(problem.R - d);
        if (exact) {
            step.errors = radial_errors(prof, *exact, mesh);
            step.trace_error = std::abs(prof.lap(problem.R) - exact->lap(problem.R));
        }
        out.trace.push_back(step);
    };
    out.state = tagged(0, [&] { return solve_radial_fourth_order(problem, mesh, o); });
    record(out.state);
    for (int it = 1; it <= config.iterations; ++it) {
        // a single inner sample: every extension mode reduces to the constant
        o.boundary_laplacian = out.trace.back().inner_sample;
        out.state = tagged(it, [&] { return solve_radial_fourth_order(problem, mesh, o, &out.state); });
        record(out.state);
    }
    return out;
}

double SideTable::operator()(double t) const
{
    if (coord.empty()) throw InternalError("SideTable: empty table");
    if (t <= coord.front()) return value.front();
    if (t >= coord.back()) return value.back();
    const auto it = std::upper_bound(coord.begin(), coord.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - coord.begin());
    const double s = (t - coord[j - 1]) / (coord[j] - coord[j - 1]);
    return (1.0 - s) * value[j - 1] + s * value[j];
}

namespace {

// side 0: left, 1: right, 2: bottom, 3: top
Eigen::Vector2d side_normal(int side)
{
    switch (side) {
    case 0: return {-1.0, 0.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, -1.0};
    default: return {0.0, 1.0};
    }
}

int side_of(const Eigen::Vector2d& nu) { return std::abs(nu(0)) > 0.5 ? (nu(0) < 0 ? 0 : 1) : (nu(1) < 0 ? 2 : 3); }

// Boundary point of a side at tangential coordinate t.
Eigen::Vector2d side_point(const Rectangle& b, int side, double t)
{
    switch (side) {
    case 0: return {b.x0, t};
    case 1: return {b.x1, t};
    case 2: return {t, b.y0};
    default: return {t, b.y1};
    }
}

}  // namespace

MixedSurgeryResult mixed_surgical_solve(const ProblemSpec& spec, const MixedSpace& space, double eps,
                                        const SurgeryConfig& config, double eps_start,
                                        const ContinuationSchedule& schedule, const MixedOptions& opts)
{
    config.validate();
    if (!(eps > 0.0)) throw InvalidArgument("mixed_surgical_solve: eps must be positive");
    const auto& mesh = space.mesh();
    const Rectangle box = mesh.box;
    const double d = config.c_band * eps;
    if (d >= 0.5 * std::min(box.x1 - box.x0, box.y1 - box.y0))
        throw InvalidArgument("mixed_surgical_solve: band covers half the domain");
    const int k = space.degree();

    // boundary lattice coordinates per side
    SideTable base[4];
    for (int s = 0; s < 4; ++s) {
        const bool vertical = s < 2;
        const int m = k * (vertical ? mesh.ny : mesh.nx) + 1;
        const double a = vertical ? box.y0 : box.x0, b = vertical ? box.y1 : box.x1;
        for (int j = 0; j < m; ++j) base[s].coord.push_back(a + (b - a) * j / (m - 1));
    }

    MixedSurgeryResult out;
    auto record = [&](const MixedState& st, const SideTable* sides) {
        MixedSurgeryStep step;
        for (int s = 0; s < 4; ++s) step.sides[s] = sides[s];
        if (spec.exact) {
            step.errors = mixed_errors(st, *spec.exact, opts.quad_exactness);
            if (spec.exact->hess) {
                double e = 0.0;
                for (int s = 0; s < 4; ++s) {
                    const Eigen::Vector2d nu = side_normal(s);
                    for (std::size_t j = 0; j < sides[s].coord.size(); ++j) {
                        const Eigen::Vector2d x = side_point(box, s, sides[s].coord[j]);
                        e = std::max(e, std::abs(sides[s].value[j] - nu.dot(spec.exact->hess(x) * nu)));
                    }
                }
                step.trace_error = e;
            }
        }
        out.trace.push_back(std::move(step));
    };

    SideTable current[4];
    for (int s = 0; s < 4; ++s) {
        current[s] = base[s];
        current[s].value.clear();
        for (double t : base[s].coord)
            current[s].value.push_back(spec.second_trace_at(side_point(box, s, t), side_normal(s), eps));
    }
    out.state = tagged(0, [&] {
        return continuation_solve(spec, space, eps, eps_start > 0.0 ? eps_start : eps, schedule, opts).state;
    });
    record(out.state, current);

    for (int it = 1; it <= config.iterations; ++it) {
        const MixedState& st = out.state;
        auto sample = [&](int s, double t) {
            const bool vertical = s < 2;
            const double lo = (vertical ? box.y0 : box.x0) + d, hi = (vertical ? box.y1 : box.x1) - d;
            const Eigen::Vector2d nu = side_normal(s);
            const Eigen::Vector2d p = side_point(box, s, std::clamp(t, lo, hi)) - d * nu;
            return nu.dot(st.sigma(p) * nu);
        };
        auto next = std::make_shared<std::array<SideTable, 4>>();
        double vmax = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < 4; ++s) {
            SideTable& tab = (*next)[s];
            tab.coord = base[s].coord;
            const double a = tab.coord.front(), b = tab.coord.back();
            for (double t : tab.coord) {
                double v;
                if (config.extension == Extension::LinearAlongNormal)
                    v = sample(s, a + d + (t - a) * (b - a - 2.0 * d) / (b - a));  // inner side stretched onto the side
                else
                    v = sample(s, t);
                tab.value.push_back(v);
                vmax = std::max(vmax, v);
            }
        }
        if (config.extension == Extension::MaxConstant)
            for (auto& tab : *next) std::fill(tab.value.begin(), tab.value.end(), vmax);

        ProblemSpec corrected = spec;
        corrected.second_trace = [next](const Eigen::Vector2d& x, const Eigen::Vector2d& nu, double) {
            const int s = side_of(nu);
            return (*next)[s](s < 2 ? x(1) : x(0));
        };
        MixedState start = out.state;
        start.eps = eps;
        out.state = tagged(it, [&] { return newton_solve(corrected, start, opts); });
        for (int s = 0; s < 4; ++s) current[s] = (*next)[s];
        record(out.state, current);
    }
    return out;
}

}  // namespace vmm
