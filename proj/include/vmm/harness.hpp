#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vmm/mixed.hpp"
#include "vmm/radial.hpp"

namespace vmm {

// A manufactured or data-only test problem. Radial entries carry a
// RadialProblem; planar entries build a ProblemSpec on a rectangle.
struct CatalogEntry {
    std::string id;
    std::string description;
    bool radial = false;

    std::function<RadialProblem()> radial_problem;

    Rectangle box;
    // gamma: inf-Laplacian regularization, nullopt selects eps^2
    std::function<ProblemSpec(std::optional<double> gamma)> build;
};

const std::vector<CatalogEntry>& catalog();
// Throws InvalidArgument for unknown ids.
const CatalogEntry& find_problem(const std::string& id);

// rate_i = log(e_{i-1}/e_i) / log(p_{i-1}/p_i); entry 0 and entries next to a
// non-positive or missing error are undefined.
std::vector<std::optional<double>> estimate_rate(const std::vector<std::optional<double>>& errors,
                                                 const std::vector<double>& params);
std::vector<std::optional<double>> estimate_rate(const std::vector<double>& errors, const std::vector<double>& params);

enum class SweepVariable { Eps, H };

struct SweepConfig {
    std::string problem;
    SweepVariable variable = SweepVariable::Eps;
    std::vector<double> values;
    double eps = 0.01;             // fixed eps for h-sweeps
    int grid = 16;                 // fixed cells per side (radial: elements) for eps-sweeps
    int degree = 2;
    std::optional<double> tau;
    std::optional<double> gamma;   // nullopt: eps^2
    double tol = 1e-10;
    double eps_start = 0.1;        // first continuation stage (magnitude)
    int coarse_factor = 4;         // eps-sweeps start on a grid this much coarser
    bool cold = false;             // independent solves, may run concurrently
    std::string output;            // CSV path, empty for none
};

// Columns: L2, H1, H2, Linf. For radial problems H1 is the first-derivative
// error and H2 the Laplacian error; for mixed problems H2 is the Hessian
// (sigma) error.
enum NormColumn { kColL2 = 0, kColH1 = 1, kColH2 = 2, kColLinf = 3 };

struct RateRow {
    double param = 0.0;
    bool failed = false;
    std::array<std::optional<double>, 4> error;
    std::array<std::optional<double>, 4> rate;
};

struct RateTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<RateRow> rows;
};

// Values are stored rounded to the CSV precision so that a written table
// parses back to identical values.
RateTable run_sweep(const SweepConfig& config);

void write_csv(const RateTable& table, std::ostream& os);
void write_csv(const RateTable& table, const std::string& path);
RateTable read_csv(std::istream& is);

// Smallest cell count with cell width at most h on a side of the given length.
int cells_for(double length, double h);

struct KStarSample {
    double K;
    bool feasible;
};

struct KStarResult {
    double lo = 0.0, hi = 0.0;  // largest feasible / smallest infeasible sample
    double estimate = 0.0;      // bracket midpoint
    std::vector<KStarSample> samples;
};

// Bisection on [0, K_hi] for the feasibility threshold. The oracle may report
// extra samples it visited (for instance continuation substeps). Throws
// InvalidArgument if K = 0 is infeasible or K_hi is feasible, and
// NonMonotoneError if a feasible sample lies above an infeasible one.
using FeasibilityOracle = std::function<bool(double K, std::vector<KStarSample>& visited)>;
KStarResult bisect_k_star(const FeasibilityOracle& feasible, double K_hi, double K_tol);

struct KStarOptions {
    double K_hi = 16.0;
    double K_tol = 0.1;
    double K_step = 0.25;  // largest continuation step in K
    double eps_start = -0.1;
    MixedOptions mixed;
};

// Gauss curvature threshold for the data of `spec` (source and boundary data;
// spec.K is ignored) with K-continuation feasibility on `space`.
KStarResult estimate_k_star(const ProblemSpec& spec, const MixedSpace& space, double eps, const KStarOptions& opts = {});

}  // namespace vmm
