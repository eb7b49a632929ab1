#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmm/fem.hpp"
#include "vmm/newton.hpp"
#include "vmm/nonlinearity.hpp"

namespace vmm {

// Hessian-shift default per operator: 1 for the infinity-Laplacian, 0 otherwise.
double default_tau(OperatorKind op);

// Unknowns are stored as [s11 | s12 | s22 | u], each block a scalar P_k field,
// where s = D^2 u + tau I u.
class MixedSpace {
public:
    MixedSpace(std::shared_ptr<const TriangleMesh> mesh, int degree);

    const LagrangeSpace2D& scalar() const { return scalar_; }
    const TriangleMesh& mesh() const { return scalar_.mesh(); }
    int degree() const { return scalar_.degree(); }
    int scalar_size() const { return scalar_.size(); }
    int size() const { return 4 * scalar_.size(); }
    int num_free() const { return num_free_; }
    const DofMap& dofs() const { return block_; }
    bool constrained(int i) const { return free_index_[i] < 0; }
    int free_index(int i) const { return free_index_[i]; }
    const std::vector<int>& free_dofs() const { return free_dofs_; }

    int s11(int d) const { return d; }
    int s12(int d) const { return scalar_size() + d; }
    int s22(int d) const { return 2 * scalar_size() + d; }
    int u(int d) const { return 3 * scalar_size() + d; }

    Eigen::VectorXd gather(const Eigen::VectorXd& full) const;
    Eigen::VectorXd scatter(const Eigen::VectorXd& free, Eigen::VectorXd full) const;

private:
    LagrangeSpace2D scalar_;
    DofMap block_;
    std::vector<int> free_index_;
    std::vector<int> free_dofs_;
    int num_free_ = 0;
};

struct MixedOptions {
    std::optional<double> tau;  // defaults to default_tau(op)
    int quad_exactness = 0;     // 0 selects 2k+3
    double tol = 1e-10;
    int max_newton = 30;
    int max_halvings = 8;
};

struct MixedState {
    const MixedSpace* space = nullptr;
    double eps = 0.0;
    double tau = 0.0;
    Eigen::VectorXd x;  // full coefficient vector
    std::vector<double> newton_history;
    int newton_iterations = 0;

    Field2D u() const;
    Field2D shifted(int component) const;  // component 0: s11, 1: s12, 2: s22
    // Unshifted second-moment tensor at x.
    Eigen::Matrix2d sigma(const Eigen::Vector2d& x) const;
};

// Residual and Jacobian of the discrete mixed system on the free unknowns.
class MixedSystem {
public:
    MixedSystem(const ProblemSpec& spec, const MixedSpace& space, double eps, double tau, int quad_exactness = 0);

    // Sets the constrained entries (u = g, s.nu.nu = trace + tau g) of a full vector.
    void apply_constraints(Eigen::VectorXd& full) const;
    Eigen::VectorXd residual(const Eigen::VectorXd& full) const;
    SparseMatrix jacobian(const Eigen::VectorXd& full) const;
    // Norm of the residual at the state holding only boundary data.
    double data_scale() const;

    double eps() const { return eps_; }
    double tau() const { return tau_; }

private:
    void element(const Eigen::VectorXd& full, int t, Eigen::VectorXd& r, Eigen::MatrixXd* K) const;

    const ProblemSpec& spec_;
    const MixedSpace& space_;
    double eps_, tau_, gamma_;
    QuadratureRule2D rule_;
    std::vector<BasisValues2D> phi_[2];  // per triangle orientation
    double detJ_ = 0.0;
    std::vector<double> source_;  // per element and quadrature point
    Eigen::VectorXd boundary_load_;  // G on the full index space
};

MixedState newton_solve(const ProblemSpec& spec, const MixedState& start, const MixedOptions& opts = {});

// Poisson predictor for u (harmonic extension for the infinity-Laplacian) and
// the matching shifted Hessian from the first mixed equation.
MixedState initial_guess(const ProblemSpec& spec, const MixedSpace& space, double eps,
                         const MixedOptions& opts = {});

struct ContinuationSchedule {
    double ratio = 0.5;
    int max_stages = 60;
    int repeats = 0;  // with ratio 1: number of stages at the target
};

struct ContinuationStage {
    double eps;
    int newton_iterations;
};

struct ContinuationResult {
    MixedState state;
    std::vector<ContinuationStage> stages;
};

// Geometric eps-schedule from eps_start to eps_target, warm-starting each stage.
ContinuationResult continuation_solve(const ProblemSpec& spec, const MixedSpace& space, double eps_target,
                                      double eps_start, const ContinuationSchedule& schedule = {},
                                      const MixedOptions& opts = {}, const MixedState* warm_start = nullptr);

// Nodal transfer of a state onto another space (used for warm starts across meshes).
MixedState transfer(const MixedState& from, const MixedSpace& to);

struct MixedErrors {
    double L2 = 0, H1 = 0, sigma_L2 = 0, Linf = 0;
};

MixedErrors mixed_errors(const MixedState& state, const ExactSolution& exact, int quad_exactness = 0);

struct InfSupProbe {
    double eigen_beta = 0.0;      // exact discrete constant (small meshes)
    double candidate_ratio = 0.0; // min over random w of b(I w, w) / (|I w| |w|)
};

InfSupProbe infsup_probe(std::shared_ptr<const TriangleMesh> mesh, int degree, double tau, int trials = 20,
                         unsigned seed = 1);

void write_checkpoint(const MixedState& state, std::ostream& os);
void write_checkpoint(const MixedState& state, const std::string& path);
// The space must match the one recorded in the checkpoint.
MixedState read_checkpoint(const MixedSpace& space, std::istream& is);
MixedState read_checkpoint(const MixedSpace& space, const std::string& path);

}  // namespace vmm
