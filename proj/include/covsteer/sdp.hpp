#pragma once

#include <string>
#include <vector>

#include "covsteer/matcore.hpp"

namespace covsteer {

// Symmetric vectorization with sqrt(2)-scaled off-diagonals (column-major lower
// triangle) so that svec(S1) . svec(S2) = <S1, S2>_F.
Eigen::Index svec_dim(Eigen::Index d);
Vec svec(const Mat& s);
Mat smat(const Vec& v, Eigen::Index d);

// Standard-form conic program
//   min c^T x   s.t.  A x = b,  x in K,
// where K is a product of PSD cones of dimensions `blocks` in svec coordinates.
struct ConicProblem {
    Vec c;
    Mat A;
    Vec b;
    std::vector<int> blocks;

    Eigen::Index num_vars() const { return c.size(); }
    Eigen::Index num_eqs() const { return b.size(); }
    void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kMaxIter, kNumericalError };

struct ConicSolution {
    SolveStatus status = SolveStatus::kNumericalError;
    Vec x, y, s;
    double objective = 0.0;
    double rel_primal = 0.0;
    double rel_dual = 0.0;
    double rel_gap = 0.0;
    double mu = 0.0;
    int iterations = 0;
    std::string message;
};

struct SolverConfig {
    double tol = 1e-8;        // relative primal/dual/gap targets
    double feas_tol = 1e-7;   // linear-consistency threshold for A x = b
    int max_iter = 200;
    bool verbose = false;
};

// Primal-dual path-following solver with Nesterov-Todd scaling; infeasible start
// and adaptive centering. Infeasibility is reported through the Farkas dual
// certificate (y with b^T y > 0, -A^T y in K) or an inconsistent equality system.
ConicSolution solve_conic(const ConicProblem& prob, const SolverConfig& cfg = {});

}  // namespace covsteer
