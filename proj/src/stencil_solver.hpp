#ifndef PFSI_STENCIL_SOLVER_HPP
#define PFSI_STENCIL_SOLVER_HPP

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <array>
#include <memory>
#include <vector>

namespace pfsi::detail {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Symmetric two-component 9-point operator on an nx x nz grid, periodic in x.
// Vectors are [c0; c1] with node index i + nx j.
struct Stencil9 {
    int nx = 0, nz = 0;
    std::vector<double> coef;

    Stencil9() = default;
    Stencil9(int nx_, int nz_) : nx(nx_), nz(nz_), coef(static_cast<size_t>(36) * nx_ * nz_, 0.0) {}

    int nodes() const { return nx * nz; }
    static int slot(int oi, int oj) { return (oj + 1) * 3 + (oi + 1); }
    size_t index(int ca, int cb, int k, int n) const
    {
        return ((static_cast<size_t>(ca) * 2 + cb) * 9 + k) * nodes() + n;
    }
    double& at(int ca, int cb, int k, int n) { return coef[index(ca, cb, k, n)]; }
    double at(int ca, int cb, int k, int n) const { return coef[index(ca, cb, k, n)]; }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    // Row j of component ca of y -= (A x) with the in-line tridiagonal part
    // left out when `skip_line` is set.
    void subtract_row(int ca, int j, const Eigen::VectorXd& x, double* __restrict y, bool skip_line) const;
};

// Pinned dofs become decoupled identity rows.
void pin(Stencil9& a, const Mask& free);

// Galerkin coarsening in z (coarse rows sit on even fine rows); inactive fine
// dofs are left out of the prolongation.
Stencil9 coarsen_z(const Stencil9& fine, const Mask* active);

// Exact solves along periodic x lines.
class LineSolver {
public:
    LineSolver() = default;
    explicit LineSolver(const Stencil9& a);
    // Solves every line of component c with row parity `parity` in place;
    // `comp` points at the component block of the vector.
    void solve_rows(int c, int parity, double* comp) const;

private:
    void solve_one(const double* cp, const double* den, const double* e, const double* z,
                   const std::array<double, 2>& s, double* y) const;
    int nx_ = 0, nz_ = 0;
    std::vector<double> cp_, den_, e_, z_;
    std::vector<std::array<double, 2>> scale_;
};

// Symmetric V-cycle with zebra x-line Gauss-Seidel, used as a preconditioner.
class ZMultigrid {
public:
    ZMultigrid(Stencil9 fine, const Mask& free);
    void apply(const Eigen::VectorXd& r, Eigen::VectorXd& x) const;
    const Stencil9& op() const { return levels_[0]; }

private:
    void cycle(size_t l, const Eigen::VectorXd& r, Eigen::VectorXd& x) const;
    void smooth(size_t l, const Eigen::VectorXd& r, Eigen::VectorXd& x, bool forward) const;
    void restrict_to(size_t l, const Eigen::VectorXd& fine, Eigen::VectorXd& coarse) const;
    void prolong_add(size_t l, const Eigen::VectorXd& coarse, Eigen::VectorXd& fine) const;
    double weight(size_t l, int c, int n) const;

    std::vector<Stencil9> levels_;
    std::vector<LineSolver> lines_;
    Mask free_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_;
};

// Preconditioned CG on a pinned operator; returns the iteration count.
int pcg(const ZMultigrid& mg, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rtol, int max_iter);

}  // namespace pfsi::detail

#endif
