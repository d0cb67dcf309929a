#include "stencil_solver.hpp"

#include <Eigen/SparseCore>

#include <algorithm>

namespace pfsi::detail {

namespace {

// Coarse parents of fine row j: even rows inject, odd rows average their
// neighbours (or copy the lower one at the top).
int parents(int j, int nzc, int J[2], double w[2])
{
    if (j % 2 == 0) {
        J[0] = j / 2;
        w[0] = 1.0;
        return 1;
    }
    J[0] = (j - 1) / 2;
    if ((j + 1) / 2 >= nzc) {
        w[0] = 1.0;
        return 1;
    }
    J[1] = (j + 1) / 2;
    w[0] = w[1] = 0.5;
    return 2;
}

}  // namespace

void Stencil9::subtract_row(int ca, int j, const Eigen::VectorXd& x, double* __restrict y, bool skip_line) const
{
    const int N = nodes();
    for (int cb = 0; cb < 2; ++cb)
        for (int oj = -1; oj <= 1; ++oj) {
            if (skip_line && cb == ca && oj == 0)
                continue;
            if (j + oj < 0 || j + oj >= nz)
                continue;
            const double* __restrict cm = &coef[index(ca, cb, slot(-1, oj), nx * j)];
            const double* __restrict c0 = &coef[index(ca, cb, slot(0, oj), nx * j)];
            const double* __restrict cp = &coef[index(ca, cb, slot(1, oj), nx * j)];
            const double* __restrict xs = x.data() + cb * N + nx * (j + oj);
            for (int i = 1; i + 1 < nx; ++i)
                y[i] -= cm[i] * xs[i - 1] + c0[i] * xs[i] + cp[i] * xs[i + 1];
            y[0] -= cm[0] * xs[nx - 1] + c0[0] * xs[0] + cp[0] * xs[1];
            y[nx - 1] -= cm[nx - 1] * xs[nx - 2] + c0[nx - 1] * xs[nx - 1] + cp[nx - 1] * xs[0];
        }
}

void Stencil9::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
{
    const int N = nodes();
    y.setZero(2 * N);
    for (int ca = 0; ca < 2; ++ca)
        for (int j = 0; j < nz; ++j)
            subtract_row(ca, j, x, y.data() + ca * N + nx * j, false);
    y = -y;
}

void pin(Stencil9& a, const Mask& free)
{
    const int nx = a.nx, N = a.nodes();
    for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb)
            for (int k = 0; k < 9; ++k) {
                const int oi = k % 3 - 1, oj = k / 3 - 1;
                for (int j = 0; j < a.nz; ++j) {
                    if (j + oj < 0 || j + oj >= a.nz)
                        continue;
                    for (int i = 0; i < nx; ++i) {
                        const int n = i + nx * j, m = (i + oi + nx) % nx + nx * (j + oj);
                        if (!free(ca * N + n) || !free(cb * N + m))
                            a.at(ca, cb, k, n) = 0.0;
                    }
                }
            }
    for (int c = 0; c < 2; ++c)
        for (int n = 0; n < N; ++n)
            if (!free(c * N + n))
                a.at(c, c, Stencil9::slot(0, 0), n) = 1.0;
}

Stencil9 coarsen_z(const Stencil9& f, const Mask* active)
{
    const int nx = f.nx, nz = f.nz, N = f.nodes();
    const int nzc = (nz + 1) / 2;
    Stencil9 c(nx, nzc);
    for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb)
            for (int k = 0; k < 9; ++k) {
                const int oi = k % 3 - 1, oj = k / 3 - 1;
                for (int j = 0; j < nz; ++j) {
                    const int j2 = j + oj;
                    if (j2 < 0 || j2 >= nz)
                        continue;
                    int Ja[2], Jb[2];
                    double wa[2], wb[2];
                    const int na = parents(j, nzc, Ja, wa), nb = parents(j2, nzc, Jb, wb);
                    const double* __restrict src = &f.coef[f.index(ca, cb, k, nx * j)];
                    for (int p = 0; p < na; ++p)
                        for (int q = 0; q < nb; ++q) {
                            const double w = wa[p] * wb[q];
                            double* __restrict dst =
                                &c.coef[c.index(ca, cb, Stencil9::slot(oi, Jb[q] - Ja[p]), nx * Ja[p])];
                            for (int i = 0; i < nx; ++i)
                                dst[i] += w * src[i];
                        }
                }
            }
    if (active) {
        // inactive dofs carry only their identity diagonal (see pin); take it out
        for (int cc = 0; cc < 2; ++cc)
            for (int j = 0; j < nz; ++j) {
                int J[2];
                double w[2];
                const int np = parents(j, nzc, J, w);
                for (int i = 0; i < nx; ++i) {
                    const int n = i + nx * j;
                    if ((*active)(cc * N + n))
                        continue;
                    const double d = f.at(cc, cc, Stencil9::slot(0, 0), n);
                    for (int p = 0; p < np; ++p)
                        for (int q = 0; q < np; ++q)
                            c.at(cc, cc, Stencil9::slot(0, J[q] - J[p]), i + nx * J[p]) -= w[p] * d * w[q];
                }
            }
    }
    return c;
}

LineSolver::LineSolver(const Stencil9& a) : nx_(a.nx), nz_(a.nz)
{
    const size_t n = static_cast<size_t>(a.nodes()) * 2;
    cp_.resize(n);
    den_.resize(n);
    e_.resize(n);
    z_.resize(n);
    scale_.resize(2 * nz_);
    std::vector<double> d(nx_), dd(nx_);
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < nz_; ++j) {
            const size_t base = (static_cast<size_t>(c) * nz_ + j) * nx_;
            double* e = &e_[base];
            for (int i = 0; i < nx_; ++i) {
                d[i] = a.at(c, c, Stencil9::slot(0, 0), i + nx_ * j);
                e[i] = a.at(c, c, Stencil9::slot(1, 0), i + nx_ * j);
            }
            // cyclic system via Sherman-Morrison on the corner coupling
            const double alpha = e[nx_ - 1], gam = -d[0];
            dd = d;
            dd[0] -= gam;
            dd[nx_ - 1] -= alpha * alpha / gam;
            double* cp = &cp_[base];
            double* den = &den_[base];
            // den holds reciprocal pivots
            for (int i = 0; i < nx_; ++i) {
                den[i] = 1.0 / (dd[i] - (i > 0 ? e[i - 1] * cp[i - 1] : 0.0));
                cp[i] = i + 1 < nx_ ? e[i] * den[i] : 0.0;
            }
            double* z = &z_[base];
            std::fill(z, z + nx_, 0.0);
            z[0] = gam;
            z[nx_ - 1] = alpha;
            solve_one(cp, den, e, nullptr, {}, z);
            scale_[c * nz_ + j] = {alpha / gam, 1 + z[0] + alpha * z[nx_ - 1] / gam};
        }
}

void LineSolver::solve_rows(int c, int parity, double* comp) const
{
    // four independent recurrences at a time
    constexpr int B = 4;
    for (int j0 = parity; j0 < nz_; j0 += 2 * B) {
        int cnt = 0;
        const double *cp[B], *den[B], *e[B], *z[B];
        double* y[B];
        const std::array<double, 2>* s[B];
        for (int j = j0; j < nz_ && cnt < B; j += 2, ++cnt) {
            const size_t base = (static_cast<size_t>(c) * nz_ + j) * nx_;
            cp[cnt] = &cp_[base];
            den[cnt] = &den_[base];
            e[cnt] = &e_[base];
            z[cnt] = &z_[base];
            s[cnt] = &scale_[c * nz_ + j];
            y[cnt] = comp + static_cast<size_t>(nx_) * j;
        }
        if (cnt < B) {
            for (int k = 0; k < cnt; ++k)
                solve_one(cp[k], den[k], e[k], z[k], *s[k], y[k]);
            continue;
        }
        for (int k = 0; k < B; ++k)
            y[k][0] *= den[k][0];
        for (int i = 1; i < nx_; ++i)
            for (int k = 0; k < B; ++k)
                y[k][i] = (y[k][i] - e[k][i - 1] * y[k][i - 1]) * den[k][i];
        for (int i = nx_ - 2; i >= 0; --i)
            for (int k = 0; k < B; ++k)
                y[k][i] -= cp[k][i] * y[k][i + 1];
        for (int k = 0; k < B; ++k) {
            const double f = (y[k][0] + (*s[k])[0] * y[k][nx_ - 1]) / (*s[k])[1];
            for (int i = 0; i < nx_; ++i)
                y[k][i] -= f * z[k][i];
        }
    }
}

void LineSolver::solve_one(const double* cp, const double* den, const double* e, const double* z,
                           const std::array<double, 2>& s, double* y) const
{
    y[0] *= den[0];
    for (int i = 1; i < nx_; ++i)
        y[i] = (y[i] - e[i - 1] * y[i - 1]) * den[i];
    for (int i = nx_ - 2; i >= 0; --i)
        y[i] -= cp[i] * y[i + 1];
    if (z) {
        const double f = (y[0] + s[0] * y[nx_ - 1]) / s[1];
        for (int i = 0; i < nx_; ++i)
            y[i] -= f * z[i];
    }
}

ZMultigrid::ZMultigrid(Stencil9 fine, const Mask& free) : free_(free)
{
    pin(fine, free);
    levels_.push_back(std::move(fine));
    while (levels_.back().nz > 2)
        levels_.push_back(coarsen_z(levels_.back(), levels_.size() == 1 ? &free_ : nullptr));
    for (size_t l = 0; l + 1 < levels_.size(); ++l)
        lines_.emplace_back(levels_[l]);

    const Stencil9& a = levels_.back();
    const int N = a.nodes();
    std::vector<Eigen::Triplet<double>> trip;
    for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb)
            for (int k = 0; k < 9; ++k) {
                const int oi = k % 3 - 1, oj = k / 3 - 1;
                for (int j = 0; j < a.nz; ++j)
                    for (int i = 0; i < a.nx; ++i) {
                        const double v = a.at(ca, cb, k, i + a.nx * j);
                        if (v != 0.0)
                            trip.emplace_back(ca * N + i + a.nx * j,
                                              cb * N + (i + oi + a.nx) % a.nx + a.nx * (j + oj), v);
                    }
            }
    Eigen::SparseMatrix<double> A(2 * N, 2 * N);
    A.setFromTriplets(trip.begin(), trip.end());
    coarse_.compute(A);
}

double ZMultigrid::weight(size_t l, int c, int n) const
{
    return l == 0 && !free_(c * levels_[0].nodes() + n) ? 0.0 : 1.0;
}

void ZMultigrid::smooth(size_t l, const Eigen::VectorXd& r, Eigen::VectorXd& x, bool forward) const
{
    const Stencil9& a = levels_[l];
    const int nx = a.nx, nz = a.nz, N = a.nodes();
    // lines of one parity and component are mutually uncoupled
    auto group = [&](int parity, int c) {
        for (int j = parity; j < nz; j += 2) {
            double* row = x.data() + static_cast<size_t>(c) * N + nx * j;
            std::copy(r.data() + (row - x.data()), r.data() + (row - x.data()) + nx, row);
            a.subtract_row(c, j, x, row, true);
        }
        lines_[l].solve_rows(c, parity, x.data() + static_cast<size_t>(c) * N);
    };
    // zebra order; the backward sweep is the exact transpose of the forward one
    if (forward) {
        for (int parity = 0; parity < 2; ++parity)
            for (int c = 0; c < 2; ++c)
                group(parity, c);
    } else {
        for (int parity = 1; parity >= 0; --parity)
            for (int c = 1; c >= 0; --c)
                group(parity, c);
    }
}

void ZMultigrid::restrict_to(size_t l, const Eigen::VectorXd& fine, Eigen::VectorXd& coarse) const
{
    const Stencil9& f = levels_[l];
    const int nx = f.nx, N = f.nodes(), nzc = levels_[l + 1].nz, Nc = levels_[l + 1].nodes();
    coarse.setZero(2 * Nc);
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < f.nz; ++j) {
            int J[2];
            double w[2];
            const int np = parents(j, nzc, J, w);
            for (int i = 0; i < nx; ++i) {
                const int n = i + nx * j;
                const double v = weight(l, c, n) * fine(c * N + n);
                for (int p = 0; p < np; ++p)
                    coarse(c * Nc + i + nx * J[p]) += w[p] * v;
            }
        }
}

void ZMultigrid::prolong_add(size_t l, const Eigen::VectorXd& coarse, Eigen::VectorXd& fine) const
{
    const Stencil9& f = levels_[l];
    const int nx = f.nx, N = f.nodes(), nzc = levels_[l + 1].nz, Nc = levels_[l + 1].nodes();
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < f.nz; ++j) {
            int J[2];
            double w[2];
            const int np = parents(j, nzc, J, w);
            for (int i = 0; i < nx; ++i) {
                const int n = i + nx * j;
                double v = 0;
                for (int p = 0; p < np; ++p)
                    v += w[p] * coarse(c * Nc + i + nx * J[p]);
                fine(c * N + n) += weight(l, c, n) * v;
            }
        }
}

void ZMultigrid::cycle(size_t l, const Eigen::VectorXd& r, Eigen::VectorXd& x) const
{
    if (l + 1 == levels_.size()) {
        x = coarse_.solve(r);
        return;
    }
    x.setZero(r.size());
    smooth(l, r, x, true);
    Eigen::VectorXd ax, rc, xc;
    levels_[l].apply(x, ax);
    restrict_to(l, r - ax, rc);
    cycle(l + 1, rc, xc);
    prolong_add(l, xc, x);
    smooth(l, r, x, false);
}

void ZMultigrid::apply(const Eigen::VectorXd& r, Eigen::VectorXd& x) const { cycle(0, r, x); }

int pcg(const ZMultigrid& mg, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rtol, int max_iter)
{
    const double bnorm = b.norm();
    if (bnorm == 0) {
        x.setZero(b.size());
        return 0;
    }
    Eigen::VectorXd r(b.size()), z, p, q;
    mg.op().apply(x, q);
    r = b - q;
    mg.apply(r, z);
    p = z;
    double rz = r.dot(z);
    int iters = 0;
    while (r.norm() > rtol * bnorm && iters < max_iter) {
        mg.op().apply(p, q);
        const double alpha = rz / p.dot(q);
        x += alpha * p;
        r -= alpha * q;
        mg.apply(r, z);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        ++iters;
    }
    return iters;
}

}  // namespace pfsi::detail
