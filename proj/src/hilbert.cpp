#include "vgp/hilbert.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vgp/errors.hpp"

namespace vgp {

double inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    const auto& w = f.grid().weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i] * g[i];
    return acc;
}

std::pair<Eigen::MatrixXd, double> cholesky_clamped(const Eigen::MatrixXd& a,
                                                    double clamp_tol, double* min_pivot) {
    const Eigen::Index n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("cholesky_clamped: matrix not square");
    const double tol = clamp_tol * std::max(a.trace(), 0.0);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    double det = 1.0;
    if (min_pivot) *min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (min_pivot) *min_pivot = std::min(*min_pivot, d);
        if (d <= tol) {
            // PSD within tolerance: treat the pivot as exactly zero.
            det = 0.0;
            L(j, j) = 0.0;
            continue;
        }
        det *= d;
        const double root = std::sqrt(d);
        L(j, j) = root;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / root;
        }
    }
    return {std::move(L), det};
}

GramResult gram(const std::vector<GridFunction>& fs) {
    if (fs.empty()) throw std::invalid_argument("gram: empty function list");
    const std::size_t n = fs.size();
    GramResult r;
    r.matrix.resize(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = inner_product(fs[i], fs[j]);
            r.matrix(i, j) = v;
            r.matrix(j, i) = v;
        }
    }
    auto [L, det] = cholesky_clamped(r.matrix);
    (void)L;
    r.determinant = std::max(det, 0.0);
    r.numerically_singular = (det == 0.0);
    return r;
}

std::vector<GridFunction> gram_schmidt(const std::vector<GridFunction>& fs) {
    if (fs.empty()) throw std::invalid_argument("gram_schmidt: empty function list");
    double trace = 0.0;
    for (const auto& f : fs) trace += f.norm_sq();
    const double tol = 1e-12 * trace;

    std::vector<GridFunction> es;
    es.reserve(fs.size());
    std::vector<double> norms;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        GridFunction e = fs[i];
        // modified GS, then one re-orthogonalization pass
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < es.size(); ++k) {
                if (norms[k] <= 0.0) continue;
                const double c = inner_product(e, es[k]) / norms[k];
                e = e - es[k].scaled(c);
            }
        }
        const double nsq = e.norm_sq();
        if (nsq <= tol)
            throw std::invalid_argument(
                "gram_schmidt: function " + std::to_string(i) +
                " is linearly dependent on its predecessors (residual below tolerance)");
        es.push_back(std::move(e));
        norms.push_back(nsq);
    }
    return es;
}

std::pair<GridFunction, double> project(const GridFunction& h,
                                        const std::vector<GridFunction>& fs) {
    auto es = gram_schmidt(fs);
    GridFunction ph = GridFunction::zero(h.grid_ptr());
    double norm_sq = 0.0;
    for (const auto& e : es) {
        const double ee = e.norm_sq();
        const double c = inner_product(h, e) / ee;
        ph = ph + e.scaled(c);
        norm_sq += c * c * ee;
    }
    return {std::move(ph), norm_sq};
}

SchurBound schur_operator_bound(const Eigen::MatrixXd& kernel_values,
                                const GridFunction& p, const GridFunction& q) {
    require_same_grid(p, q);
    const std::size_t n = p.size();
    if (kernel_values.rows() != static_cast<Eigen::Index>(n) ||
        kernel_values.cols() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("schur_operator_bound: kernel shape does not match grid");
    if ((kernel_values.array() < 0.0).any())
        throw std::invalid_argument("schur_operator_bound: kernel must be nonnegative");
    const auto& w = p.grid().weights();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p[i] > 0.0) || !(q[i] > 0.0))
            throw std::invalid_argument("schur_operator_bound: p and q must be strictly positive");
    }

    SchurBound r;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += w[j] * kernel_values(i, j) * q[j];
        r.alpha = std::max(r.alpha, acc / p[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * kernel_values(i, j) * p[i];
        r.beta = std::max(r.beta, acc / q[j]);
    }
    r.norm_bound_sq = r.alpha * r.beta;

    // Discrete operator on L2(w): (Af)_i = sum_j w_j k(i,j) f_j. Its norm equals
    // the spectral norm of S = W^{1/2} K W^{1/2}.
    Eigen::VectorXd sqw(n);
    for (std::size_t i = 0; i < n; ++i) sqw[i] = std::sqrt(w[i]);
    Eigen::MatrixXd S = sqw.asDiagonal() * kernel_values * sqw.asDiagonal();
    Eigen::MatrixXd StS = S.transpose() * S;

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd u = StS * v;
        const double nu = u.norm();
        if (nu == 0.0) { lambda = 0.0; break; }
        u /= nu;
        const double next = u.dot(StS * u);
        const bool done = std::abs(next - lambda) <= 1e-8 * std::max(1.0, std::abs(next));
        lambda = next;
        v = u;
        if (done && it > 2) break;
    }
    r.direct_norm_sq = std::max(lambda, 0.0);
    return r;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    auto [L, det] = cholesky_clamped(a);
    if (det == 0.0)
        throw NumericError("solve_spd: matrix is numerically singular");
    const Eigen::Index n = a.rows();
    Eigen::VectorXd y(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b[i];
        for (Eigen::Index k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (Eigen::Index k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
        x[i] = s / L(i, i);
    }
    return x;
}

} // namespace vgp
