#include "probode/gaussian.hpp"

#include <cassert>
#include <Eigen/QR>

namespace probode {

namespace {

// Back substitution for R x = b with R upper triangular; zero pivots give
// zero solution rows (uninformative directions).
Matrix solve_upper_pseudo(const Matrix& r, const Matrix& b, int* rank_deficiency)
{
    const Eigen::Index n = r.rows();
    Matrix x = Matrix::Zero(n, b.cols());
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (r(i, i) == 0.0) {
            if (rank_deficiency) ++(*rank_deficiency);
            continue;
        }
        Eigen::RowVectorXd acc = b.row(i);
        if (i + 1 < n) acc.noalias() -= r.row(i).tail(n - i - 1) * x.bottomRows(n - i - 1);
        x.row(i) = acc / r(i, i);
    }
    return x;
}

void flip_columns_nonnegative_diag(Matrix& l)
{
    for (Eigen::Index j = 0; j < l.cols() && j < l.rows(); ++j) {
        if (l(j, j) < 0.0) l.col(j) = -l.col(j);
    }
}

}  // namespace

GaussianState::GaussianState(Matrix m, Matrix s)
    : mean(std::move(m)), cov_sqrt(std::move(s))
{
    assert(cov_sqrt.rows() == cov_sqrt.cols());
    assert(mean.rows() == cov_sqrt.rows());
}

GaussianState GaussianState::dirac(const Matrix& mean)
{
    return GaussianState(mean, Matrix::Zero(mean.rows(), mean.rows()));
}

GaussianState AffineConditional::evaluate(const Matrix& y) const
{
    return GaussianState(linear * y + offset, noise_sqrt);
}

AffineConditional AffineConditional::identity(Eigen::Index n, Eigen::Index w)
{
    return AffineConditional{Matrix::Identity(n, n), Matrix::Zero(n, w),
                             Matrix::Zero(n, n)};
}

Matrix triangularize(const Matrix& w)
{
    const Eigen::Index n = w.cols();
    const Eigen::Index r = std::min(w.rows(), n);
    Eigen::HouseholderQR<Matrix> qr(w);
    Matrix upper = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Matrix l = Matrix::Zero(n, n);
    l.leftCols(r) = upper.transpose();
    flip_columns_nonnegative_diag(l);
    return l;
}

Matrix qr_sqrt_sum(const Matrix& a, const Matrix& sqrt_d, const Matrix& sqrt_b)
{
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();
    assert(sqrt_d.rows() == m && sqrt_d.cols() == m);
    assert(sqrt_b.rows() == n && sqrt_b.cols() == n);
    Matrix stacked(m + n, n);
    stacked.topRows(m).noalias() = sqrt_d.transpose() * a.transpose();
    stacked.bottomRows(n) = sqrt_b.transpose();
    return triangularize(stacked);
}

GaussianState marginalize(const AffineConditional& cond, const GaussianState& g)
{
    if (cond.dim_in() != g.dim())
        throw std::invalid_argument("marginalize: conditional input dimension "
                                    "does not match state dimension");
    return GaussianState(cond.linear * g.mean + cond.offset,
                         qr_sqrt_sum(cond.linear, g.cov_sqrt, cond.noise_sqrt));
}

AffineConditional merge_conditionals(const AffineConditional& outer,
                                     const AffineConditional& inner)
{
    if (outer.dim_in() != inner.dim_out())
        throw std::invalid_argument("merge_conditionals: dimension mismatch "
                                    "between outer input and inner output");
    return AffineConditional{outer.linear * inner.linear,
                             outer.linear * inner.offset + outer.offset,
                             qr_sqrt_sum(outer.linear, inner.noise_sqrt,
                                         outer.noise_sqrt)};
}

Reversal reverse_marginalize(const GaussianState& g, const Matrix& a,
                             const Matrix& offset, const Matrix& noise_sqrt)
{
    const Eigen::Index n = g.dim();
    const Eigen::Index k = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("reverse_marginalize: map input dimension "
                                    "does not match state dimension");
    assert(offset.rows() == k && offset.cols() == g.width());
    assert(noise_sqrt.rows() == k && noise_sqrt.cols() == k);

    // QR of [C^T A^T, C^T; B^T, 0] yields the joint factor of (z, x):
    //   R^T R = [A cov A^T + B, A cov; cov A^T, cov].
    Matrix stacked = Matrix::Zero(n + k, k + n);
    stacked.topLeftCorner(n, k).noalias() =
        g.cov_sqrt.transpose() * a.transpose();
    stacked.topRightCorner(n, n) = g.cov_sqrt.transpose();
    stacked.bottomLeftCorner(k, k) = noise_sqrt.transpose();
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const Matrix r = qr.matrixQR().topRows(k + n).triangularView<Eigen::Upper>();
    const Matrix r11 = r.topLeftCorner(k, k);
    const Matrix r12 = r.topRightCorner(k, n);
    const Matrix r22 = r.bottomRightCorner(n, n);

    Reversal out;
    out.marginal.mean = a * g.mean + offset;
    out.marginal.cov_sqrt = r11.transpose();
    flip_columns_nonnegative_diag(out.marginal.cov_sqrt);

    // Gain G = R12^T R11^{-T} from one triangular solve.
    int deficiency = 0;
    const Matrix gain_t = solve_upper_pseudo(r11, r12, &deficiency);
    out.rank_deficiency = deficiency;

    Matrix backward_noise;
    if (deficiency == 0) {
        backward_noise = r22.transpose();
        flip_columns_nonnegative_diag(backward_noise);
    } else {
        // Zero pivots keep probability mass outside the gain's range; fold
        // the unexplained part of the cross block back into the noise.
        Matrix residual(n, k + n);
        residual.leftCols(k) = r12.transpose() - gain_t.transpose() * r11.transpose();
        residual.rightCols(n) = r22.transpose();
        backward_noise = triangularize(residual.transpose());
    }

    out.backward.linear = gain_t.transpose();
    out.backward.offset = g.mean - out.backward.linear * out.marginal.mean;
    out.backward.noise_sqrt = std::move(backward_noise);
    return out;
}

Conditioned condition_affine(const GaussianState& prior, const Matrix& h,
                             const Matrix& b)
{
    const Eigen::Index k = h.rows();
    Reversal rev = reverse_marginalize(prior, h, b, Matrix::Zero(k, k));
    Conditioned out;
    out.posterior = GaussianState(rev.backward.offset, rev.backward.noise_sqrt);
    out.backward = std::move(rev.backward);
    out.innovation = std::move(rev.marginal);
    out.rank_deficiency = rev.rank_deficiency;
    return out;
}

Matrix sample(const GaussianState& g, const Matrix& noise)
{
    if (noise.rows() != g.dim() || noise.cols() != g.width())
        throw std::invalid_argument("sample: noise shape does not match state");
    return g.mean + g.cov_sqrt * noise;
}

Matrix solve_lower_pseudo(const Matrix& l, const Matrix& b, int* rank_deficiency)
{
    const Eigen::Index n = l.rows();
    Matrix x = Matrix::Zero(n, b.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (l(i, i) == 0.0) {
            if (rank_deficiency) ++(*rank_deficiency);
            continue;
        }
        Eigen::RowVectorXd acc = b.row(i);
        if (i > 0) acc.noalias() -= l.row(i).head(i) * x.topRows(i);
        x.row(i) = acc / l(i, i);
    }
    return x;
}

namespace {

// Triangular factors are counted packed: n (n + 1) / 2 meaningful scalars.
std::size_t triangle_count(const Matrix& m)
{
    const auto n = static_cast<std::size_t>(m.rows());
    return n * (n + 1) / 2;
}

}  // namespace

std::size_t float_count(const GaussianState& g)
{
    return static_cast<std::size_t>(g.mean.size()) + triangle_count(g.cov_sqrt);
}

std::size_t float_count(const AffineConditional& c)
{
    return static_cast<std::size_t>(c.linear.size() + c.offset.size()) +
           triangle_count(c.noise_sqrt);
}

}  // namespace probode
