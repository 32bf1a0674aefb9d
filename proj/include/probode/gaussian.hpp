/**
 * @file gaussian.hpp
 * @brief Square-root Gaussian states and affine-Gaussian conditionals.
 *
 * All covariances are carried as lower-triangular factors L with
 * cov = L * L^T. No routine in this file ever assembles a dense covariance;
 * sums of the form A D A^T + B are combined through QR decompositions of
 * stacked factors, which keeps every result symmetric positive semidefinite
 * by construction. Zero factors (Dirac states) are legal everywhere.
 */
#pragma once

#include <Eigen/Core>

namespace probode {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian in square-root form. `mean` is n x w; for w > 1 all columns
/// share the single n x n factor `cov_sqrt` (used by the isotropic
/// state factorization, where w is the number of ODE coordinates).
struct GaussianState {
    Matrix mean;      ///< n x w
    Matrix cov_sqrt;  ///< n x n, lower triangular, diagonal >= 0

    GaussianState() = default;
    GaussianState(Matrix m, Matrix s);

    Eigen::Index dim() const { return mean.rows(); }
    Eigen::Index width() const { return mean.cols(); }

    /// Dense covariance (test/diagnostic use only).
    Matrix cov() const { return cov_sqrt * cov_sqrt.transpose(); }

    /// Point mass: zero covariance factor.
    static GaussianState dirac(const Matrix& mean);
};

/// Affine-Gaussian conditional p(x | y) = N(x; linear * y + offset, B B^T)
/// with B = noise_sqrt lower triangular.
struct AffineConditional {
    Matrix linear;      ///< n_out x n_in
    Matrix offset;      ///< n_out x w
    Matrix noise_sqrt;  ///< n_out x n_out, lower triangular, diagonal >= 0

    Eigen::Index dim_out() const { return linear.rows(); }
    Eigen::Index dim_in() const { return linear.cols(); }

    /// p(x | y) evaluated at a concrete y.
    GaussianState evaluate(const Matrix& y) const;

    /// x = y almost surely.
    static AffineConditional identity(Eigen::Index n, Eigen::Index w);
};

/// Lower-triangular L (n x n, diagonal >= 0) with L L^T = W^T W, from one
/// QR pass over W (any number of rows). Rank-deficient W is legal; the
/// result then carries zero diagonal entries.
Matrix triangularize(const Matrix& w);

/// Lower-triangular factor of A (sqrt_d sqrt_d^T) A^T + sqrt_b sqrt_b^T,
/// computed by QR-decomposing [sqrt_d^T A^T; sqrt_b^T] stacked.
Matrix qr_sqrt_sum(const Matrix& a, const Matrix& sqrt_d, const Matrix& sqrt_b);

/// N(linear * m + offset, linear cov linear^T + noise) pushed through `cond`.
GaussianState marginalize(const AffineConditional& cond, const GaussianState& g);

/// Collapse p(x | y) = \int outer(x | z) inner(z | y) dz into one conditional.
/// Output buffers are independent of the inputs, so callers may overwrite
/// either argument with the result.
AffineConditional merge_conditionals(const AffineConditional& outer,
                                     const AffineConditional& inner);

struct Reversal {
    GaussianState marginal;      ///< N(A m + a, A cov A^T + B)
    AffineConditional backward;  ///< p(x | A x + a + noise), gain in `linear`
    int rank_deficiency = 0;     ///< zero diagonal entries met in the gain solve
};

/// Joint factorization of (z, x) with z = A x + a + noise, x ~ g.
/// Returns the marginal of z and the reverse conditional p(x | z) in one QR
/// pass; the gain is obtained by triangular solves against the QR factor,
/// never through an explicit inverse. Exactly-zero pivots are treated as
/// uninformative directions: their gain columns are zero and the lost
/// information stays in the backward noise (degenerate inputs such as
/// Dirac states or zero observation maps are handled, not rejected).
Reversal reverse_marginalize(const GaussianState& g, const Matrix& a,
                             const Matrix& offset, const Matrix& noise_sqrt);

struct Conditioned {
    GaussianState posterior;     ///< p(x | h x + b = 0)
    AffineConditional backward;  ///< p(x | observed value), gain form
    GaussianState innovation;    ///< N(h m + b, h cov h^T), pre-update
    int rank_deficiency = 0;
};

/// Condition on the noise-free observation h x + b = 0. A numerically
/// singular innovation yields zero gain in the unobservable directions and
/// a posterior with unchanged variance there (see reverse_marginalize).
Conditioned condition_affine(const GaussianState& prior, const Matrix& h,
                             const Matrix& b);

/// mean + cov_sqrt * noise, with `noise` standard normal of matching shape.
Matrix sample(const GaussianState& g, const Matrix& noise);

/// Forward substitution solving L x = b column-wise where L is lower
/// triangular. Rows with an exactly zero pivot produce zero solution rows;
/// `rank_deficiency`, when given, counts them.
Matrix solve_lower_pseudo(const Matrix& l, const Matrix& b,
                          int* rank_deficiency = nullptr);

/// Number of scalars held by a state / conditional (memory audits).
std::size_t float_count(const GaussianState& g);
std::size_t float_count(const AffineConditional& c);

}  // namespace probode
