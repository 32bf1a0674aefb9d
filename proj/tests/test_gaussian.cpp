#include <doctest.h>

#include <random>

#include <Eigen/Cholesky>

#include "probode/gaussian.hpp"

using namespace probode;

namespace {

std::mt19937_64 rng(20240901);

Matrix random_matrix(int rows, int cols)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

// Lower triangular with positive diagonal, i.e. a valid Cholesky factor.
Matrix random_sqrt(int n)
{
    std::uniform_real_distribution<double> diag(0.2, 1.5);
    Matrix l = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) l(i, j) = random_matrix(1, 1)(0, 0);
        l(i, i) = diag(rng);
    }
    return l;
}

bool is_lower_with_nonneg_diag(const Matrix& l)
{
    for (int i = 0; i < l.rows(); ++i) {
        if (l(i, i) < 0.0) return false;
        for (int j = i + 1; j < l.cols(); ++j)
            if (l(i, j) != 0.0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("triangularize reproduces W^T W and is canonical")
{
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + trial % 7;
        const int cols = 1 + (trial * 3) % 5;
        const Matrix w = random_matrix(rows, cols);
        const Matrix l = triangularize(w);
        CHECK(is_lower_with_nonneg_diag(l));
        CHECK(((l * l.transpose()) - (w.transpose() * w)).norm() < 1e-12 * (1.0 + w.norm() * w.norm()));
    }
}

TEST_CASE("qr_sqrt_sum: zero map keeps the additive factor")
{
    const Matrix a = Matrix::Zero(3, 2);
    const Matrix sqrt_d = random_sqrt(2);
    const Matrix sqrt_b = random_sqrt(3);
    const Matrix l = qr_sqrt_sum(a, sqrt_d, sqrt_b);
    CHECK((l * l.transpose() - sqrt_b * sqrt_b.transpose()).norm() < 1e-13);
}

TEST_CASE("qr_sqrt_sum: identity map of a unit factor")
{
    const Matrix l = qr_sqrt_sum(Matrix::Identity(3, 3), Matrix::Identity(3, 3),
                                 Matrix::Zero(3, 3));
    CHECK((l - Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("qr_sqrt_sum matches the dense assemble-then-Cholesky oracle")
{
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        const int m = 1 + (trial * 7) % 4;
        const Matrix a = random_matrix(n, m);
        const Matrix sqrt_d = random_sqrt(m);
        const Matrix sqrt_b = random_sqrt(n);
        const Matrix l = qr_sqrt_sum(a, sqrt_d, sqrt_b);
        CHECK(is_lower_with_nonneg_diag(l));

        const Matrix dense = a * sqrt_d * sqrt_d.transpose() * a.transpose() +
                             sqrt_b * sqrt_b.transpose();
        const Matrix ref = Eigen::LLT<Matrix>(dense).matrixL();
        CHECK((l - ref).norm() < 1e-12 * (1.0 + dense.norm()));
    }
}

TEST_CASE("marginalize: identity conditional is a no-op")
{
    GaussianState g(Vector::Constant(2, 1.0), Matrix::Identity(2, 2));
    g.mean << 1.0, 2.0;
    const GaussianState out =
        marginalize(AffineConditional::identity(2, 1), g);
    CHECK((out.mean - g.mean).norm() == 0.0);
    CHECK((out.cov() - g.cov()).norm() < 1e-14);
}

TEST_CASE("marginalize: input-independent conditional returns its own law")
{
    AffineConditional cond{Matrix::Zero(1, 2), Vector::Constant(1, 3.0),
                           Matrix::Constant(1, 1, 2.0)};
    GaussianState g(random_matrix(2, 1), random_sqrt(2));
    const GaussianState out = marginalize(cond, g);
    CHECK(out.mean(0, 0) == doctest::Approx(3.0));
    CHECK(out.cov()(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("marginalize from a Dirac recovers the conditional noise")
{
    Matrix target(2, 2);
    target << 1.0 / 3.0, 0.5, 0.5, 1.0;
    const Matrix sqrt_b = Eigen::LLT<Matrix>(target).matrixL();
    Matrix a(2, 2);
    a << 1.0, 1.0, 0.0, 1.0;
    AffineConditional cond{a, Vector::Zero(2), sqrt_b};
    const GaussianState out =
        marginalize(cond, GaussianState::dirac(Vector::Zero(2)));
    CHECK(out.mean.norm() == 0.0);
    CHECK((out.cov() - target).norm() < 1e-12);
}

TEST_CASE("marginalize rejects dimension mismatch")
{
    GaussianState g(Vector::Zero(3), Matrix::Zero(3, 3));
    CHECK_THROWS_AS(marginalize(AffineConditional::identity(2, 1), g),
                    std::invalid_argument);
}

TEST_CASE("merge_conditionals: identity on either side is neutral")
{
    AffineConditional inner{random_matrix(2, 2), random_matrix(2, 1),
                            random_sqrt(2)};
    const AffineConditional id = AffineConditional::identity(2, 1);

    const AffineConditional left = merge_conditionals(id, inner);
    CHECK((left.linear - inner.linear).norm() < 1e-14);
    CHECK((left.offset - inner.offset).norm() < 1e-14);
    CHECK((left.noise_sqrt * left.noise_sqrt.transpose() -
           inner.noise_sqrt * inner.noise_sqrt.transpose())
              .norm() < 1e-13);

    const AffineConditional right = merge_conditionals(inner, id);
    CHECK((right.linear - inner.linear).norm() < 1e-14);
    CHECK((right.offset - inner.offset).norm() < 1e-14);
    CHECK((right.noise_sqrt * right.noise_sqrt.transpose() -
           inner.noise_sqrt * inner.noise_sqrt.transpose())
              .norm() < 1e-13);
}

TEST_CASE("merge_conditionals: scalar worked example")
{
    AffineConditional outer{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0),
                            Matrix::Constant(1, 1, 1.0)};
    AffineConditional inner{Matrix::Constant(1, 1, 3.0), Vector::Zero(1),
                            Matrix::Constant(1, 1, 1.0)};
    const AffineConditional merged = merge_conditionals(outer, inner);
    CHECK(merged.linear(0, 0) == doctest::Approx(6.0));
    CHECK(merged.offset(0, 0) == doctest::Approx(1.0));
    CHECK(merged.noise_sqrt(0, 0) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("merge_conditionals equals dense composition on random instances")
{
    for (int trial = 0; trial < 100; ++trial) {
        const int n1 = 1 + trial % 3;
        const int n2 = 1 + (trial * 5) % 3;
        const int n3 = 1 + (trial * 11) % 3;
        AffineConditional outer{random_matrix(n1, n2), random_matrix(n1, 1),
                                random_sqrt(n1)};
        AffineConditional inner{random_matrix(n2, n3), random_matrix(n2, 1),
                                random_sqrt(n2)};
        const AffineConditional merged = merge_conditionals(outer, inner);

        const Matrix lin_ref = outer.linear * inner.linear;
        const Matrix off_ref = outer.linear * inner.offset + outer.offset;
        const Matrix cov_ref =
            outer.linear * inner.noise_sqrt * inner.noise_sqrt.transpose() *
                outer.linear.transpose() +
            outer.noise_sqrt * outer.noise_sqrt.transpose();

        CHECK((merged.linear - lin_ref).norm() <
              1e-12 * (1.0 + lin_ref.norm()));
        CHECK((merged.offset - off_ref).norm() <
              1e-12 * (1.0 + off_ref.norm()));
        CHECK((merged.noise_sqrt * merged.noise_sqrt.transpose() - cov_ref)
                  .norm() < 1e-10);
    }
}

TEST_CASE("merge_conditionals is associative on the implied joints")
{
    for (int trial = 0; trial < 50; ++trial) {
        AffineConditional c1{random_matrix(2, 2), random_matrix(2, 1),
                             random_sqrt(2)};
        AffineConditional c2{random_matrix(2, 2), random_matrix(2, 1),
                             random_sqrt(2)};
        AffineConditional c3{random_matrix(2, 2), random_matrix(2, 1),
                             random_sqrt(2)};
        const AffineConditional lhs =
            merge_conditionals(merge_conditionals(c1, c2), c3);
        const AffineConditional rhs =
            merge_conditionals(c1, merge_conditionals(c2, c3));
        CHECK((lhs.linear - rhs.linear).norm() < 1e-10);
        CHECK((lhs.offset - rhs.offset).norm() < 1e-10);
        CHECK((lhs.noise_sqrt * lhs.noise_sqrt.transpose() -
               rhs.noise_sqrt * rhs.noise_sqrt.transpose())
                  .norm() < 1e-10);
    }
}

TEST_CASE("condition_affine: zero observation map leaves the prior intact")
{
    GaussianState prior(random_matrix(2, 1), random_sqrt(2));
    const Conditioned c =
        condition_affine(prior, Matrix::Zero(1, 2), Matrix::Zero(1, 1));
    CHECK((c.posterior.mean - prior.mean).norm() < 1e-14);
    CHECK((c.posterior.cov() - prior.cov()).norm() < 1e-12);
    CHECK(c.backward.linear.norm() == 0.0);
    CHECK(c.rank_deficiency == 1);
}

TEST_CASE("condition_affine: exact scalar observation pins the state")
{
    GaussianState prior(Vector::Zero(1), Matrix::Identity(1, 1));
    const Conditioned c = condition_affine(prior, Matrix::Identity(1, 1),
                                           Vector::Constant(1, -1.0));
    CHECK(c.posterior.mean(0, 0) == doctest::Approx(1.0));
    CHECK(c.posterior.cov()(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("condition_affine: partial observation matches the textbook oracle")
{
    GaussianState prior(Vector::Zero(2), Matrix::Identity(2, 2));
    Matrix h(1, 2);
    h << 1.0, 0.0;
    const Conditioned c = condition_affine(prior, h, Matrix::Zero(1, 1));
    CHECK(c.posterior.mean.norm() < 1e-14);
    Matrix expected(2, 2);
    expected << 0.0, 0.0, 0.0, 1.0;
    CHECK((c.posterior.cov() - expected).norm() < 1e-13);
}

TEST_CASE("condition_affine: full-row-rank observations zero the observed "
          "directions on random instances")
{
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 3;
        GaussianState prior(random_matrix(n, 1), random_sqrt(n));
        const Matrix h = random_matrix(1, n);
        const Matrix b = random_matrix(1, 1);
        const Conditioned c = condition_affine(prior, h, b);

        // Oracle: dense Gaussian conditioning.
        const Matrix cov = prior.cov();
        const double s = (h * cov * h.transpose())(0, 0);
        const Matrix gain = cov * h.transpose() / s;
        const Matrix mean_ref =
            prior.mean - gain * (h * prior.mean + b);
        const Matrix cov_ref = cov - gain * h * cov;

        CHECK((c.posterior.mean - mean_ref).norm() < 1e-10);
        CHECK((c.posterior.cov() - cov_ref).norm() < 1e-10);
        // Variance along the observed direction collapses.
        CHECK((h * c.posterior.cov() * h.transpose())(0, 0) ==
              doctest::Approx(0.0).epsilon(1e-9));
        // Posterior factor remains a valid square root.
        CHECK(is_lower_with_nonneg_diag(c.posterior.cov_sqrt));
    }
}

TEST_CASE("sample: zero noise returns the mean, Dirac ignores noise")
{
    GaussianState g(random_matrix(3, 1), random_sqrt(3));
    CHECK((sample(g, Matrix::Zero(3, 1)) - g.mean).norm() == 0.0);

    const GaussianState dirac = GaussianState::dirac(random_matrix(3, 1));
    CHECK((sample(dirac, random_matrix(3, 1)) - dirac.mean).norm() == 0.0);
}

TEST_CASE("sample: scalar arithmetic")
{
    GaussianState g(Vector::Zero(1), Matrix::Constant(1, 1, 2.0));
    CHECK(sample(g, Matrix::Constant(1, 1, 1.0))(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("sample: empirical covariance of 1e5 draws matches within 5%")
{
    Matrix sqrt(2, 2);
    sqrt << 1.0, 0.0, 0.4, 0.8;
    GaussianState g((Vector(2) << 1.0, -2.0).finished(), sqrt);

    std::mt19937_64 gen(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int num = 100000;
    Matrix sum = Matrix::Zero(2, 1);
    Matrix outer = Matrix::Zero(2, 2);
    for (int i = 0; i < num; ++i) {
        Matrix noise(2, 1);
        noise << normal(gen), normal(gen);
        const Matrix x = sample(g, noise);
        sum += x;
        outer += x * x.transpose();
    }
    const Matrix mean = sum / num;
    const Matrix cov = outer / num - mean * mean.transpose();
    CHECK((cov - g.cov()).norm() / g.cov().norm() < 0.05);
}
