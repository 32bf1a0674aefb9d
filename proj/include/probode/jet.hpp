/**
 * @file jet.hpp
 * @brief Truncated Taylor-series scalars for exact derivative propagation.
 *
 * A Jet holds normalized Taylor coefficients c_k = u^(k)/k! up to a fixed
 * order. Arithmetic follows the usual convolution recurrences; every
 * operation is causal in the coefficients, which is what makes the ODE
 * initialization recursion below well defined.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace probode {

class Jet {
public:
    Jet() = default;
    Jet(double value, std::size_t order) : c_(order + 1, 0.0) { c_[0] = value; }
    explicit Jet(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

    std::size_t order() const { return c_.size() - 1; }
    double coeff(std::size_t k) const { return c_[k]; }
    double& coeff(std::size_t k) { return c_[k]; }

    /// u^(k)(t0) recovered from the normalized coefficient.
    double derivative(std::size_t k) const;

    /// Jet of d/dt applied to this jet, one order shorter conceptually but
    /// kept at the same length with a trailing zero.
    Jet time_derivative() const;

    friend Jet operator+(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator+(const Jet& a, double s);
    friend Jet operator+(double s, const Jet& a);
    friend Jet operator-(const Jet& a, double s);
    friend Jet operator-(double s, const Jet& a);
    friend Jet operator*(const Jet& a, double s);
    friend Jet operator*(double s, const Jet& a);
    friend Jet operator/(const Jet& a, double s);

    friend Jet sqrt(const Jet& a);
    friend Jet exp(const Jet& a);
    friend Jet sin(const Jet& a);
    friend Jet cos(const Jet& a);

private:
    std::vector<double> c_;
};

inline double Jet::derivative(std::size_t k) const
{
    double factorial = 1.0;
    for (std::size_t i = 2; i <= k; ++i) factorial *= static_cast<double>(i);
    return c_[k] * factorial;
}

inline Jet Jet::time_derivative() const
{
    std::vector<double> d(c_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < c_.size(); ++k)
        d[k] = static_cast<double>(k + 1) * c_[k + 1];
    return Jet(std::move(d));
}

inline Jet operator+(const Jet& a, const Jet& b)
{
    std::vector<double> r(a.c_.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.c_[k] + b.c_[k];
    return Jet(std::move(r));
}

inline Jet operator-(const Jet& a, const Jet& b)
{
    std::vector<double> r(a.c_.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.c_[k] - b.c_[k];
    return Jet(std::move(r));
}

inline Jet operator-(const Jet& a)
{
    std::vector<double> r(a.c_.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = -a.c_[k];
    return Jet(std::move(r));
}

inline Jet operator*(const Jet& a, const Jet& b)
{
    std::vector<double> r(a.c_.size(), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k)
        for (std::size_t j = 0; j <= k; ++j) r[k] += a.c_[j] * b.c_[k - j];
    return Jet(std::move(r));
}

inline Jet operator/(const Jet& a, const Jet& b)
{
    if (b.c_[0] == 0.0) throw std::domain_error("Jet division by zero constant term");
    std::vector<double> r(a.c_.size(), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) {
        double acc = a.c_[k];
        for (std::size_t j = 1; j <= k; ++j) acc -= b.c_[j] * r[k - j];
        r[k] = acc / b.c_[0];
    }
    return Jet(std::move(r));
}

inline Jet operator+(const Jet& a, double s)
{
    Jet r = a;
    r.c_[0] += s;
    return r;
}
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }

inline Jet operator*(const Jet& a, double s)
{
    Jet r = a;
    for (auto& v : r.c_) v *= s;
    return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

inline Jet sqrt(const Jet& a)
{
    if (a.c_[0] <= 0.0) throw std::domain_error("Jet sqrt of non-positive constant term");
    std::vector<double> r(a.c_.size(), 0.0);
    r[0] = std::sqrt(a.c_[0]);
    for (std::size_t k = 1; k < r.size(); ++k) {
        double acc = a.c_[k];
        for (std::size_t j = 1; j < k; ++j) acc -= r[j] * r[k - j];
        r[k] = acc / (2.0 * r[0]);
    }
    return Jet(std::move(r));
}

inline Jet exp(const Jet& a)
{
    std::vector<double> r(a.c_.size(), 0.0);
    r[0] = std::exp(a.c_[0]);
    for (std::size_t k = 1; k < r.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j)
            acc += static_cast<double>(j) * a.c_[j] * r[k - j];
        r[k] = acc / static_cast<double>(k);
    }
    return Jet(std::move(r));
}

inline Jet sin(const Jet& a)
{
    std::vector<double> s(a.c_.size(), 0.0), c(a.c_.size(), 0.0);
    s[0] = std::sin(a.c_[0]);
    c[0] = std::cos(a.c_[0]);
    for (std::size_t k = 1; k < s.size(); ++k) {
        double as = 0.0, ac = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            as += static_cast<double>(j) * a.c_[j] * c[k - j];
            ac += static_cast<double>(j) * a.c_[j] * s[k - j];
        }
        s[k] = as / static_cast<double>(k);
        c[k] = -ac / static_cast<double>(k);
    }
    return Jet(std::move(s));
}

inline Jet cos(const Jet& a)
{
    std::vector<double> s(a.c_.size(), 0.0), c(a.c_.size(), 0.0);
    s[0] = std::sin(a.c_[0]);
    c[0] = std::cos(a.c_[0]);
    for (std::size_t k = 1; k < s.size(); ++k) {
        double as = 0.0, ac = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            as += static_cast<double>(j) * a.c_[j] * c[k - j];
            ac += static_cast<double>(j) * a.c_[j] * s[k - j];
        }
        s[k] = as / static_cast<double>(k);
        c[k] = -ac / static_cast<double>(k);
    }
    return Jet(std::move(c));
}

}  // namespace probode
