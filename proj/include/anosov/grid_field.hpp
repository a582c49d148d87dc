#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "anosov/geometry.hpp"

namespace anosov {

// Truncated Fourier series of a real scalar field on T^2:
//   g(x) = sum_{|m1|,|m2| <= F} c_m exp(2 pi i m.x),   c_{-m} = conj(c_m).
class TrigScalar {
public:
    TrigScalar() = default;
    explicit TrigScalar(int F) : F_(F), c_(size_t((2 * F + 1) * (2 * F + 1))) {
        if (F < 0 || F > 128) throw ModelError("frequency cutoff must lie in [0, 128]");
    }

    int F() const { return F_; }
    std::complex<double>& at(int m1, int m2) { return c_[idx(m1, m2)]; }
    const std::complex<double>& at(int m1, int m2) const { return c_[idx(m1, m2)]; }
    const std::vector<std::complex<double>>& coeffs() const { return c_; }
    std::vector<std::complex<double>>& coeffs() { return c_; }

    double eval(const Vec2& x) const;
    Vec2 gradient(const Vec2& x) const;

    // force Hermitian symmetry (projects onto real fields)
    void symmetrize();
    void set_mean(double m) { c_[idx(0, 0)] = m; }
    double mean() const { return c_[idx(0, 0)].real(); }

    // exact aliased projection of uniform N x N samples (row-major v[i*N+j],
    // grid node (i/N, j/N)); exact for bandlimited data when N > 2F + band.
    static TrigScalar fit_grid(const std::vector<double>& v, int N, int F);

    std::vector<double> evaluate_grid(int N) const;

    std::size_t idx(int m1, int m2) const {
        return std::size_t(m1 + F_) * std::size_t(2 * F_ + 1) + std::size_t(m2 + F_);
    }

private:
    int F_{0};
    std::vector<std::complex<double>> c_;
};

// Scalar field on a uniform N x N torus grid. Queries go through the attached
// spectral coefficients when present (bandlimited fields), otherwise through
// periodic bicubic interpolation.
class GridField {
public:
    GridField() = default;
    GridField(int N, double fill = 0.0) : N_(N), v_(size_t(N) * size_t(N), fill) {}
    GridField(int N, std::vector<double> values);

    int N() const { return N_; }
    double& at(int i, int j) { return v_[size_t(i) * size_t(N_) + size_t(j)]; }
    double at(int i, int j) const { return v_[size_t(i) * size_t(N_) + size_t(j)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    TorusPoint node(int i, int j) const { return {i / double(N_), j / double(N_)}; }

    double sample(const TorusPoint& p) const { return sample_lift(p.lift()); }
    double sample_lift(const Vec2& u) const;

    double mean() const;
    void shift(double constant);

    // attach a spectral representation (fitted from the grid values)
    void fit_trig(int F);
    void set_coeffs(TrigScalar c) { coeffs_ = std::move(c); }
    const std::optional<TrigScalar>& coeffs() const { return coeffs_; }
    bool spectral() const { return coeffs_.has_value(); }

    // flat binary with a small text header; see README for the schema
    void save(const std::string& path) const;
    static GridField load(const std::string& path);

private:
    double bicubic(const Vec2& u) const;

    int N_{0};
    std::vector<double> v_;
    std::optional<TrigScalar> coeffs_;
};

// Build a field by evaluating fn at every grid node.
template <typename Fn>
GridField make_grid_field(int N, Fn&& fn) {
    GridField g(N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) g.at(i, j) = fn(TorusPoint{i / double(N), j / double(N)});
    return g;
}

} // namespace anosov
