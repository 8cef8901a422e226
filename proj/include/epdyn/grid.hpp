#pragma once

// Periodic 1D grid with cached FFTW plans, plus the Field value type.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "epdyn/errors.hpp"

namespace epdyn {

using complexd = std::complex<double>;

namespace detail {
// FFTW's planner is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// Uniform periodic grid on x in [-L/2, L/2), M even points, with the
// wavenumber table k_j = 2 pi j~/L, j~ in {-M/2, ..., M/2-1} stored in FFT
// (wrap-around) order. Forward transform uses e^{-ikx}; the inverse carries
// the 1/M normalization.
class SpectralGrid {
  public:
    SpectralGrid(double length, std::size_t points) : length_(length), points_(points) {
        if (!(length > 0.0)) throw DomainError("SpectralGrid: length must be > 0");
        if (points < 8 || points % 2 != 0)
            throw DomainError("SpectralGrid: need an even number of points, M >= 8");
        dx_ = length_ / static_cast<double>(points_);
        wavenumbers_.resize(points_);
        const double dk = 2.0 * std::numbers::pi / length_;
        for (std::size_t j = 0; j < points_; ++j) {
            const auto jj = static_cast<std::ptrdiff_t>(j);
            const auto half = static_cast<std::ptrdiff_t>(points_ / 2);
            wavenumbers_[j] = dk * static_cast<double>(jj < half ? jj : jj - 2 * half);
        }
        std::vector<complexd> dummy(points_);
        auto* buf = reinterpret_cast<fftw_complex*>(dummy.data());
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        forward_plan_ = fftw_plan_dft_1d(static_cast<int>(points_), buf, buf, FFTW_FORWARD,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        inverse_plan_ = fftw_plan_dft_1d(static_cast<int>(points_), buf, buf, FFTW_BACKWARD,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    }

    ~SpectralGrid() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_plan_);
        fftw_destroy_plan(inverse_plan_);
    }

    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    double length() const { return length_; }
    std::size_t size() const { return points_; }
    double dx() const { return dx_; }
    double node(std::size_t j) const { return -0.5 * length_ + dx_ * static_cast<double>(j); }
    double wavenumber(std::size_t j) const { return wavenumbers_[j]; }
    const std::vector<double>& wavenumbers() const { return wavenumbers_; }
    std::size_t nyquist_index() const { return points_ / 2; }
    double max_wavenumber() const { return std::numbers::pi / dx_; }

    void forward(std::span<const complexd> in, std::span<complexd> out) const {
        check(in, out);
        if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
        fftw_execute_dft(forward_plan_, reinterpret_cast<fftw_complex*>(out.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

    void inverse(std::span<const complexd> in, std::span<complexd> out) const {
        check(in, out);
        if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
        fftw_execute_dft(inverse_plan_, reinterpret_cast<fftw_complex*>(out.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
        const double inv = 1.0 / static_cast<double>(points_);
        for (auto& v : out) v *= inv;
    }

  private:
    void check(std::span<const complexd> in, std::span<complexd> out) const {
        if (in.size() != points_ || out.size() != points_)
            throw DomainError("SpectralGrid: buffer length does not match grid");
    }

    double length_;
    std::size_t points_;
    double dx_;
    std::vector<double> wavenumbers_;
    fftw_plan forward_plan_;
    fftw_plan inverse_plan_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(double length, std::size_t points) {
    return std::make_shared<const SpectralGrid>(length, points);
}

// Complex samples bound to a grid. Value-semantic.
struct Field {
    GridPtr grid;
    std::vector<complexd> values;

    Field() = default;
    explicit Field(GridPtr g) : grid(std::move(g)), values(grid->size(), complexd{0.0, 0.0}) {}
    Field(GridPtr g, std::vector<complexd> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid->size())
            throw DomainError("Field: sample count does not match grid");
    }

    std::size_t size() const { return values.size(); }
    complexd& operator[](std::size_t i) { return values[i]; }
    const complexd& operator[](std::size_t i) const { return values[i]; }

    template <typename F>
    static Field sampled(GridPtr g, F&& f) {
        Field out(g);
        for (std::size_t j = 0; j < out.size(); ++j) out.values[j] = f(g->node(j));
        return out;
    }
};

inline Field forward_transform(const Field& f) {
    Field out(f.grid);
    f.grid->forward(f.values, out.values);
    return out;
}

inline Field inverse_transform(const Field& spectrum) {
    Field out(spectrum.grid);
    spectrum.grid->inverse(spectrum.values, out.values);
    return out;
}

}  // namespace epdyn
