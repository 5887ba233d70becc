#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace levykit {

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error taxonomy.  Every failure mode carries the quantity a caller needs to
// react (achieved error, required extent, boundary magnitude, ...).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureFailure : Error {
    double achieved_error;
    explicit QuadratureFailure(const std::string& what, double achieved)
        : Error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_error(achieved) {}
};

struct SingularIntegrand : Error {
    using Error::Error;
};

struct GridCoverageError : Error {
    double required_extent;
    GridCoverageError(const std::string& what, double required)
        : Error(what + " (required extent " + std::to_string(required) + ")"),
          required_extent(required) {}
};

struct InsufficientDecay : Error {
    double boundary_magnitude;
    InsufficientDecay(const std::string& what, double magnitude)
        : Error(what + " (boundary magnitude " + std::to_string(magnitude) + ")"),
          boundary_magnitude(magnitude) {}
};

struct ScaleUnreachable : Error {
    using Error::Error;
};

struct ModelRejected : Error {
    using Error::Error;
};

struct ConfigError : Error {
    std::string key;
    ConfigError(const std::string& what, std::string key_path)
        : Error(what + " [key: " + key_path + "]"), key(std::move(key_path)) {}
};

struct InvalidArgument : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Small dense vector for points in R^n, n <= 3.
// ---------------------------------------------------------------------------

class Vec {
  public:
    Vec() : n_(0) {}
    explicit Vec(int n) : n_(n) {
        if (n < 0 || n > 3) throw InvalidArgument("Vec: dim must be in [0,3]");
    }
    Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
        if (n_ > 3) throw InvalidArgument("Vec: dim must be <= 3");
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }
    static Vec zero(int n) { return Vec(n); }
    static Vec unit(int n, int axis) {
        Vec e(n);
        e[axis] = 1.0;
        return e;
    }

    int dim() const { return n_; }
    double& operator[](int i) { return v_[i]; }
    double operator[](int i) const { return v_[i]; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < n_; ++i) s += v_[i] * o.v_[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec operator+(const Vec& o) const {
        Vec r(n_);
        for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] + o.v_[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r(n_);
        for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] - o.v_[i];
        return r;
    }
    Vec operator*(double a) const {
        Vec r(n_);
        for (int i = 0; i < n_; ++i) r.v_[i] = v_[i] * a;
        return r;
    }
    Vec operator-() const { return *this * -1.0; }
    bool operator==(const Vec& o) const {
        if (n_ != o.n_) return false;
        for (int i = 0; i < n_; ++i)
            if (v_[i] != o.v_[i]) return false;
        return true;
    }

  private:
    std::array<double, 3> v_{};
    int n_;
};

inline Vec operator*(double a, const Vec& v) { return v * a; }

// ---------------------------------------------------------------------------
// parallel_for: chunked index-range parallelism.  Deterministic results as
// long as the body writes disjoint outputs (all call sites do).
// ---------------------------------------------------------------------------

inline int default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    if (threads <= 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t k = 0; k < nt; ++k) {
        std::size_t lo = k * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Natural cubic spline on uniformly spaced nodes.  Fast O(1) lookup; used for
// all the radial profile tables.
// ---------------------------------------------------------------------------

class UniformSpline {
  public:
    UniformSpline() = default;
    UniformSpline(double x0, double dx, std::vector<double> y) { build(x0, dx, std::move(y)); }

    void build(double x0, double dx, std::vector<double> y) {
        if (y.size() < 2) throw InvalidArgument("UniformSpline: need >= 2 nodes");
        if (!(dx > 0)) throw InvalidArgument("UniformSpline: dx must be > 0");
        x0_ = x0;
        dx_ = dx;
        y_ = std::move(y);
        const std::size_t n = y_.size();
        m_.assign(n, 0.0);
        if (n == 2) return;
        // Natural cubic spline: m_{i-1} + 4 m_i + m_{i+1} = R_i on the
        // interior, m at both ends zero; Thomas sweep.
        std::vector<double> cp(n, 0.0), dp(n, 0.0);
        auto rhs_at = [&](std::size_t i) {
            return 6.0 * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / (dx_ * dx_);
        };
        cp[1] = 1.0 / 4.0;
        dp[1] = rhs_at(1) / 4.0;
        for (std::size_t i = 2; i + 1 < n; ++i) {
            double w = 4.0 - cp[i - 1];
            cp[i] = 1.0 / w;
            dp[i] = (rhs_at(i) - dp[i - 1]) / w;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = dp[i] - cp[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    bool empty() const { return y_.empty(); }
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + dx_ * static_cast<double>(y_.size() - 1); }

    // Clamped cubic evaluation; linear continuation outside the node range.
    double operator()(double x) const {
        const std::size_t n = y_.size();
        double u = (x - x0_) / dx_;
        if (u <= 0.0) {
            double d = deriv_at_node(0);
            return y_.front() + d * (x - x0_);
        }
        if (u >= static_cast<double>(n - 1)) {
            double d = deriv_at_node(n - 1);
            return y_.back() + d * (x - x_max());
        }
        std::size_t i = static_cast<std::size_t>(u);
        double a = u - static_cast<double>(i);
        double b = 1.0 - a;
        return b * y_[i] + a * y_[i + 1] +
               dx_ * dx_ / 6.0 *
                   ((b * b * b - b) * m_[i] + (a * a * a - a) * m_[i + 1]);
    }

  private:
    double deriv_at_node(std::size_t i) const {
        const std::size_t n = y_.size();
        if (i == 0)
            return (y_[1] - y_[0]) / dx_ - dx_ / 6.0 * (2.0 * m_[0] + m_[1]);
        return (y_[n - 1] - y_[n - 2]) / dx_ + dx_ / 6.0 * (m_[n - 2] + 2.0 * m_[n - 1]);
    }

    double x0_ = 0, dx_ = 1;
    std::vector<double> y_, m_;
};

// ---------------------------------------------------------------------------
// Formatting: fixed 17-significant-digit floats so CSV output round-trips
// bit-exactly and reruns are byte-identical.
// ---------------------------------------------------------------------------

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace levykit
