#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "torus_dispersive/grid.hpp"

namespace td {

/// Thin wrapper around FFTW's complex 2D transforms.
///
/// Plans are created with FFTW_ESTIMATE so results are reproducible across
/// runs and machines (measured plans may pick different algorithms), and
/// with FFTW_UNALIGNED so a cached plan can execute on any buffer via the
/// new-array interface. One plan pair per grid size, cached for the
/// lifetime of the process.
class Fft {
public:
    static void forward(const Grid& g, const std::vector<Complex>& in,
                        std::vector<Complex>& out) {
        auto& p = plans(g.n);
        out.resize(in.size());
        fftw_execute_dft(p.fwd, to_fftw(in.data()), to_fftw(out.data()));
        const double scale = 1.0 / g.size();
        for (auto& c : out) c *= scale;
    }

    /// Unnormalized inverse of forward(): modes back to grid values.
    static void inverse(const Grid& g, const std::vector<Complex>& in,
                        std::vector<Complex>& out) {
        auto& p = plans(g.n);
        out.resize(in.size());
        fftw_execute_dft(p.bwd, to_fftw(in.data()), to_fftw(out.data()));
    }

private:
    struct PlanPair {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    static fftw_complex* to_fftw(const Complex* p) {
        return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
    }

    static PlanPair& plans(int n) {
        static std::mutex mtx;
        static std::map<int, PlanPair> cache;
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;

        std::vector<Complex> a(size_t(n) * n), b(size_t(n) * n);
        PlanPair p;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.fwd = fftw_plan_dft_2d(n, n, to_fftw(a.data()), to_fftw(b.data()),
                                 FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_2d(n, n, to_fftw(a.data()), to_fftw(b.data()),
                                 FFTW_BACKWARD, flags);
        return cache.emplace(n, p).first->second;
    }
};

}  // namespace td
