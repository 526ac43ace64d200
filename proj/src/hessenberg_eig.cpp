#include "bjgmres/hessenberg_eig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bjgmres {

namespace {

using cplx = std::complex<double>;

struct Rotation {
    double c;  // real by construction
    cplx s;
};

/// Unitary rotation with [c, s; -conj(s), c] [f; g] = [r; 0].
Rotation make_rotation(cplx f, cplx g) {
    const double af = std::abs(f);
    const double ag = std::abs(g);
    if (ag == 0.0) return {1.0, cplx(0.0)};
    if (af == 0.0) return {0.0, cplx(1.0)};
    const double norm = std::hypot(af, ag);
    const cplx alpha = f / af;
    return {af / norm, alpha * std::conj(g) / norm};
}

/// Eigenvalue of [[a, b], [c, d]] closer to d (Wilkinson shift).
cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
    const cplx tr2 = 0.5 * (a - d);
    const cplx disc = std::sqrt(tr2 * tr2 + b * c);
    const cplx mu1 = d + tr2 + disc;
    const cplx mu2 = d + tr2 - disc;
    return std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
}

} // namespace

std::vector<std::complex<double>> ritz_values(const DenseMatrix& hm) {
    const index_t m = hm.rows;
    if (hm.cols != m) throw std::invalid_argument("ritz_values: square input required");
    if (m > 200) throw std::invalid_argument("ritz_values: dense routine capped at 200");
    if (m == 0) return {};

    // Complex working copy; only the Hessenberg part is referenced.
    std::vector<cplx> h(m * m, cplx(0.0));
    const auto at = [&](index_t i, index_t j) -> cplx& { return h[j * m + i]; };
    for (index_t j = 0; j < m; ++j)
        for (index_t i = 0; i <= std::min(j + 1, m - 1); ++i) at(i, j) = hm(i, j);

    std::vector<cplx> eig;
    eig.reserve(m);
    std::vector<Rotation> rot(m);

    index_t hi = m - 1;
    long iter_this = 0;
    long iter_total = 0;
    const long cap = 60 * static_cast<long>(m) + 200;
    while (true) {
        // Deflate negligible subdiagonals.
        while (hi > 0) {
            const double sub = std::abs(at(hi, hi - 1));
            const double scale = std::abs(at(hi - 1, hi - 1)) + std::abs(at(hi, hi));
            if (sub <= 1e-14 * scale + 1e-300) {
                at(hi, hi - 1) = 0.0;
                eig.push_back(at(hi, hi));
                --hi;
                iter_this = 0;
            } else {
                break;
            }
        }
        if (hi == 0) {
            eig.push_back(at(0, 0));
            break;
        }
        // Window [lo, hi] of the active unreduced block.
        index_t lo = hi;
        while (lo > 0) {
            const double sub = std::abs(at(lo, lo - 1));
            const double scale = std::abs(at(lo - 1, lo - 1)) + std::abs(at(lo, lo));
            if (sub <= 1e-14 * scale + 1e-300) {
                at(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }

        if (++iter_total > cap)
            throw std::runtime_error("ritz_values: QR iteration did not converge");
        // Exceptional unshifted sweep every 12 stagnating iterations.
        const cplx mu = (++iter_this % 12 == 0)
                            ? cplx(0.0)
                            : wilkinson_shift(at(hi - 1, hi - 1), at(hi - 1, hi),
                                              at(hi, hi - 1), at(hi, hi));

        // QR step on the window: H - mu I = QR, then H <- RQ + mu I.
        for (index_t k = lo; k <= hi; ++k) at(k, k) -= mu;
        for (index_t k = lo; k < hi; ++k) {
            rot[k] = make_rotation(at(k, k), at(k + 1, k));
            for (index_t j = k; j <= hi; ++j) {
                const cplx t1 = at(k, j);
                const cplx t2 = at(k + 1, j);
                at(k, j) = rot[k].c * t1 + rot[k].s * t2;
                at(k + 1, j) = -std::conj(rot[k].s) * t1 + rot[k].c * t2;
            }
        }
        for (index_t k = lo; k < hi; ++k) {
            const index_t top = lo;
            for (index_t i = top; i <= std::min(k + 1, hi); ++i) {
                const cplx t1 = at(i, k);
                const cplx t2 = at(i, k + 1);
                at(i, k) = rot[k].c * t1 + std::conj(rot[k].s) * t2;
                at(i, k + 1) = -rot[k].s * t1 + rot[k].c * t2;
            }
        }
        for (index_t k = lo; k <= hi; ++k) at(k, k) += mu;
    }

    std::sort(eig.begin(), eig.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eig;
}

} // namespace bjgmres
