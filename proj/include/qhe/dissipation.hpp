// dissipation.hpp: Markovian bath channels: Planck occupations, ohmic spectral
// density, Bohr-frequency decomposition of a coupling operator, and the
// diagonal-form GKSL dissipator built from those pieces.

#pragma once

#include "qhe/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qhe {

enum class BathLabel { hot, cold };

inline const char* to_string(BathLabel b) { return b == BathLabel::hot ? "hot" : "cold"; }

struct BathSpec {
    double T{1.0};
    double kappa{1e-3};
    BathLabel label{BathLabel::hot};

    void validate() const {
        detail::require(std::isfinite(T) && T > 0.0, "BathSpec: temperature must be positive and finite");
        detail::require(std::isfinite(kappa) && kappa > 0.0, "BathSpec: kappa must be positive");
    }
};

// One Bohr frequency of a bath coupling. `jump` lowers the energy by `omega`.
struct DissipationChannel {
    Operator jump;
    double omega{0.0};
    double rate_down{0.0};  // J(w) (1 + n(w, T))
    double rate_up{0.0};    // J(w) n(w, T)
    BathLabel bath{BathLabel::hot};
};

// Mean boson number 1/(exp(w/T) - 1); clamped to zero once w/T exceeds 700.
inline double planck_occupation(double omega, double T) {
    detail::require(std::isfinite(omega) && omega > 0.0, "planck_occupation: frequency must be positive");
    detail::require(!std::isnan(T) && T > 0.0, "planck_occupation: temperature must be positive");
    const double x = omega / T;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

// Ohmic density with the cutoff taken to infinity.
inline double spectral_density(double omega, double kappa) { return kappa * omega; }

struct FrequencyComponent {
    double omega{0.0};
    Operator jump;
};

// A(w) = sum_{E' - E = w} P(E) X P(E') for every positive Bohr frequency w of H
// carrying a nonzero component. Sorted by ascending w.
inline std::vector<FrequencyComponent> eigenoperator_decomposition(const Operator& h, const Operator& coupling,
                                                                   double tol = tolerances().frequency_grouping) {
    detail::require(h.dim() == coupling.dim(), "eigenoperator_decomposition: dimension mismatch");
    const auto es = hermitian_eigensystem(h);  // throws on non-Hermitian H
    const int d = h.dim();

    // Degenerate eigenvalues share one spectral projector.
    struct Level {
        double energy;
        Matrix projector;
    };
    std::vector<Level> levels;
    for (int i = 0; i < d; ++i) {
        const Vector v = es.vectors.col(i);
        if (!levels.empty() && std::abs(es.values(i) - levels.back().energy) <= tol) {
            levels.back().projector += v * v.adjoint();
        } else {
            levels.push_back({es.values(i), Matrix(v * v.adjoint())});
        }
    }

    struct Piece {
        double omega;
        Matrix part;
    };
    std::vector<Piece> pieces;
    for (const auto& lo : levels) {
        for (const auto& hi : levels) {
            const double w = hi.energy - lo.energy;
            if (w <= tol) continue;
            pieces.push_back({w, Matrix(lo.projector * coupling.matrix() * hi.projector)});
        }
    }
    std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.omega < b.omega; });

    const double scale = std::max(1.0, max_norm(coupling));
    std::vector<FrequencyComponent> out;
    std::size_t i = 0;
    while (i < pieces.size()) {
        std::size_t j = i;
        Matrix sum = Matrix::Zero(d, d);
        double wsum = 0.0;
        while (j < pieces.size() && pieces[j].omega - pieces[i].omega <= tol) {
            sum += pieces[j].part;
            wsum += pieces[j].omega;
            ++j;
        }
        if (detail::max_abs(sum) > 1e-12 * scale) {
            out.push_back({wsum / static_cast<double>(j - i), Operator(std::move(sum))});
        }
        i = j;
    }
    return out;
}

inline std::vector<DissipationChannel> build_channels(const Operator& h, const Operator& coupling,
                                                      const BathSpec& bath) {
    bath.validate();
    std::vector<DissipationChannel> channels;
    for (auto& c : eigenoperator_decomposition(h, coupling)) {
        const double j = spectral_density(c.omega, bath.kappa);
        const double n = planck_occupation(c.omega, bath.T);
        const double down = j * (1.0 + n);
        if (down < 1e-300) continue;
        channels.push_back({std::move(c.jump), c.omega, down, j * n, bath.label});
    }
    return channels;
}

// max-norm of [H, A] + w A; zero for an exact eigenoperator.
inline double eigenoperator_residual(const Operator& h, const DissipationChannel& ch) {
    return max_norm(commutator(h, ch.jump) + ch.omega * ch.jump);
}

namespace detail {

inline Matrix apply_dissipator(const Matrix& rho, const std::vector<DissipationChannel>& channels) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& ch : channels) {
        require(ch.jump.dim() == rho.rows(), "dissipator_apply: channel dimension mismatch");
        const Matrix& a = ch.jump.matrix();
        const Matrix ad = a.adjoint();
        const Matrix ada = ad * a;
        const Matrix aad = a * ad;
        out += ch.rate_down * (a * rho * ad - 0.5 * (ada * rho + rho * ada));
        if (ch.rate_up != 0.0) out += ch.rate_up * (ad * rho * a - 0.5 * (aad * rho + rho * aad));
    }
    return out;
}

}  // namespace detail

// Sum over channels of the emission and absorption Lindblad terms.
inline Operator dissipator_apply(const DensityMatrix& rho, const std::vector<DissipationChannel>& channels) {
    return Operator(detail::apply_dissipator(rho.matrix(), channels));
}

}  // namespace qhe
