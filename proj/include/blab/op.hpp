#pragma once

#include <filesystem>

#include "blab/flow.hpp"
#include "blab/lattice.hpp"
#include "blab/linalg.hpp"

namespace blab {

/// Operator ordering for H = p f(q) + g(q).
/// PLeft places -i d/dq to the left of the multiplication (the continuity
/// form -i d/dq (f .)); Weyl is the symmetrized hermitian form.
enum class Ordering { PLeft, Weyl };

/// Complex square matrix over a lattice basis with a verified hermiticity
/// flag (measured, never asserted).
struct OperatorMatrix {
  CMatrix m;
  std::size_t lattice_n = 0;
  bool hermitian = false;

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
};

/// Wraps a matrix, measuring hermiticity against 1e-10 * max|M|.
OperatorMatrix make_operator(CMatrix m, std::size_t lattice_n);

/// Momentum operator p = -i D on the lattice (hermitian).
OperatorMatrix momentum_operator(const Lattice& lat);

/// Momentum-linear Hamiltonian H = p f(q) + g(q) on the lattice in the
/// requested ordering.
/// PLeft: P diag(f) + diag(g); Weyl: (P diag(f) + diag(f) P)/2 (no g).
OperatorMatrix build_hamiltonian(const FlowField& field, const Lattice& lat,
                                 Ordering ordering);

/// Anti-hermitian counterterm g = (i/2) df/dq sampled on the lattice; adding
/// it to the PLeft form makes the Hamiltonian hermitian (and equal to Weyl).
CVector hermitize_g(const FlowField& field, const Lattice& lat);

/// PLeft Hamiltonian with an explicit sampled g.
OperatorMatrix build_hamiltonian_pleft_with_g(const FlowField& field,
                                              const Lattice& lat,
                                              const CVector& g_samples);

struct Spectrum {
  CVector values;   // sorted by (Re, Im, index); real for hermitian inputs
  CMatrix vectors;  // columns, orthonormal for hermitian inputs
};

/// Eigendecomposition. Requires a verified-hermitian operator (every operator
/// this artifact diagonalizes is hermitian; non-normal inputs are rejected
/// because the V Lambda V^dagger reconstruction contract is meaningless there).
Spectrum spectrum(const OperatorMatrix& op);

/// exp(-i H t): eigendecomposition for hermitian H, Pade expm otherwise.
CMatrix evolution_operator(const OperatorMatrix& op, double t);

/// Heisenberg be-able check: Q(t) = U^dag Q U with U = exp(-i op t); returns
/// the induced 2-norm of [Q(t), Q(0)] restricted to the resolved Fourier band
/// |k| <= band_fraction * n, normalized by max|Q|^2. The restriction is the
/// lattice rendering of the continuum statement: discrete multiplication
/// operators alias the band edge with O(1) strength at any resolution, so the
/// raw matrix norm never converges; the resolved-band block does.
double heisenberg_commutator_norm(const OperatorMatrix& op,
                                  const OperatorMatrix& observable, double t,
                                  double band_fraction = 0.25);

/// Max over unit Fourier probes |k| <= band_fraction * n of |M probe|.
/// Discrete multiplication operators alias the band edge, so operator
/// identities that hold in the continuum are asserted on this resolved band.
double resolved_band_apply_norm(const CMatrix& m, double band_fraction = 0.25);

/// Binary matrix format: 16-byte header, magic "BLAB", u32 rows, u32 cols,
/// u32 flags (0 = complex128 payload, 1 = float64), little-endian, row-major.
void save_matrix_blab(const std::filesystem::path& path, const CMatrix& m);
void save_matrix_blab(const std::filesystem::path& path, const RMatrix& m);
CMatrix load_matrix_blab(const std::filesystem::path& path);

/// CSV inspection dump: 2n columns re_0, im_0, re_1, im_1, ...
void save_matrix_csv(const std::filesystem::path& path, const CMatrix& m);

}  // namespace blab
