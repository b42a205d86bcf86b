"""Labeled finite Hilbert spaces for a quantum dot coupled to one cavity mode.

Basis vectors are indexed photon-major: index = n * len(config_labels) + c
holds the product state |n photons> (x) |configuration c>.  Operators and
density matrices are dense complex matrices on this ordering; the photon
space is truncated at n_max, so b^dag |n_max> = 0 by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BasisSpec",
    "Operator",
    "DensityMatrix",
    "HealthReport",
    "HealthError",
    "photon_annihilator",
    "transition_operator",
    "pair_annihilator",
    "tensor",
    "expectation",
    "validate_density",
]

# Configuration labels of the two-shell dot used by the dephasing models:
# ground state, s exciton, p exciton, biexciton.
DOT_LABELS = ("G", "Xs", "Xp", "XX")


@dataclass(frozen=True)
class BasisSpec:
    """Photon cutoff plus an ordered tuple of electronic configuration labels."""

    n_max: int
    config_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "config_labels", tuple(self.config_labels))
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        if not self.config_labels:
            raise ValueError("config_labels must not be empty")
        if len(set(self.config_labels)) != len(self.config_labels):
            raise ValueError(f"duplicate configuration labels: {self.config_labels}")

    @property
    def n_photon(self) -> int:
        return self.n_max + 1

    @property
    def n_configs(self) -> int:
        return len(self.config_labels)

    @property
    def dim(self) -> int:
        return self.n_photon * self.n_configs

    def config_index(self, label: str) -> int:
        try:
            return self.config_labels.index(label)
        except ValueError:
            raise ValueError(
                f"unknown configuration label {label!r}; basis has {self.config_labels}"
            ) from None

    def index(self, n: int, label: str) -> int:
        """Flat index of the product state |n> (x) |label>."""
        if not 0 <= n <= self.n_max:
            raise ValueError(f"photon number {n} outside [0, {self.n_max}]")
        return n * self.n_configs + self.config_index(label)


def _as_square(basis: BasisSpec, mat) -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.shape != (basis.dim, basis.dim):
        raise ValueError(f"matrix shape {m.shape} does not match basis dim {basis.dim}")
    return m


@dataclass(frozen=True)
class Operator:
    """Dense operator on a :class:`BasisSpec`."""

    basis: BasisSpec
    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _as_square(self.basis, self.mat))

    def dag(self) -> "Operator":
        return Operator(self.basis, self.mat.conj().T)

    def _check(self, other: "Operator"):
        if self.basis != other.basis:
            raise ValueError("operators live on different bases")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.mat - other.mat)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.basis, self.mat * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.basis, -self.mat)


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix on a :class:`BasisSpec` (not re-normalized)."""

    basis: BasisSpec
    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _as_square(self.basis, self.mat))

    @classmethod
    def pure(cls, basis: BasisSpec, n: int, label: str) -> "DensityMatrix":
        """|n, label><n, label|."""
        m = np.zeros((basis.dim, basis.dim), dtype=complex)
        k = basis.index(n, label)
        m[k, k] = 1.0
        return cls(basis, m)

    @classmethod
    def diagonal_mixture(cls, basis: BasisSpec, photon_probs, config_probs) -> "DensityMatrix":
        """Product of diagonal photon and configuration distributions."""
        p = np.zeros(basis.n_photon)
        pp = np.asarray(photon_probs, dtype=float)
        if pp.size > basis.n_photon:
            raise ValueError(
                f"photon distribution has {pp.size} entries but basis holds {basis.n_photon} levels"
            )
        p[: pp.size] = pp
        c = np.asarray(config_probs, dtype=float)
        if c.size != basis.n_configs:
            raise ValueError(
                f"{c.size} configuration weights for {basis.n_configs} configurations"
            )
        return cls(basis, np.diag(np.kron(p, c)).astype(complex))


def photon_annihilator(basis: BasisSpec) -> Operator:
    """Cavity annihilator b (x) 1; the creator is its adjoint."""
    a = np.diag(np.sqrt(np.arange(1, basis.n_photon)), 1)
    return Operator(basis, np.kron(a, np.eye(basis.n_configs)))


def transition_operator(basis: BasisSpec, i: str, j: str) -> Operator:
    """Configuration transition |i><j| (x) 1 on the photon space."""
    e = np.zeros((basis.n_configs, basis.n_configs))
    e[basis.config_index(i), basis.config_index(j)] = 1.0
    return Operator(basis, np.kron(np.eye(basis.n_photon), e))


def pair_annihilator(basis: BasisSpec, shell: str) -> Operator:
    """Electron-hole pair annihilator h_shell e_shell on the two-shell dot.

    In the configuration basis {G, Xs, Xp, XX} the s-pair annihilator is
    |G><Xs| + |Xp><XX| and the p-pair annihilator is |G><Xp| + |Xs><XX|:
    the pair is removed whatever the other shell holds.
    """
    if set(DOT_LABELS) - set(basis.config_labels):
        raise ValueError(
            f"pair_annihilator needs the configuration labels {DOT_LABELS}, "
            f"basis has {basis.config_labels}"
        )
    if shell == "s":
        pairs = (("G", "Xs"), ("Xp", "XX"))
    elif shell == "p":
        pairs = (("G", "Xp"), ("Xs", "XX"))
    else:
        raise ValueError(f"shell must be 's' or 'p', got {shell!r}")
    op = transition_operator(basis, *pairs[0])
    return op + transition_operator(basis, *pairs[1])


def tensor(basis: BasisSpec, photon_mat, config_mat) -> Operator:
    """Kronecker product photon (x) configuration in the basis ordering."""
    a = np.asarray(photon_mat, dtype=complex)
    b = np.asarray(config_mat, dtype=complex)
    if a.shape != (basis.n_photon, basis.n_photon):
        raise ValueError(f"photon factor shape {a.shape}, expected {(basis.n_photon,) * 2}")
    if b.shape != (basis.n_configs, basis.n_configs):
        raise ValueError(f"configuration factor shape {b.shape}, expected {(basis.n_configs,) * 2}")
    return Operator(basis, np.kron(a, b))


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    """Tr(rho A)."""
    if rho.basis != op.basis:
        raise ValueError("density matrix and operator live on different bases")
    return complex(np.einsum("ij,ji->", rho.mat, op.mat))


@dataclass(frozen=True)
class HealthReport:
    """Deviations of a density matrix from unit trace, hermiticity, positivity."""

    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float

    def ok(self, trace_tol: float = 1e-8, herm_tol: float = 1e-10, eig_floor: float = -1e-8) -> bool:
        return (
            self.trace_error < trace_tol
            and self.hermiticity_error < herm_tol
            and self.min_eigenvalue >= eig_floor
        )


class HealthError(RuntimeError):
    """Raised when an evolving density matrix fails its health checks."""

    def __init__(self, message: str, report: HealthReport, t: float):
        super().__init__(f"{message} at t={t:.6g}: {report}")
        self.report = report
        self.t = t


def validate_density(rho: DensityMatrix) -> HealthReport:
    """Trace, hermiticity and spectral checks; eigenvalues of the hermitian part."""
    m = rho.mat
    trace_error = abs(m.trace().real - 1.0) + abs(m.trace().imag)
    herm = np.abs(m - m.conj().T).max()
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
    return HealthReport(float(trace_error), float(herm), min_eig)
