"""Pointwise Hermitian forms and curvature tensors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricTensor:
    """Hermitian matrix ``g[i, j] = g_{i jbar}`` at ``point``."""

    point: tuple
    matrix: np.ndarray
    eigenvalues: np.ndarray = field(default=None)
    degenerate: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.eigenvalues is None:
            self.eigenvalues = np.linalg.eigvalsh(hermitian_part(self.matrix))

    @property
    def hermitian_defect(self) -> float:
        M = self.matrix
        return float(np.max(np.abs(M - M.conj().T), initial=0.0))

    def to_dict(self):
        return {
            "point": [[z.real, z.imag] for z in map(complex, self.point)],
            "matrix": complex_matrix_json(self.matrix),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "degenerate": self.degenerate,
        }


@dataclass
class CurvatureTensor:
    """Components ``R[i, j, k, l] = R_{i jbar k lbar}``."""

    point: tuple
    components: np.ndarray
    convention: str = ""

    def symmetry_residual(self) -> float:
        R = self.components
        scale = max(float(np.max(np.abs(R))), 1e-300)
        res = max(
            float(np.max(np.abs(R - R.transpose(2, 1, 0, 3)))),
            float(np.max(np.abs(R - R.transpose(0, 3, 2, 1)))),
            float(np.max(np.abs(np.conj(R) - R.transpose(1, 0, 3, 2)))),
        )
        return res / scale

    def to_dict(self):
        R = self.components
        return {
            "point": [[z.real, z.imag] for z in map(complex, self.point)],
            "components": {f"{i}{j}{k}{l}": [R[i, j, k, l].real, R[i, j, k, l].imag]
                           for i, j, k, l in np.ndindex(R.shape)},
            "convention": self.convention,
        }


def hermitian_part(M):
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def complex_matrix_json(M):
    return [[[complex(x).real, complex(x).imag] for x in row] for row in np.asarray(M)]


def generalized_eigenvalues(A, D):
    """Eigenvalues of Hermitian ``A`` relative to positive diagonal ``D`` (arrays ``(N, m, m)``, ``(N, m)``)."""
    s = 1.0 / np.sqrt(D)
    M = hermitian_part(A) * s[:, :, None] * s[:, None, :]
    return np.linalg.eigvalsh(M)
