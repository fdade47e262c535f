"""Process tomography in the two-qubit Pauli basis.

Basis order is II, IX, IY, IZ, XI, ..., ZZ with the first letter acting on
qubit 1. The chi matrix is defined by Lambda(rho) = sum_ab chi_ab P_a rho P_b
and is computed with qutip's linear-inversion tomography from the process
superoperator.
"""

import itertools
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import qutip

from .errors import NonUnitaryError

OP_BASIS = [[qutip.qeye(2), qutip.sigmax(), qutip.sigmay(), qutip.sigmaz()]] * 2

PAULI_LABELS: Tuple[str, ...] = tuple(a + b for a, b in itertools.product("IXYZ", repeat=2))
PAULI_BASIS: List[np.ndarray] = [qutip.tensor(a, b).full()
                                 for a, b in itertools.product(OP_BASIS[0], OP_BASIS[1])]

CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class ChiMatrix:
    """16 x 16 process matrix over PAULI_LABELS."""
    matrix: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def entry(self, row: str, column: str) -> complex:
        return complex(self.matrix[PAULI_LABELS.index(row), PAULI_LABELS.index(column)])

    def support(self, tol: float = 1e-9) -> List[str]:
        """Labels whose diagonal entry exceeds tol."""
        diagonal = np.abs(np.diag(self.matrix))
        return [label for label, value in zip(PAULI_LABELS, diagonal) if value > tol]


def chi_from_operator(u: np.ndarray) -> ChiMatrix:
    """Chi of the map rho -> u rho u^dagger, without a unitarity check."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 operator, got shape {u.shape}")
    kraus = qutip.Qobj(u, dims=[[2, 2], [2, 2]])
    superop = qutip.spre(kraus) * qutip.spost(kraus.dag())
    # qpt stacks columns, so its [n, m] entry weighs spre(E_m) spost(E_n^dagger)
    return ChiMatrix(matrix=np.asarray(qutip.qpt(superop, OP_BASIS)).T)


def qpt_chi(u: np.ndarray) -> ChiMatrix:
    """Chi matrix of a two-qubit unitary.

    Raises:
        NonUnitaryError: If u deviates from unitarity by more than 1e-9
    """
    u = np.asarray(u, dtype=complex)
    deviation = np.abs(u.conj().T @ u - np.eye(4)).max() if u.shape == (4, 4) else np.inf
    if deviation > 1e-9:
        raise NonUnitaryError(f"operator is not unitary (deviation {deviation:.3g})")
    return chi_from_operator(u)


def apply_chi(chi: ChiMatrix, rho: np.ndarray) -> np.ndarray:
    """Lambda(rho) = sum_ab chi_ab P_a rho P_b."""
    out = np.zeros((4, 4), dtype=complex)
    for a, pa in enumerate(PAULI_BASIS):
        for b, pb in enumerate(PAULI_BASIS):
            if chi.matrix[a, b] != 0:
                out += chi.matrix[a, b] * pa @ rho @ pb
    return out


def process_fidelity(chi: ChiMatrix, chi_ideal: ChiMatrix) -> float:
    """Tr(chi_ideal chi), exact when chi_ideal has rank one."""
    value = float(np.real(np.trace(chi_ideal.matrix @ chi.matrix)))
    return min(1.0, max(0.0, value))
