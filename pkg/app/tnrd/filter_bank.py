"""
Zero-mean DCT kernel basis and unit-norm filters built from coefficient vectors:
    k = sum_r omega_r * b_r / ||omega||
"""
import dataclasses
import functools
import numpy as np
import numpy.typing as npt
from scipy import fft
from . import const
from .exceptions import DegenerateFilterError, InvalidArgumentError
from .image_core import Kernel

FilterAtom = npt.NDArray[np.float64]


@dataclasses.dataclass(frozen=True, eq=False)
class DctBasis:
    """ m*m - 1 separable DCT-II atoms without the constant one, in zig-zag frequency order.
        'matrix' holds the flattened atoms as columns, shape (m*m, m*m - 1).
    """
    m: int
    atoms: npt.NDArray[np.float64]
    matrix: npt.NDArray[np.float64]

    @property
    def count(self) -> int:
        return self.atoms.shape[0]


def zigzagOrder(m: int) -> list[tuple[int, int]]:
    """ (row, col) frequency pairs in JPEG zig-zag order, starting with (0, 0)."""
    pairs = [(u, v) for u in range(m) for v in range(m)]
    return sorted(pairs, key=lambda p: (p[0] + p[1], p[0] if (p[0] + p[1]) % 2 else -p[0]))


@functools.lru_cache(maxsize=None)
def buildDctBasis(m: int) -> DctBasis:
    """ Build the zero-mean DCT basis of m x m kernels.
    Args:
        m (int): odd kernel size, 3 <= m <= 15
    Raises:
        InvalidArgumentError: even or out-of-range m
    Returns:
        DctBasis: immutable basis shared between callers
    """
    if m % 2 == 0 or not const.KERNEL_MIN_SIZE <= m <= const.KERNEL_MAX_SIZE:
        raise InvalidArgumentError(
            f'kernel size must be odd and in [{const.KERNEL_MIN_SIZE}, {const.KERNEL_MAX_SIZE}], '
            f'got {m}')
    # rows of dct1d are the orthonormal 1D DCT-II vectors
    dct1d = fft.dct(np.eye(m), type=2, norm='ortho', axis=0)
    atoms = np.stack([np.outer(dct1d[u], dct1d[v]) for u, v in zigzagOrder(m)[1:]])
    matrix = atoms.reshape(atoms.shape[0], m * m).T.copy()
    atoms.setflags(write=False)
    matrix.setflags(write=False)
    return DctBasis(m=m, atoms=atoms, matrix=matrix)


def _checkOmega(omega: FilterAtom, basis: DctBasis) -> float:
    if omega.shape != (basis.count,):
        raise InvalidArgumentError(
            f'omega must have {basis.count} coefficients, got shape {omega.shape}')
    norm = float(np.linalg.norm(omega))
    if norm < const.EPS:
        raise DegenerateFilterError(f'filter coefficients have vanishing norm {norm:.3e}')
    return norm


def materialize(omega: FilterAtom, basis: DctBasis) -> Kernel:
    """ Unit-norm, zero-mean kernel of the coefficient vector 'omega'.
    Args:
        omega (FilterAtom): basis coefficients
        basis (DctBasis): kernel basis
    Raises:
        DegenerateFilterError: ||omega|| < 1e-12
    Returns:
        Kernel: (m, m) kernel
    """
    omega = np.asarray(omega, dtype=np.float64)
    norm = _checkOmega(omega, basis)
    return (basis.matrix @ omega / norm).reshape(basis.m, basis.m)


def materializeJacobianApply(omega: FilterAtom, basis: DctBasis, dk: Kernel) -> FilterAtom:
    """ Map a kernel gradient dL/dk to the coefficient gradient dL/domega
        (adjoint of the normalization's Jacobian). The result is orthogonal to omega.
    Args:
        omega (FilterAtom): basis coefficients
        basis (DctBasis): kernel basis
        dk (Kernel): gradient with respect to the materialized kernel
    Raises:
        DegenerateFilterError: ||omega|| < 1e-12
    Returns:
        FilterAtom: gradient with respect to omega
    """
    omega = np.asarray(omega, dtype=np.float64)
    norm = _checkOmega(omega, basis)
    dkVec = np.asarray(dk, dtype=np.float64).ravel()
    k = basis.matrix @ omega / norm
    return (basis.matrix.T @ dkVec - float(np.dot(k, dkVec)) * omega / norm) / norm


def oneHot(index: int, basis: DctBasis) -> FilterAtom:
    """ Coefficients selecting a single basis atom."""
    omega = np.zeros(basis.count)
    omega[index] = 1.0
    return omega
