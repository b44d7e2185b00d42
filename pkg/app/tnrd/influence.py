"""
Influence functions phi as weighted sums of radial basis functions on a fixed grid
of equidistant centers:
    phi(z) = sum_j w_j * basis((z - mu_j) / gamma)
together with their derivative phi' and the penalty rho (antiderivative, rho(0) = 0).
"""
import dataclasses
import logging
import math
import typing
import numpy as np
import numpy.typing as npt
from scipy import linalg, special
from . import const
from .exceptions import InvalidArgumentError, NumericalRankError

InfluenceFunction = npt.NDArray[np.float64]

logger = logging.getLogger('tnrd')


@dataclasses.dataclass(frozen=True)
class RbfSpec:
    """ Basis kind and the center grid (min, step, count) with the common scale gamma."""
    kind: str = const.RBF_GAUSSIAN
    min: float = const.RBF_DEFAULT_MIN
    step: float = const.RBF_DEFAULT_STEP
    count: int = const.RBF_DEFAULT_COUNT
    gamma: float = const.RBF_DEFAULT_GAMMA

    def __post_init__(self) -> None:
        if self.kind not in const.RBF_KINDS:
            raise InvalidArgumentError(f'Unknown RBF kind: {self.kind}')
        if self.count < 2 or self.step <= 0 or self.gamma <= 0:
            raise InvalidArgumentError(
                f'RBF grid needs count >= 2, step > 0, gamma > 0; got {self.count}, '
                f'{self.step}, {self.gamma}')

    @property
    def centers(self) -> npt.NDArray[np.float64]:
        return self.min + self.step * np.arange(self.count)

    @property
    def max(self) -> float:
        return self.min + self.step * (self.count - 1)


def evalPhiWeightGradient(spec: RbfSpec, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """ Basis values at z, i.e. dphi/dw_j; shape z.shape + (count,).
    Args:
        spec (RbfSpec): basis kind and grid
        z (npt.ArrayLike): evaluation points
    Returns:
        npt.NDArray[np.float64]: basis matrix rows
    """
    d = (np.asarray(z, dtype=np.float64)[..., None] - spec.centers) / spec.gamma
    if spec.kind == const.RBF_GAUSSIAN:
        return np.exp(-0.5 * d * d)
    return np.maximum(0.0, 1.0 - np.abs(d))


def _basisDerivative(spec: RbfSpec, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    d = (np.asarray(z, dtype=np.float64)[..., None] - spec.centers) / spec.gamma
    if spec.kind == const.RBF_GAUSSIAN:
        return -d / spec.gamma * np.exp(-0.5 * d * d)
    # left limit at the kinks d = -1, 0, 1
    rising = (d > -1.0) & (d <= 0.0)
    falling = (d > 0.0) & (d <= 1.0)
    return (rising.astype(np.float64) - falling.astype(np.float64)) / spec.gamma


def _basisIntegral(spec: RbfSpec, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """ Antiderivatives of the basis functions (up to a per-center constant)."""
    d = (np.asarray(z, dtype=np.float64)[..., None] - spec.centers) / spec.gamma
    if spec.kind == const.RBF_GAUSSIAN:
        return spec.gamma * math.sqrt(math.pi / 2.0) * special.erf(d / math.sqrt(2.0))
    d = np.clip(d, -1.0, 1.0)
    return spec.gamma * np.where(d <= 0.0, 0.5 * (1.0 + d) ** 2, 1.0 - 0.5 * (1.0 - d) ** 2)


def _checkWeights(w: InfluenceFunction, spec: RbfSpec) -> InfluenceFunction:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (spec.count,):
        raise InvalidArgumentError(f'expected {spec.count} RBF weights, got shape {w.shape}')
    return w


def evalPhi(w: InfluenceFunction, spec: RbfSpec, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """ Influence function values phi(z), elementwise.
    Args:
        w (InfluenceFunction): RBF weights
        spec (RbfSpec): basis kind and grid
        z (npt.ArrayLike): evaluation points, any shape
    Returns:
        npt.NDArray[np.float64]: phi(z) shaped like z
    """
    return evalPhiWeightGradient(spec, z) @ _checkWeights(w, spec)


def evalPhiPrime(w: InfluenceFunction, spec: RbfSpec, z: npt.ArrayLike) \
        -> npt.NDArray[np.float64]:
    """ Derivative phi'(z); triangular kinks take the left limit."""
    return _basisDerivative(spec, z) @ _checkWeights(w, spec)


def evalRho(w: InfluenceFunction, spec: RbfSpec, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """ Penalty rho with rho' = phi and rho(0) = 0.
    Args:
        w (InfluenceFunction): RBF weights
        spec (RbfSpec): basis kind and grid
        z (npt.ArrayLike): evaluation points, any shape
    Returns:
        npt.NDArray[np.float64]: rho(z) shaped like z
    """
    w = _checkWeights(w, spec)
    return (_basisIntegral(spec, z) - _basisIntegral(spec, 0.0)) @ w


def fitGrid(spec: RbfSpec, density: int = const.RBF_FIT_DENSITY) -> npt.NDArray[np.float64]:
    """ Equidistant sample points covering the centers with 'density' samples per step."""
    return np.linspace(spec.min, spec.max, (spec.count - 1) * density + 1)


def fitWeights(target: typing.Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]],
               spec: RbfSpec, grid: npt.ArrayLike | None = None) -> InfluenceFunction:
    """ Least-squares RBF weights approximating 'target' on the sample points.
    Args:
        target (Callable): vectorized scalar function
        spec (RbfSpec): basis kind and grid
        grid (npt.ArrayLike | None, optional): sample points, at least 4 per center step.
            Defaults to fitGrid(spec).
    Raises:
        InvalidArgumentError: grid too sparse
        NumericalRankError: the basis matrix is rank-deficient on the grid
    Returns:
        InfluenceFunction: weights
    """
    grid = fitGrid(spec) if grid is None else np.asarray(grid, dtype=np.float64).ravel()
    inside = np.count_nonzero((grid >= spec.min) & (grid <= spec.max))
    if inside < 4 * (spec.count - 1):
        raise InvalidArgumentError(
            f'fit grid has {inside} samples over {spec.count - 1} center steps, need >= 4 per step')
    matrix = evalPhiWeightGradient(spec, grid)
    values = np.asarray(target(grid), dtype=np.float64)
    w, _, rank, _ = linalg.lstsq(matrix, values, lapack_driver='gelsd')
    if rank < spec.count:
        raise NumericalRankError(f'RBF basis matrix has rank {rank} < {spec.count}')
    residual = float(np.max(np.abs(matrix @ w - values)))
    logger.debug(f'RBF fit: {spec.kind=}, {spec.count=}, max residual {residual:.3e}')
    return w
