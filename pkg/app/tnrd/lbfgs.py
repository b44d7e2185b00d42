"""
Limited-memory BFGS with a strong-Wolfe line search.
The optimizer keeps the best iterate seen and stops gracefully when the line search fails.
"""
import collections
import dataclasses
import logging
import typing
import warnings
import numpy as np
import numpy.typing as npt
from scipy import optimize
from . import const
from .exceptions import OptimizationError

logger = logging.getLogger('tnrd')
progressLogger = logging.getLogger('tnrd.progress')

Vector = npt.NDArray[np.float64]
Objective = typing.Callable[[Vector], tuple[float, Vector]]

DEFAULT_GTOL = 1e-10  # gradient norm small enough to stop
CURVATURE_EPS = 1e-10  # relative threshold of s'y for accepting a correction pair
CACHE_SIZE = 16
LINE_SEARCH_MAXITER = 20


@dataclasses.dataclass
class LbfgsResult:
    x: Vector
    fun: float
    grad: Vector
    nit: int
    nfev: int
    trace: list[float]  # best objective after every iteration, starting at x0
    message: str


class _CachedObjective:
    """ Objective wrapper remembering recent evaluations; line searches ask for value and
        gradient separately at the same points.
    """

    def __init__(self, objective: Objective) -> None:
        self.objective = objective
        self.cache: collections.OrderedDict[bytes, tuple[float, Vector]] = collections.OrderedDict()
        self.nfev = 0

    def __call__(self, x: Vector) -> tuple[float, Vector]:
        key = np.asarray(x, dtype=np.float64).tobytes()
        if key in self.cache:
            self.cache.move_to_end(key)
            return self.cache[key]
        f, g = self.objective(np.array(x, dtype=np.float64, copy=True))
        f, g = float(f), np.asarray(g, dtype=np.float64)
        self.nfev += 1
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise OptimizationError(
                f'non-finite objective or gradient at evaluation {self.nfev}: f={f}, '
                f'{np.count_nonzero(~np.isfinite(g))} non-finite gradient entries')
        self.cache[key] = (f, g)
        if len(self.cache) > CACHE_SIZE:
            self.cache.popitem(last=False)
        return f, g

    def fun(self, x: Vector) -> float:
        return self(x)[0]

    def jac(self, x: Vector) -> Vector:
        return self(x)[1]


def _twoLoop(g: Vector, pairs: collections.deque) -> Vector:
    """ Product of the inverse Hessian approximation with g."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(np.dot(s, q))
        q -= a * y
        alphas.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        q *= float(np.dot(s, y)) / float(np.dot(y, y))
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def lbfgsMinimize(objective: Objective, x0: npt.ArrayLike, iters: int = const.LBFGS_ITERS,
                  memory: int = const.LBFGS_MEMORY, gtol: float = DEFAULT_GTOL,
                  c1: float = const.WOLFE_C1, c2: float = const.WOLFE_C2,
                  logEvery: int = 1) -> LbfgsResult:
    """ Minimizes a smooth objective.
    Args:
        objective (Objective): x -> (value, gradient)
        x0 (npt.ArrayLike): starting point
        iters (int, optional): maximum number of iterations. Defaults to 200.
        memory (int, optional): number of correction pairs. Defaults to 10.
        gtol (float, optional): stop when the gradient norm drops to it. Defaults to 1e-10.
        c1 (float, optional): sufficient decrease constant. Defaults to 1e-4.
        c2 (float, optional): curvature constant. Defaults to 0.9.
        logEvery (int, optional): progress line every 'logEvery' iterations. Defaults to 1.
    Raises:
        OptimizationError: non-finite objective or gradient
    Returns:
        LbfgsResult: best iterate seen
    """
    if iters < 0 or memory < 1:
        raise OptimizationError(f'bad optimizer settings: {iters=}, {memory=}')
    cached = _CachedObjective(objective)
    x = np.array(x0, dtype=np.float64, copy=True).ravel()
    f, g = cached(x)
    best = (f, x.copy(), g.copy())
    trace = [f]
    pairs: collections.deque = collections.deque(maxlen=memory)
    oldOld = f + float(np.linalg.norm(g)) / 2
    message = 'iteration limit reached'
    nit = 0
    for nit in range(1, iters + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            message = 'gradient norm below tolerance'
            nit -= 1
            break
        d = -_twoLoop(g, pairs)
        if float(np.dot(d, g)) >= 0:
            pairs.clear()
            d = -g
        with warnings.catch_warnings():
            # LineSearchWarning is a RuntimeWarning; failures are reported below
            warnings.simplefilter('ignore', RuntimeWarning)
            alpha, *_ = optimize.line_search(cached.fun, cached.jac, x, d, gfk=g, old_fval=f,
                                             old_old_fval=oldOld, c1=c1, c2=c2,
                                             maxiter=LINE_SEARCH_MAXITER)
            if alpha is None and pairs:
                logger.warning(f'line search failed at iteration {nit}, restarting from steepest descent')
                pairs.clear()
                d = -g
                alpha, *_ = optimize.line_search(cached.fun, cached.jac, x, d, gfk=g, old_fval=f,
                                                 old_old_fval=oldOld, c1=c1, c2=c2,
                                                 maxiter=LINE_SEARCH_MAXITER)
        if alpha is None:
            logger.warning(f'line search failed at iteration {nit}, stopping')
            message = 'line search failed'
            nit -= 1
            break
        xNew = x + alpha * d
        fNew, gNew = cached(xNew)
        s, y = xNew - x, gNew - g
        sy = float(np.dot(s, y))
        if sy > CURVATURE_EPS * float(np.dot(y, y)):
            pairs.append((s, y, 1.0 / sy))
        oldOld, x, f, g = f, xNew, fNew, gNew
        if f < best[0]:
            best = (f, x.copy(), g.copy())
        trace.append(best[0])
        if logEvery and nit % logEvery == 0:
            progressLogger.info(f'iter={nit} loss={f:.6e} gnorm={float(np.linalg.norm(g)):.3e} '
                                f'step={alpha:.3e}')
    return LbfgsResult(x=best[1], fun=best[0], grad=best[2], nit=nit, nfev=cached.nfev,
                       trace=trace, message=message)
