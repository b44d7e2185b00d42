"""
Finite-difference check of the analytic training gradients on small random configurations.
Coordinates whose difference points straddle a kink (a JPEG box face or a triangular
basis corner) are resampled with shorter steps and skipped when every step straddles it.
"""
import dataclasses
import logging
import math
import numpy as np
from . import const
from .data_terms import ProblemKind, activeSetSignature, bicubicDownsample
from .dataset import jpegRoundtrip
from .diffusion import Model, StageParams, infer
from .filter_bank import buildDctBasis
from .image_core import addGaussianNoise, crop
from .influence import RbfSpec
from .training import (PreparedSample, TrainScope, TrainingSample, _preparedLossAndGradient,
                       finiteDifferenceGradient, forwardSample, packParams, prepareSamples,
                       unpackParams)

logger = logging.getLogger('tnrd')


@dataclasses.dataclass
class GradientCheckResult:
    problem: ProblemKind
    seed: int
    checked: int
    skipped: int
    maxAbsError: float
    maxRelError: float
    failures: list[int]

    @property
    def passed(self) -> bool:
        return not self.failures


def toySize(problem: ProblemKind, size: int) -> int:
    """ Smallest image size >= 'size' the problem accepts."""
    unit = problem.factor if problem.kind == const.PROBLEM_SISR else \
        const.JPEG_BLOCK if problem.kind == const.PROBLEM_DEBLOCK else 1
    return int(math.ceil(size / unit)) * unit


def randomModel(problem: ProblemKind, m: int, numFilters: int, numStages: int, rbf: RbfSpec,
                rng: np.random.Generator) -> Model:
    basis = buildDctBasis(m)
    stages = [StageParams(math.log(const.INITIAL_LAMBDA) + 0.1 * rng.standard_normal(),
                          rng.standard_normal((numFilters, basis.count)),
                          0.1 * rng.standard_normal((numFilters, rbf.count)))
              for _ in range(numStages)]
    return Model(stages, m, rbf, problem)


def randomSamples(model: Model, size: int, count: int, seed: int,
                  rng: np.random.Generator) -> list[TrainingSample]:
    """ Random observations whose targets lie within unit noise of the model's output,
        which keeps the loss small and the difference quotients accurate.
    """
    problem = model.problem
    size = toySize(problem, size)
    res = []
    for j in range(count):
        gt = rng.uniform(const.INTENSITY_MIN, const.INTENSITY_MAX, size=(size, size))
        box = None
        if problem.kind == const.PROBLEM_DENOISE:
            f = addGaussianNoise(gt, problem.param, seed * 1000 + j)
        elif problem.kind == const.PROBLEM_SISR:
            f = bicubicDownsample(gt, problem.factor)
        else:
            jpeg = jpegRoundtrip(gt, problem.quality)
            f, box = jpeg.decoded, jpeg.box
        target = infer(model, f, box) + rng.standard_normal(gt.shape)
        res.append(TrainingSample(f, target, box))
    return res


def _kinkPoints(rbf: RbfSpec) -> np.ndarray | None:
    if rbf.kind != const.RBF_TRIANGULAR:
        return None
    centers = rbf.centers
    return np.unique(np.concatenate([centers - rbf.gamma, centers, centers + rbf.gamma]))


def _replaced(x: np.ndarray, j: int, value: float) -> np.ndarray:
    res = x.copy()
    res[j] = value
    return res


def _signature(x: np.ndarray, prepared: list[PreparedSample], model: Model,
               scope: TrainScope) -> bytes:
    """ Which side of every kink the forward pass at x lies on."""
    stages = unpackParams(x, model.stages, scope.groups)
    kinks = _kinkPoints(model.rbf)
    parts = []
    for sample in prepared:
        for trace in forwardSample(sample, stages, model.basis, model.rbf):
            if sample.inp.box is not None:
                parts.append(activeSetSignature(crop(trace.preProx, sample.inp.border),
                                                sample.inp.box))
            if kinks is not None:
                for z in trace.responses:
                    parts.append(np.searchsorted(kinks, z).tobytes())
    return b''.join(parts)


def gradientCheck(problem: ProblemKind, seed: int = 0, size: int = 8, m: int = 3,
                  numFilters: int = 2, numStages: int = 1, numSamples: int = 1,
                  rbfKind: str = const.RBF_GAUSSIAN, step: float = const.FD_STEP,
                  rtol: float = const.GRADCHECK_RTOL,
                  atol: float = const.GRADCHECK_ATOL) -> GradientCheckResult:
    """ Compare the analytic joint-loss gradient of a random configuration with
        central finite differences, coordinate by coordinate.
    Args:
        problem (ProblemKind): restoration problem
        seed (int, optional): configuration seed. Defaults to 0.
        size (int, optional): image size, rounded up to what the problem accepts. Defaults to 8.
        m (int, optional): kernel size. Defaults to 3.
        numFilters (int, optional): filters per stage. Defaults to 2.
        numStages (int, optional): number of stages. Defaults to 1.
        numSamples (int, optional): number of training samples. Defaults to 1.
        rbfKind (str, optional): basis kind. Defaults to gaussian.
        step (float, optional): difference step. Defaults to 1e-5.
        rtol (float, optional): relative tolerance. Defaults to 1e-5.
        atol (float, optional): absolute tolerance. Defaults to 1e-7.
    Returns:
        GradientCheckResult: errors and failing coordinates
    """
    rng = np.random.default_rng(seed)
    rbf = RbfSpec(kind=rbfKind)
    model = randomModel(problem, m, numFilters, numStages, rbf, rng)
    samples = randomSamples(model, size, numSamples, seed, rng)
    prepared = prepareSamples(model, samples)
    scope = TrainScope()
    x = packParams(model.stages)
    _, analytic = _preparedLossAndGradient(x, prepared, model, scope)

    def lossAt(v: np.ndarray) -> float:
        return _preparedLossAndGradient(v, prepared, model, scope)[0]

    base = _signature(x, prepared, model, scope)

    def straddles(j: int, h: float) -> bool:
        for shift in (h, -h):
            xp = x.copy()
            xp[j] += shift
            if _signature(xp, prepared, model, scope) != base:
                return True
        return False

    fd = finiteDifferenceGradient(lossAt, x, step)
    checked, skipped, failures = 0, 0, []
    maxAbs, maxRel = 0.0, 0.0
    for j in range(x.size):
        h = step
        for _ in range(const.GRADCHECK_RESAMPLES + 1):
            if not straddles(j, h):
                break
            h /= const.GRADCHECK_STEP_SHRINK
        else:
            skipped += 1
            logger.warning(f'coordinate {j} straddles a kink at every step tried, skipped')
            continue
        if h != step:
            logger.info(f'coordinate {j} resampled with step {h:.1e}')
            fd[j] = finiteDifferenceGradient(lambda t: lossAt(_replaced(x, j, t[0])), [x[j]], h)[0]
        err = abs(analytic[j] - fd[j])
        scale = max(abs(analytic[j]), abs(fd[j]))
        maxAbs = max(maxAbs, err)
        if scale > 0:
            maxRel = max(maxRel, err / scale)
        if err > atol + rtol * scale:
            failures.append(j)
        checked += 1
    res = GradientCheckResult(problem, seed, checked, skipped, maxAbs, maxRel, failures)
    logger.info(f'gradient check {problem}, seed {seed}, T={numStages}: {checked} coordinates, '
                f'{skipped} skipped, max abs error {maxAbs:.3e}, max rel error {maxRel:.3e}, '
                f'{len(failures)} failures')
    return res
