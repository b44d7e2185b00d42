"""
Loss, analytic gradients and the training loops.

Gradients are computed by back-propagation through the stages: every stage keeps its
StageTrace on the forward pass and stageBackward applies the transpose of the stage's
Jacobian on the way back. Parameters are optimized as a flat vector holding, for every
trained stage, lambdaRaw, then all filter coefficients, then all influence weights
(restricted to the trained parameter groups).
"""
import dataclasses
import functools
import logging
import math
import typing
import numpy as np
import numpy.typing as npt
from . import const
from .data_terms import (ProblemKind, QuantBox, bicubicDownsample, bicubicDownsampleAdjoint,
                         proxDeblockAdjoint)
from .diffusion import (Model, StageInput, StageParams, StageTrace, initialEstimate,
                        prepareInput, stageForwardTrace)
from .exceptions import InvalidArgumentError, ProblemMismatchError
from .filter_bank import DctBasis, buildDctBasis, materializeJacobianApply, oneHot
from .image_core import (Image, checkImage, checkSameShape, convolveAdjoint, crop, embed,
                         kernelGradient, padSymmetric, rotate180)
from .influence import RbfSpec, evalPhiPrime, evalPhiWeightGradient, fitWeights
from .lbfgs import lbfgsMinimize
from .workers import mapInWorkers

logger = logging.getLogger('tnrd')

Vector = npt.NDArray[np.float64]


@dataclasses.dataclass(frozen=True, eq=False)
class TrainingSample:
    """ Observation f (low-res for sisr, decoded for deblock) and ground truth uGt;
        box is the deblock constraint set (derived from f if missing).
    """
    f: Image
    uGt: Image
    box: QuantBox | None = None


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    scheme: str = const.SCHEME_GREEDY_JOINT
    lbfgsIters: int = const.LBFGS_ITERS
    lbfgsMemory: int = const.LBFGS_MEMORY
    seed: int = 0  # seed of the random initialization
    workers: int = 1
    groups: tuple[str, ...] = const.GROUPS
    tied: bool = False
    logEvery: int = 1
    init: str = const.INIT_PLAIN

    def __post_init__(self) -> None:
        if self.scheme not in const.SCHEMES:
            raise InvalidArgumentError(f'Unknown training scheme: {self.scheme}')
        if self.init not in const.INITS:
            raise InvalidArgumentError(f'Unknown initialization: {self.init}')
        if self.lbfgsIters < 1 or self.lbfgsMemory < 1 or self.workers < 1:
            raise InvalidArgumentError(
                f'iterations, memory and workers must be >= 1, got {self.lbfgsIters}, '
                f'{self.lbfgsMemory}, {self.workers}')
        _checkGroups(self.groups)


@dataclasses.dataclass(frozen=True)
class TrainScope:
    """ What a loss evaluation optimizes: the parameter groups, all stages tied to one
        parameter set, or a single stage (greedy) whose own output is scored.
    """
    groups: tuple[str, ...] = const.GROUPS
    tied: bool = False
    stage: int | None = None


@dataclasses.dataclass
class StageGradient:
    """ Gradient of the loss with respect to one stage's parameters."""
    lambdaRaw: float
    filters: npt.NDArray[np.float64]
    influences: npt.NDArray[np.float64]

    def __iadd__(self, other: 'StageGradient') -> 'StageGradient':
        self.lambdaRaw += other.lambdaRaw
        self.filters = self.filters + other.filters
        self.influences = self.influences + other.influences
        return self

    def norms(self) -> dict[str, float]:
        return {const.GROUP_LAMBDA: abs(self.lambdaRaw),
                const.GROUP_FILTERS: float(np.linalg.norm(self.filters)),
                const.GROUP_INFLUENCES: float(np.linalg.norm(self.influences))}


@dataclasses.dataclass(frozen=True, eq=False)
class PreparedSample:
    """ Sample ready for the stages: observation on the canvas, starting canvas, ground truth."""
    inp: StageInput
    start: Image
    uGt: Image


def _checkGroups(groups: typing.Iterable[str]) -> None:
    groups = tuple(groups)
    if not groups or any(g not in const.GROUPS for g in groups):
        raise InvalidArgumentError(f'parameter groups must be a non-empty subset of {const.GROUPS}, '
                                   f'got {groups}')


def loss(uOut: Image, uGt: Image) -> float:
    """ Quadratic loss 1/2 ||uOut - uGt||^2."""
    checkSameShape(uOut, uGt)
    return 0.5 * float(np.sum((uOut - uGt) ** 2))


def packParams(stages: typing.Sequence[StageParams | StageGradient],
               groups: typing.Iterable[str] = const.GROUPS) -> Vector:
    """ Flatten stage parameters (or gradients) of the selected groups.
    Args:
        stages (Sequence[StageParams | StageGradient]): stages in order
        groups (Iterable[str], optional): parameter groups. Defaults to all.
    Returns:
        Vector: per stage lambdaRaw, filters row by row, influences row by row
    """
    groups = tuple(groups)
    _checkGroups(groups)
    chunks = []
    for s in stages:
        if const.GROUP_LAMBDA in groups:
            chunks.append(np.array([s.lambdaRaw], dtype=np.float64))
        if const.GROUP_FILTERS in groups:
            chunks.append(np.asarray(s.filters, dtype=np.float64).ravel())
        if const.GROUP_INFLUENCES in groups:
            chunks.append(np.asarray(s.influences, dtype=np.float64).ravel())
    return np.concatenate(chunks) if chunks else np.zeros(0)


def unpackParams(x: npt.ArrayLike, template: typing.Sequence[StageParams],
                 groups: typing.Iterable[str] = const.GROUPS) -> list[StageParams]:
    """ Inverse of packParams: groups outside 'groups' are copied from 'template'.
    Raises:
        InvalidArgumentError: vector length doesn't fit the template
    """
    groups = tuple(groups)
    _checkGroups(groups)
    x = np.asarray(x, dtype=np.float64).ravel()
    expected = packParams(template, groups).size
    if x.size != expected:
        raise InvalidArgumentError(f'parameter vector has {x.size} entries, expected {expected}')
    res, pos = [], 0
    for s in template:
        new = s.copy()
        if const.GROUP_LAMBDA in groups:
            new.lambdaRaw = float(x[pos])
            pos += 1
        if const.GROUP_FILTERS in groups:
            new.filters = x[pos:pos + s.filters.size].reshape(s.filters.shape).copy()
            pos += s.filters.size
        if const.GROUP_INFLUENCES in groups:
            new.influences = x[pos:pos + s.influences.size].reshape(s.influences.shape).copy()
            pos += s.influences.size
        res.append(new)
    return res


def stageBackward(trace: StageTrace, s: StageParams, inp: StageInput, basis: DctBasis,
                  rbf: RbfSpec, gradOut: Image) -> tuple[Image, StageGradient]:
    """ Transpose of the stage update's Jacobian applied to 'gradOut'.
    Args:
        trace (StageTrace): forward values of this stage
        s (StageParams): stage parameters
        inp (StageInput): prepared observation
        basis (DctBasis): filter basis
        rbf (RbfSpec): influence function grid
        gradOut (Image): dL/du_t on the canvas
    Returns:
        tuple[Image, StageGradient]: dL/du_{t-1} and the parameter gradients
    """
    boundary, m, b = inp.boundary, basis.m, inp.border
    e = np.array(gradOut, dtype=np.float64, copy=True)
    if inp.problem.kind == const.PROBLEM_DEBLOCK:
        e[b:e.shape[0] - b, b:e.shape[1] - b] = proxDeblockAdjoint(
            crop(trace.preProx, b), inp.box, crop(gradOut, b))

    gradU = e.copy()
    gradLambda = -float(np.sum(e * trace.reaction))
    if inp.problem.kind == const.PROBLEM_DENOISE:
        gradU -= s.lam * e
    elif inp.problem.kind == const.PROBLEM_SISR:
        inner = crop(e, b)
        factor = inp.problem.factor
        normal = bicubicDownsampleAdjoint(bicubicDownsample(inner, factor), factor, inner.shape)
        gradU -= embed(s.lam * normal, b)

    gradFilters = np.zeros_like(s.filters)
    gradInfluences = np.zeros_like(s.influences)
    for i, (k, z, phi) in enumerate(zip(trace.kernels, trace.responses, trace.phis)):
        kbar = rotate180(k)
        g = convolveAdjoint(e, kbar, boundary)
        gradInfluences[i] = -np.tensordot(g, evalPhiWeightGradient(rbf, z), axes=([0, 1], [0, 1]))
        h = evalPhiPrime(s.influences[i], rbf, z) * g
        gradU -= convolveAdjoint(h, k, boundary)
        # k enters directly and, rotated, through the second convolution
        dk = -kernelGradient(trace.uPrev, h, m, boundary) \
            - rotate180(kernelGradient(phi, e, m, boundary))
        gradFilters[i] = materializeJacobianApply(s.filters[i], basis, dk)
    return gradU, StageGradient(gradLambda, gradFilters, gradInfluences)


def prepareSamples(model: Model, samples: typing.Sequence[TrainingSample]) -> list[PreparedSample]:
    """ Pad every sample's initial estimate and observation for the model's canvas.
    Raises:
        InvalidArgumentError: no samples
        ProblemMismatchError: observation and ground truth don't fit the problem
    """
    if not samples:
        raise InvalidArgumentError('at least one training sample is needed')
    res = []
    for i, sample in enumerate(samples):
        f, uGt = checkImage(sample.f, 'observation'), checkImage(sample.uGt, 'ground truth')
        expected = f.shape
        if model.problem.kind == const.PROBLEM_SISR:
            expected = (f.shape[0] * model.problem.factor, f.shape[1] * model.problem.factor)
        if uGt.shape != expected:
            raise ProblemMismatchError(
                f'sample {i}: ground truth {uGt.shape} does not fit observation {f.shape} '
                f'for {model.problem}')
        inp = prepareInput(model.problem, f, model.padBorder, sample.box)
        start = padSymmetric(initialEstimate(model.problem, f), model.padBorder)
        res.append(PreparedSample(inp, start, uGt))
    return res


def forwardSample(sample: PreparedSample, stages: typing.Sequence[StageParams], basis: DctBasis,
                  rbf: RbfSpec) -> list[StageTrace]:
    traces, u = [], sample.start
    for s in stages:
        trace = stageForwardTrace(u, s, sample.inp, basis, rbf)
        traces.append(trace)
        u = trace.output
    return traces


def advanceSamples(prepared: typing.Sequence[PreparedSample], stages: typing.Sequence[StageParams],
                   basis: DctBasis, rbf: RbfSpec) -> list[PreparedSample]:
    """ Move every sample's starting canvas through frozen stages."""
    res = []
    for sample in prepared:
        traces = forwardSample(sample, stages, basis, rbf)
        start = traces[-1].output if traces else sample.start
        res.append(PreparedSample(sample.inp, start, sample.uGt))
    return res


def _sampleLossAndGradient(sample: PreparedSample, stages: typing.Sequence[StageParams],
                           basis: DctBasis, rbf: RbfSpec) -> tuple[float, list[StageGradient]]:
    traces = forwardSample(sample, stages, basis, rbf)
    b = sample.inp.border
    diff = crop(traces[-1].output, b) - sample.uGt
    e = embed(diff, b)
    grads = []
    for s, trace in zip(reversed(stages), reversed(traces)):
        e, grad = stageBackward(trace, s, sample.inp, basis, rbf, e)
        grads.append(grad)
    grads.reverse()
    return 0.5 * float(np.sum(diff ** 2)), grads


def _scopeTemplate(model: Model, scope: TrainScope) -> list[StageParams]:
    if scope.stage is not None:
        if not 0 <= scope.stage < model.numStages:
            raise InvalidArgumentError(f'stage index {scope.stage} out of range')
        return [model.stages[scope.stage]]
    if scope.tied:
        return [model.stages[0]]
    return model.stages


def _preparedLossAndGradient(x: Vector, prepared: typing.Sequence[PreparedSample], model: Model,
                             scope: TrainScope, workers: int = 1) -> tuple[float, Vector]:
    """ Loss and gradient over samples whose starting canvases already went through
        the stages preceding the scope.
    """
    stages = unpackParams(x, _scopeTemplate(model, scope), scope.groups)
    if scope.tied and scope.stage is None:
        stages = stages * model.numStages
    job = functools.partial(_sampleLossAndGradient, stages=stages, basis=model.basis, rbf=model.rbf)
    results = mapInWorkers(job, prepared, workers)

    # fixed sample order for bit-stable sums
    total = 0.0
    grads = None
    for value, sampleGrads in results:
        total += value
        if scope.tied and scope.stage is None:
            merged = sampleGrads[0]
            for g in sampleGrads[1:]:
                merged += g
            sampleGrads = [merged]
        vec = packParams(sampleGrads, scope.groups)
        grads = vec if grads is None else grads + vec
    return total, grads


def lossAndGradient(x: npt.ArrayLike, samples: typing.Sequence[TrainingSample], model: Model,
                    scope: TrainScope = TrainScope(), workers: int = 1) -> tuple[float, Vector]:
    """ Total loss over samples and its gradient with respect to the packed parameters.
    Args:
        x (npt.ArrayLike): packed parameters of the scope
        samples (Sequence[TrainingSample]): training pairs
        model (Model): model supplying the configuration and the parameters outside the scope
        scope (TrainScope, optional): joint (default), tied or single stage (greedy)
        workers (int, optional): parallel per-sample workers. Defaults to 1.
    Returns:
        tuple[float, Vector]: loss and gradient
    """
    prepared = prepareSamples(model, samples)
    if scope.stage is not None:
        prepared = advanceSamples(prepared, model.stages[:scope.stage], model.basis, model.rbf)
    return _preparedLossAndGradient(np.asarray(x, dtype=np.float64), prepared, model, scope, workers)


def trainingLoss(model: Model, samples: typing.Sequence[TrainingSample], workers: int = 1) -> float:
    """ Loss of the model's final output summed over samples."""
    x = packParams(model.stages)
    return lossAndGradient(x, samples, model, TrainScope(), workers)[0]


def stageGradientNorms(model: Model, samples: typing.Sequence[TrainingSample],
                       workers: int = 1) -> list[dict[str, float]]:
    """ Norms of the joint-loss gradient per stage and parameter group."""
    prepared = prepareSamples(model, samples)
    job = functools.partial(_sampleLossAndGradient, stages=model.stages, basis=model.basis,
                            rbf=model.rbf)
    totals = None
    for _, grads in mapInWorkers(job, prepared, workers):
        if totals is None:
            totals = grads
        else:
            for acc, g in zip(totals, grads):
                acc += g
    return [g.norms() for g in totals]


def _optimize(prepared: list[PreparedSample], model: Model, scope: TrainScope,
              config: TrainConfig) -> list[StageParams]:
    template = _scopeTemplate(model, scope)
    x0 = packParams(template, scope.groups)
    objective = functools.partial(_preparedLossAndGradient, prepared=prepared, model=model,
                                  scope=scope, workers=config.workers)
    res = lbfgsMinimize(objective, x0, iters=config.lbfgsIters, memory=config.lbfgsMemory,
                        logEvery=config.logEvery)
    logger.info(f'{res.message} after {res.nit} iterations, {res.nfev} evaluations: '
                f'loss {res.trace[0]:.6e} -> {res.fun:.6e}')
    return unpackParams(res.x, template, scope.groups)


def train(samples: typing.Sequence[TrainingSample], skeleton: Model, config: TrainConfig) -> Model:
    """ Train a model starting from 'skeleton' (e.g. plainInit).
        Greedy training optimizes stage t on the loss of its own output with the earlier
        stages frozen; joint training optimizes all stages on the final output.
    Args:
        samples (Sequence[TrainingSample]): training pairs
        skeleton (Model): initial parameters and configuration
        config (TrainConfig): scheme and optimizer settings
    Returns:
        Model: trained copy of the skeleton
    """
    model = skeleton.copy()
    prepared = prepareSamples(model, samples)
    scheme = config.scheme
    if config.tied:
        if scheme != const.SCHEME_JOINT:
            logger.warning(f'tied stages are trained jointly, ignoring scheme {scheme}')
            scheme = const.SCHEME_JOINT
        model.stages = [model.stages[0].copy() for _ in range(model.numStages)]
    logger.info(f'training {model.name} ({model.parameterCount()} parameters) for {model.problem} '
                f'on {len(prepared)} samples, scheme {scheme}, groups {",".join(config.groups)}')

    if scheme in (const.SCHEME_GREEDY, const.SCHEME_GREEDY_JOINT):
        current = prepared
        for t in range(model.numStages):
            logger.info(f'greedy training of stage {t + 1}/{model.numStages}')
            scope = TrainScope(groups=config.groups, stage=t)
            model.stages[t] = _optimize(current, model, scope, config)[0]
            current = advanceSamples(current, [model.stages[t]], model.basis, model.rbf)

    if scheme in (const.SCHEME_JOINT, const.SCHEME_GREEDY_JOINT):
        logger.info('joint training of all stages')
        scope = TrainScope(groups=config.groups, tied=config.tied)
        stages = _optimize(prepared, model, scope, config)
        if config.tied:
            stages = [stages[0].copy() for _ in range(model.numStages)]
        model.stages = stages
    return model


def plainInfluence(z: npt.ArrayLike, scale: float = const.PLAIN_INFLUENCE_SCALE) -> Vector:
    """ phi(z) = 2 s z / (1 + s^2 z^2)."""
    sz = scale * np.asarray(z, dtype=np.float64)
    return 2.0 * sz / (1.0 + sz * sz)


def plainInit(m: int, numFilters: int, rbf: RbfSpec, numStages: int, problem: ProblemKind,
              lam: float = const.INITIAL_LAMBDA) -> Model:
    """ Plain initialization: the first numFilters DCT atoms in zig-zag order as filters
        and the RBF fit of the plain influence function in every stage.
    Args:
        m (int): kernel size
        numFilters (int): filters per stage, at most m * m - 1
        rbf (RbfSpec): influence function grid
        numStages (int): number of stages
        problem (ProblemKind): restoration problem
        lam (float, optional): initial reaction weight. Defaults to 0.1.
    Raises:
        InvalidArgumentError: too many filters or no stages
    Returns:
        Model: initialized model
    """
    basis = _checkShape(m, numFilters, numStages)
    filters = np.stack([oneHot(i, basis) for i in range(numFilters)])
    w = fitWeights(plainInfluence, rbf)
    influences = np.tile(w, (numFilters, 1))
    stages = [StageParams(math.log(lam), filters.copy(), influences.copy())
              for _ in range(numStages)]
    return Model(stages, m, rbf, problem)


def randomInit(m: int, numFilters: int, rbf: RbfSpec, numStages: int, problem: ProblemKind,
               seed: int) -> Model:
    """ Every lambdaRaw, filter coefficient and influence weight drawn uniformly
        from [-0.5, 0.5].
    """
    basis = _checkShape(m, numFilters, numStages)
    rng = np.random.default_rng(seed)
    r = const.RANDOM_INIT_RANGE
    stages = [StageParams(rng.uniform(-r, r), rng.uniform(-r, r, (numFilters, basis.count)),
                          rng.uniform(-r, r, (numFilters, rbf.count)))
              for _ in range(numStages)]
    return Model(stages, m, rbf, problem)


def initialModel(config: TrainConfig, m: int, numFilters: int, rbf: RbfSpec, numStages: int,
                 problem: ProblemKind, lam: float = const.INITIAL_LAMBDA) -> Model:
    """ Training skeleton for config.init; random initialization is seeded by config.seed
        and ignores 'lam'.
    """
    logger.info(f'{config.init} initialization of {numStages} stages, {numFilters} filters {m}x{m}')
    if config.init == const.INIT_RANDOM:
        return randomInit(m, numFilters, rbf, numStages, problem, config.seed)
    return plainInit(m, numFilters, rbf, numStages, problem, lam)


def _checkShape(m: int, numFilters: int, numStages: int) -> DctBasis:
    basis = buildDctBasis(m)
    if not 1 <= numFilters <= basis.count:
        raise InvalidArgumentError(f'number of filters must be in [1, {basis.count}], got {numFilters}')
    if numStages < 1:
        raise InvalidArgumentError(f'number of stages must be >= 1, got {numStages}')
    return basis


def finiteDifferenceGradient(objective: typing.Callable[[Vector], float], x: npt.ArrayLike,
                             step: float = const.FD_STEP) -> Vector:
    """ Central differences (f(x + h e_j) - f(x - h e_j)) / 2h for every coordinate."""
    x = np.array(x, dtype=np.float64, copy=True).ravel()
    res = np.zeros_like(x)
    for j in range(x.size):
        orig = x[j]
        x[j] = orig + step
        fPlus = objective(x)
        x[j] = orig - step
        fMinus = objective(x)
        x[j] = orig
        res[j] = (fPlus - fMinus) / (2.0 * step)
    return res
