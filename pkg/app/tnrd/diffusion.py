"""
Stage update and multi-stage inference of the reaction-diffusion process

    u_t = Prox_G( u_{t-1} - [ sum_i kbar_i * phi_i(k_i * u_{t-1}) + psi(u_{t-1}, f) ] ),

the pattern-synthesis loop (pure diffusion, clamped to [0, 255]) and the stage
energy used as a correctness oracle for smooth problems.

All stages run on a canvas padded symmetrically by Model.padBorder pixels;
the result is cropped back at the end.
"""
import dataclasses
import logging
import math
import numpy as np
import numpy.typing as npt
from . import const
from .data_terms import (ProblemKind, QuantBox, bicubicDownsample, bicubicUpscale, blockDct,
                         proxDeblock, quantBoxFromJpeg, reactionSisr)
from .exceptions import InvalidArgumentError, ProblemMismatchError
from .filter_bank import DctBasis, buildDctBasis, materialize
from .image_core import (Image, Kernel, checkImage, convolve, crop, embed, padSymmetric,
                         rotate180)
from .influence import RbfSpec, evalPhi, evalRho

logger = logging.getLogger('tnrd')

TIME_STEP = 1.0  # fixed; the influence functions and lambda absorb any scaling


@dataclasses.dataclass
class StageParams:
    """ Parameters of one stage: lambda = exp(lambdaRaw), filter coefficients (N_k, m*m - 1)
        and RBF weights of the influence functions (N_k, count).
    """
    lambdaRaw: float
    filters: npt.NDArray[np.float64]
    influences: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        self.lambdaRaw = float(self.lambdaRaw)
        self.filters = np.atleast_2d(np.asarray(self.filters, dtype=np.float64))
        self.influences = np.atleast_2d(np.asarray(self.influences, dtype=np.float64))
        if self.filters.shape[0] != self.influences.shape[0]:
            raise InvalidArgumentError(
                f'{self.filters.shape[0]} filters but {self.influences.shape[0]} influence functions')

    @property
    def lam(self) -> float:
        return math.exp(self.lambdaRaw)

    @property
    def numFilters(self) -> int:
        return self.filters.shape[0]

    def copy(self) -> 'StageParams':
        return StageParams(self.lambdaRaw, self.filters.copy(), self.influences.copy())

    def kernels(self, basis: DctBasis) -> list[Kernel]:
        return [materialize(omega, basis) for omega in self.filters]


@dataclasses.dataclass
class Model:
    """ T trained stages sharing kernel size, filter count and RBF grid."""
    stages: list[StageParams]
    m: int
    rbf: RbfSpec
    problem: ProblemKind
    padBorder: int | None = None

    def __post_init__(self) -> None:
        if not self.stages:
            raise InvalidArgumentError('model needs at least one stage')
        basis = buildDctBasis(self.m)
        numFilters = self.stages[0].numFilters
        for i, stage in enumerate(self.stages):
            if stage.filters.shape != (numFilters, basis.count) \
                    or stage.influences.shape != (numFilters, self.rbf.count):
                raise InvalidArgumentError(
                    f'stage {i + 1} has filters {stage.filters.shape} and influences '
                    f'{stage.influences.shape}, expected ({numFilters}, {basis.count}) and '
                    f'({numFilters}, {self.rbf.count})')
        if self.padBorder is None:
            self.padBorder = self.defaultBorder(len(self.stages), self.m)
        if self.padBorder < 0:
            raise InvalidArgumentError(f'pad border must be non-negative, got {self.padBorder}')

    @staticmethod
    def defaultBorder(numStages: int, m: int) -> int:
        """ Each stage's two convolutions reach m - 1 pixels."""
        return numStages * (m - 1)

    @property
    def basis(self) -> DctBasis:
        return buildDctBasis(self.m)

    @property
    def numStages(self) -> int:
        return len(self.stages)

    @property
    def numFilters(self) -> int:
        return self.stages[0].numFilters

    @property
    def name(self) -> str:
        return f'tnrd_T{self.numStages}_{self.m}x{self.m}'

    def parameterCount(self) -> int:
        perStage = self.numFilters * (self.basis.count + self.rbf.count) + 1
        return perStage * self.numStages

    def copy(self) -> 'Model':
        return Model([s.copy() for s in self.stages], self.m, self.rbf, self.problem,
                     self.padBorder)


@dataclasses.dataclass(frozen=True, eq=False)
class StageInput:
    """ Observation data prepared for a canvas padded by 'border'.
        fCanvas: padded observation (denoise); f: observation as given (low-res for sisr);
        box: constraint set of the unpadded region (deblock).
    """
    problem: ProblemKind
    f: Image
    fCanvas: Image | None
    box: QuantBox | None
    border: int
    boundary: str = const.BOUNDARY_SYMMETRIC


@dataclasses.dataclass(eq=False)
class StageTrace:
    """ Intermediate values of one stage kept for back-propagation."""
    uPrev: Image
    kernels: list[Kernel]
    responses: list[Image]
    phis: list[Image]
    reaction: Image
    preProx: Image
    output: Image


def observationBox(problem: ProblemKind, f: Image) -> QuantBox:
    """ Constraint set of a decoded JPEG image (dims multiple of 8): the block-DCT
        coefficients of a decoded image are the de-quantized values themselves.
    """
    return quantBoxFromJpeg(blockDct(f), problem.quality)


def prepareInput(problem: ProblemKind, f: Image, border: int, box: QuantBox | None = None,
                 boundary: str = const.BOUNDARY_SYMMETRIC) -> StageInput:
    """ Bundle the observation for stages running on a canvas padded by 'border'.
    Args:
        problem (ProblemKind): restoration problem
        f (Image): observation (low-res image for sisr, decoded image for deblock)
        border (int): canvas padding
        box (QuantBox | None, optional): deblock constraint set; derived from f if missing
        boundary (str, optional): convolution boundary rule. Defaults to symmetric.
    Returns:
        StageInput: prepared observation
    """
    f = checkImage(f, 'observation')
    fCanvas = None
    if problem.kind == const.PROBLEM_DENOISE:
        fCanvas = padSymmetric(f, border)
    elif problem.kind == const.PROBLEM_DEBLOCK:
        if box is None:
            box = observationBox(problem, f)
        if box.shape != f.shape:
            raise ProblemMismatchError(f'constraint box {box.shape} does not match image {f.shape}')
    return StageInput(problem, f, fCanvas, box, border, boundary)


def diffusionTerm(u: Image, kernels: list[Kernel], influences: npt.NDArray[np.float64],
                  rbf: RbfSpec, boundary: str = const.BOUNDARY_SYMMETRIC) \
        -> tuple[Image, list[Image], list[Image]]:
    """ sum_i kbar_i * phi_i(k_i * u), summed in filter order.
    Returns:
        tuple[Image, list[Image], list[Image]]: the sum, filter responses, influence values
    """
    total = np.zeros_like(u)
    responses, phis = [], []
    for k, w in zip(kernels, influences):
        z = convolve(u, k, boundary)
        phi = evalPhi(w, rbf, z).astype(u.dtype, copy=False)
        total += convolve(phi, rotate180(k), boundary)
        responses.append(z)
        phis.append(phi)
    return total, responses, phis


def reactionTerm(u: Image, s: StageParams, inp: StageInput) -> Image:
    """ psi(u, f) on the padded canvas."""
    kind = inp.problem.kind
    if kind == const.PROBLEM_DENOISE:
        return s.lam * (u - inp.fCanvas)
    if kind == const.PROBLEM_SISR:
        inner = crop(u, inp.border)
        return embed(reactionSisr(inner, inp.f, s.lam, inp.problem.factor), inp.border)
    return np.zeros_like(u)


def proxOnCanvas(u: Image, inp: StageInput) -> Image:
    """ Prox_G applied to the unpadded region; the margin passes unchanged."""
    if inp.problem.kind != const.PROBLEM_DEBLOCK:
        return u
    res = np.array(u, copy=True)
    b = inp.border
    inner = proxDeblock(crop(u, b), inp.box)
    res[b:res.shape[0] - b, b:res.shape[1] - b] = inner
    return res


def stageForwardTrace(uPrev: Image, s: StageParams, inp: StageInput, basis: DctBasis,
                      rbf: RbfSpec) -> StageTrace:
    """ One stage update on the canvas, keeping the intermediate values."""
    kernels = [k.astype(uPrev.dtype, copy=False) for k in s.kernels(basis)]
    diffusion, responses, phis = diffusionTerm(uPrev, kernels, s.influences, rbf, inp.boundary)
    reaction = reactionTerm(uPrev, s, inp).astype(uPrev.dtype, copy=False)
    preProx = uPrev - TIME_STEP * (diffusion + reaction)
    output = proxOnCanvas(preProx, inp)
    return StageTrace(uPrev, kernels, responses, phis, reaction, preProx, output)


def stageForward(uPrev: Image, f: Image, s: StageParams, problem: ProblemKind, basis: DctBasis,
                 rbf: RbfSpec, border: int = 0, box: QuantBox | None = None,
                 boundary: str = const.BOUNDARY_SYMMETRIC) -> Image:
    """ One stage update.
    Args:
        uPrev (Image): previous estimate on a canvas padded by 'border'
        f (Image): unpadded observation
        s (StageParams): stage parameters
        problem (ProblemKind): restoration problem
        basis (DctBasis): filter basis
        rbf (RbfSpec): influence function grid
        border (int, optional): canvas padding. Defaults to 0.
        box (QuantBox | None, optional): deblock constraint set. Defaults to None.
        boundary (str, optional): convolution boundary rule. Defaults to symmetric.
    Returns:
        Image: u_t with the shape of uPrev
    """
    uPrev = checkImage(uPrev, 'uPrev')
    inp = prepareInput(problem, f, border, box, boundary)
    _checkCanvas(uPrev, inp)
    return stageForwardTrace(uPrev, s, inp, basis, rbf).output


def _checkCanvas(canvas: Image, inp: StageInput) -> None:
    inner = (canvas.shape[0] - 2 * inp.border, canvas.shape[1] - 2 * inp.border)
    if inp.problem.kind == const.PROBLEM_SISR:
        factor = inp.problem.factor
        expected = (inp.f.shape[0] * factor, inp.f.shape[1] * factor)
    else:
        expected = inp.f.shape
    if inner != expected:
        raise InvalidArgumentError(
            f'canvas {canvas.shape} with border {inp.border} does not fit observation '
            f'{inp.f.shape} ({inp.problem.kind})')


def initialEstimate(problem: ProblemKind, f: Image) -> Image:
    """ u_0: f for denoise and deblock, bicubic upscaling of f for sisr."""
    if problem.kind == const.PROBLEM_SISR:
        return bicubicUpscale(f, problem.factor)
    return np.array(f, dtype=np.float64, copy=True)


def _padToBlocks(f: Image) -> Image:
    b = const.JPEG_BLOCK
    extra = (-f.shape[0] % b, -f.shape[1] % b)
    if extra == (0, 0):
        return f
    return np.pad(f, ((0, extra[0]), (0, extra[1])), mode='edge')


def inferStages(model: Model, f: Image, box: QuantBox | None = None,
                dtype: npt.DTypeLike = np.float64) -> list[Image]:
    """ Run all stages and return every cropped intermediate u_1 .. u_T.
    Args:
        model (Model): trained model
        f (Image): observation
        box (QuantBox | None, optional): deblock constraint set; derived from f if missing
        dtype (npt.DTypeLike, optional): float64 or float32. Defaults to float64.
    Raises:
        ProblemMismatchError: observation doesn't fit the model's problem
    Returns:
        list[Image]: restored image after each stage
    """
    f = checkImage(f, 'observation')
    shape = None
    if model.problem.kind == const.PROBLEM_DEBLOCK and box is None:
        # decoded images off the 8-grid are extended by edge replication and cropped back
        shape = f.shape
        f = _padToBlocks(f)
    u0 = initialEstimate(model.problem, f)
    border = model.padBorder
    try:
        inp = prepareInput(model.problem, f.astype(dtype), border, box)
    except InvalidArgumentError as ex:
        raise ProblemMismatchError(str(ex)) from ex
    canvas = padSymmetric(u0, border).astype(dtype)
    basis = model.basis
    res = []
    for t, stage in enumerate(model.stages):
        canvas = stageForwardTrace(canvas, stage, inp, basis, model.rbf).output
        out = crop(canvas, border) if border else canvas.copy()
        if shape is not None:
            out = out[:shape[0], :shape[1]].copy()
        res.append(out)
        logger.debug(f'stage {t + 1}/{model.numStages} done, {out.shape=}')
    return res


def infer(model: Model, f: Image, box: QuantBox | None = None,
          dtype: npt.DTypeLike = np.float64) -> Image:
    """ Restore an observation: pad u_0, run the T stages, crop."""
    return inferStages(model, f, box, dtype)[-1]


def synthesizePattern(s: StageParams, basis: DctBasis, rbf: RbfSpec, shape: tuple[int, int],
                      steps: int, seed: int) -> Image:
    """ Pure diffusion without reaction from uniform noise in [0, 255],
        clamped to [0, 255] after every step.
    Args:
        s (StageParams): stage whose filters and influence functions drive the process
        basis (DctBasis): filter basis
        rbf (RbfSpec): influence function grid
        shape (tuple[int, int]): (height, width)
        steps (int): number of diffusion steps, >= 1
        seed (int): seed of the initial noise
    Returns:
        Image: synthesized pattern
    """
    if steps < 1:
        raise InvalidArgumentError(f'steps must be >= 1, got {steps}')
    rng = np.random.default_rng(seed)
    u = rng.uniform(const.INTENSITY_MIN, const.INTENSITY_MAX, size=shape)
    kernels = s.kernels(basis)
    for _ in range(steps):
        diffusion, _, _ = diffusionTerm(u, kernels, s.influences, rbf)
        u = np.clip(u - TIME_STEP * diffusion, const.INTENSITY_MIN, const.INTENSITY_MAX)
    return u


def energy(u: Image, f: Image, s: StageParams, problem: ProblemKind, basis: DctBasis, rbf: RbfSpec,
           boundary: str = const.BOUNDARY_SYMMETRIC) -> float:
    """ Stage energy sum_i sum_p rho_i((k_i * u)_p) + lambda / 2 * ||A u - f||^2
        on an unpadded image. One stage update is a gradient step of this energy
        wherever the rotated kernel is the transpose of the convolution.
    Raises:
        ProblemMismatchError: deblocking (non-smooth constraint term)
    """
    if not problem.isSmooth:
        raise ProblemMismatchError('energy is only defined for smooth problems')
    u = checkImage(u, 'u')
    res = 0.0
    for k, w in zip(s.kernels(basis), s.influences):
        res += float(np.sum(evalRho(w, rbf, convolve(u, k, boundary))))
    residual = u - f if problem.kind == const.PROBLEM_DENOISE \
        else bicubicDownsample(u, problem.factor) - f
    return res + 0.5 * s.lam * float(np.sum(residual ** 2))
