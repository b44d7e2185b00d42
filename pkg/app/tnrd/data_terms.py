"""
Problem-specific reaction terms and proximal operators:
    denoise  - A = identity, psi = lambda * (u - f)
    sisr     - A = antialiased bicubic downsampling, psi = lambda * A^T (A u - f)
    deblock  - psi = 0, prox = projection onto the JPEG quantization constraint set
"""
import dataclasses
import functools
import math
import numpy as np
import numpy.typing as npt
from scipy import fft
from . import const
from .exceptions import InvalidArgumentError
from .image_core import Image, checkImage, checkSameShape


@dataclasses.dataclass(frozen=True)
class ProblemKind:
    """ Restoration problem: 'kind' is const.PROBLEM_*, 'param' is sigma, factor or quality."""
    kind: str
    param: float

    def __post_init__(self) -> None:
        if self.kind == const.PROBLEM_DENOISE:
            if not self.param >= 0:
                raise InvalidArgumentError(f'sigma must be non-negative, got {self.param}')
        elif self.kind == const.PROBLEM_SISR:
            if int(self.param) != self.param or self.param < 2:
                raise InvalidArgumentError(f'factor must be an integer >= 2, got {self.param}')
        elif self.kind == const.PROBLEM_DEBLOCK:
            if int(self.param) != self.param or not 1 <= self.param <= 100:
                raise InvalidArgumentError(f'quality must be an integer in [1, 100], got {self.param}')
        else:
            raise InvalidArgumentError(f'Unknown problem kind: {self.kind}')

    @classmethod
    def denoise(cls, sigma: float) -> 'ProblemKind':
        return cls(const.PROBLEM_DENOISE, float(sigma))

    @classmethod
    def superResolve(cls, factor: int) -> 'ProblemKind':
        return cls(const.PROBLEM_SISR, int(factor))

    @classmethod
    def deblock(cls, quality: int) -> 'ProblemKind':
        return cls(const.PROBLEM_DEBLOCK, int(quality))

    @property
    def isSmooth(self) -> bool:
        return self.kind != const.PROBLEM_DEBLOCK

    @property
    def factor(self) -> int:
        return int(self.param)

    @property
    def quality(self) -> int:
        return int(self.param)

    def validate(self, strict: bool) -> None:
        """ Check the parameter against the tested values when 'strict' is on.
        Raises:
            InvalidArgumentError: untested sigma, factor or quality
        """
        if not strict:
            return
        allowed = {const.PROBLEM_DENOISE: const.DENOISE_SIGMAS,
                   const.PROBLEM_SISR: const.SISR_FACTORS,
                   const.PROBLEM_DEBLOCK: const.DEBLOCK_QUALITIES}[self.kind]
        if self.param not in allowed:
            raise InvalidArgumentError(
                f'{self.kind} parameter {self.param} is not one of {allowed} (strict mode)')

    def __str__(self) -> str:
        param = f'{self.param:g}'
        return f'{self.kind} {param}'


@dataclasses.dataclass(frozen=True, eq=False)
class QuantBox:
    """ Per-coefficient bounds of the block-DCT image consistent with the quantized data."""
    lower: npt.NDArray[np.float64]
    upper: npt.NDArray[np.float64]

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape


def reactionDenoise(u: Image, f: Image, lam: float) -> Image:
    """ lambda * (u - f)."""
    checkSameShape(u, f)
    return lam * (u - f)


def _cubic(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    a = const.BICUBIC_A
    absx = np.abs(x)
    absx2, absx3 = absx ** 2, absx ** 3
    return np.where(
        absx <= 1, (a + 2) * absx3 - (a + 3) * absx2 + 1,
        np.where(absx <= 2, a * absx3 - 5 * a * absx2 + 8 * a * absx - 4 * a, 0.0))


@functools.lru_cache(maxsize=64)
def resizeMatrix(inLen: int, outLen: int) -> npt.NDArray[np.float64]:
    """ Dense 1D bicubic resampling matrix (outLen x inLen) with imresize conventions:
        antialiased kernel when shrinking, mirrored indices at the borders,
        rows normalized to sum 1.
    """
    scale = outLen / inLen
    width = 4.0
    kernel = _cubic
    if scale < 1:
        width = 4.0 / scale
        kernel = lambda x: scale * _cubic(scale * x)  # noqa: E731
    x = np.arange(1, outLen + 1, dtype=np.float64)
    u = x / scale + 0.5 * (1 - 1 / scale)
    left = np.floor(u - width / 2)
    taps = int(math.ceil(width)) + 2
    indices = left[:, None] + np.arange(taps)[None, :]
    weights = kernel(u[:, None] - indices)
    weights /= weights.sum(axis=1, keepdims=True)
    # 1-based indices mirrored into [1, inLen]
    aux = np.concatenate([np.arange(inLen), np.arange(inLen)[::-1]])
    cols = aux[np.mod(indices.astype(np.int64) - 1, 2 * inLen)]
    res = np.zeros((outLen, inLen))
    np.add.at(res, (np.repeat(np.arange(outLen), taps), cols.ravel()), weights.ravel())
    res.setflags(write=False)
    return res


def _checkFactor(factor: int) -> None:
    if int(factor) != factor or factor < 1:
        raise InvalidArgumentError(f'factor must be a positive integer, got {factor}')


def bicubicDownsample(h: Image, factor: int) -> Image:
    """ Antialiased bicubic downsampling A by an integer factor.
    Args:
        h (Image): high-resolution image, dimensions divisible by factor
        factor (int): scale factor
    Raises:
        InvalidArgumentError: dimensions not divisible by factor
    Returns:
        Image: low-resolution image
    """
    h = checkImage(h)
    _checkFactor(factor)
    if h.shape[0] % factor or h.shape[1] % factor:
        raise InvalidArgumentError(f'image shape {h.shape} is not divisible by {factor}')
    rows = resizeMatrix(h.shape[0], h.shape[0] // factor)
    cols = resizeMatrix(h.shape[1], h.shape[1] // factor)
    return rows @ h @ cols.T


def bicubicDownsampleAdjoint(lo: Image, factor: int, outShape: tuple[int, int]) -> Image:
    """ Exact transpose A^T of bicubicDownsample for high-resolution shape 'outShape'."""
    _checkFactor(factor)
    if outShape[0] // factor != lo.shape[0] or outShape[1] // factor != lo.shape[1] \
            or outShape[0] % factor or outShape[1] % factor:
        raise InvalidArgumentError(f'shape {lo.shape} is not {outShape} divided by {factor}')
    rows = resizeMatrix(outShape[0], lo.shape[0])
    cols = resizeMatrix(outShape[1], lo.shape[1])
    return rows.T @ lo @ cols


def bicubicUpscale(lo: Image, factor: int) -> Image:
    """ Bicubic interpolation to factor x the input dimensions."""
    lo = checkImage(lo)
    _checkFactor(factor)
    rows = resizeMatrix(lo.shape[0], lo.shape[0] * factor)
    cols = resizeMatrix(lo.shape[1], lo.shape[1] * factor)
    return rows @ lo @ cols.T


def reactionSisr(u: Image, f: Image, lam: float, factor: int) -> Image:
    """ lambda * A^T (A u - f)."""
    if (u.shape[0] // factor, u.shape[1] // factor) != f.shape:
        raise InvalidArgumentError(f'observation shape {f.shape} does not match {u.shape} / {factor}')
    return lam * bicubicDownsampleAdjoint(bicubicDownsample(u, factor) - f, factor, u.shape)


def _checkBlocks(shape: tuple[int, ...]) -> None:
    b = const.JPEG_BLOCK
    if len(shape) != 2 or shape[0] % b or shape[1] % b or not shape[0] or not shape[1]:
        raise InvalidArgumentError(f'image shape {shape} is not a multiple of {b}')


def _blockTransform(u: Image, transform) -> Image:
    _checkBlocks(u.shape)
    b = const.JPEG_BLOCK
    h, w = u.shape
    blocks = u.reshape(h // b, b, w // b, b).transpose(0, 2, 1, 3)
    res = transform(blocks, type=2, axes=(2, 3), norm='ortho')
    return res.transpose(0, 2, 1, 3).reshape(h, w)


def blockDct(u: Image) -> Image:
    """ Orthonormal 8x8 block DCT-II; block coefficients stay at the block's position."""
    return _blockTransform(np.asarray(u, dtype=np.float64), fft.dctn)


def blockIdct(c: Image) -> Image:
    """ Inverse of blockDct."""
    return _blockTransform(np.asarray(c, dtype=np.float64), fft.idctn)


@functools.lru_cache(maxsize=128)
def quantizationTable(quality: int) -> npt.NDArray[np.float64]:
    """ Standard luminance table scaled by the usual JPEG quality formula, steps in [1, 255]."""
    if not 1 <= quality <= 100:
        raise InvalidArgumentError(f'quality must be in [1, 100], got {quality}')
    scale = 5000 / quality if quality < 50 else 200 - 2 * quality
    table = np.floor((np.array(const.JPEG_LUMINANCE_TABLE, dtype=np.float64) * scale + 50) / 100)
    table = np.clip(table, 1, 255)
    table.setflags(write=False)
    return table


def tiledSteps(shape: tuple[int, int], quality: int) -> npt.NDArray[np.float64]:
    """ Quantization step of every coefficient of a block-DCT image."""
    _checkBlocks(shape)
    b = const.JPEG_BLOCK
    return np.tile(quantizationTable(quality), (shape[0] // b, shape[1] // b))


def quantBoxFromJpeg(decodedCoeffs: Image, quality: int, strict: bool = False) -> QuantBox:
    """ Constraint box [(d - 0.5) q, (d + 0.5) q] around de-quantized coefficients d * q.
    Args:
        decodedCoeffs (Image): de-quantized block-DCT coefficients
        quality (int): JPEG quality
        strict (bool, optional): only accept the tested qualities. Defaults to False.
    Raises:
        InvalidArgumentError: untested quality in strict mode, bad shape
    Returns:
        QuantBox: per-coefficient bounds
    """
    ProblemKind.deblock(quality).validate(strict)
    steps = tiledSteps(decodedCoeffs.shape, quality)
    levels = np.rint(decodedCoeffs / steps)
    return QuantBox(lower=(levels - 0.5) * steps, upper=(levels + 0.5) * steps)


def proxDeblock(u: Image, box: QuantBox) -> Image:
    """ Orthogonal projection onto the constraint set: D^T clamp(D u, box)."""
    checkSameShape(u, box.lower)
    return blockIdct(np.clip(blockDct(u), box.lower, box.upper))


def proxDeblockAdjoint(u: Image, box: QuantBox, grad: Image) -> Image:
    """ Transpose of the Jacobian of proxDeblock at 'u' applied to 'grad':
        D^T M D grad, M = 1 on coefficients strictly inside the box, 0 on clamped ones.
    """
    checkSameShape(u, box.lower)
    coeffs = blockDct(u)
    mask = (coeffs > box.lower) & (coeffs < box.upper)
    return blockIdct(np.where(mask, blockDct(grad), 0.0))


def activeSetSignature(u: Image, box: QuantBox) -> bytes:
    """ Packed mask of clamped coefficients, used to detect kinks of the projection."""
    coeffs = blockDct(u)
    return np.packbits((coeffs <= box.lower) | (coeffs >= box.upper)).tobytes()
