"""
Image container helpers, boundary-aware 2D convolution and its exact adjoint,
padding, noise injection and quality metrics.

Images are 2D float64 numpy arrays shaped (height, width); kernels are (m, m)
arrays with odd m. Convolution is true convolution (the kernel is flipped):
    out(p) = sum_q k(q) * img(p - q)
"""
import dataclasses
import logging
import math
import numpy as np
import numpy.typing as npt
from scipy import signal
from . import const
from .exceptions import InvalidArgumentError

Image = npt.NDArray[np.float64]
Kernel = npt.NDArray[np.float64]

logger = logging.getLogger('tnrd')


@dataclasses.dataclass(frozen=True)
class PsnrResult:
    """ PSNR value in dB; 'exact' marks identical images reported with the capped value."""
    value: float
    exact: bool = False

    def __float__(self) -> float:
        return self.value


def checkImage(img: npt.ArrayLike, name: str = 'image') -> Image:
    """ Validate an image and return it as a float array.
    Args:
        img (npt.ArrayLike): 2D array of intensities
        name (str, optional): name used in error messages. Defaults to 'image'.
    Raises:
        InvalidArgumentError: not 2D, empty or has non-finite samples
    Returns:
        Image: the same samples as a float array
    """
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidArgumentError(f'{name} must be a non-empty 2D array, got shape {arr.shape}')
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f'{name} has non-finite samples')
    return arr


def checkKernel(k: npt.ArrayLike) -> Kernel:
    """ Validate a square kernel of odd size.
    Args:
        k (npt.ArrayLike): kernel taps
    Raises:
        InvalidArgumentError: kernel isn't square or its size is even
    Returns:
        Kernel: kernel as a float array
    """
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 == 0:
        raise InvalidArgumentError(f'kernel must be square with odd size, got shape {arr.shape}')
    return arr


def checkSameShape(a: Image, b: Image) -> None:
    if a.shape != b.shape:
        raise InvalidArgumentError(f'dimension mismatch: {a.shape} vs {b.shape}')


def _checkBoundary(boundary: str) -> None:
    if boundary not in const.BOUNDARIES:
        raise InvalidArgumentError(f'Unknown boundary rule: {boundary}')


def rotate180(k: npt.ArrayLike) -> Kernel:
    """ Reverse kernel taps in both axes."""
    return np.ascontiguousarray(np.asarray(k)[::-1, ::-1])


def padSymmetric(img: Image, border: int) -> Image:
    """ Half-sample symmetric padding: the edge pixel is duplicated,
        e.g. row [1, 2, 3] with border 2 becomes [2, 1, 1, 2, 3, 3, 2].
    Args:
        img (Image): image
        border (int): number of pixels added on every side
    Raises:
        InvalidArgumentError: negative border
    Returns:
        Image: image of size (h + 2 * border, w + 2 * border)
    """
    if border < 0:
        raise InvalidArgumentError(f'border must be non-negative, got {border}')
    if border == 0:
        return np.array(img, copy=True)
    return np.pad(img, border, mode='symmetric')


def padSymmetricAdjoint(padded: Image, border: int) -> Image:
    """ Transpose of padSymmetric: every padded sample is added back to the pixel it mirrors.
    Args:
        padded (Image): image of the padded size
        border (int): padding width used by padSymmetric
    Returns:
        Image: image of size (h - 2 * border, w - 2 * border)
    """
    if border == 0:
        return np.array(padded, copy=True)
    h, w = padded.shape[0] - 2 * border, padded.shape[1] - 2 * border
    rowIdx = np.pad(np.arange(h), border, mode='symmetric')
    colIdx = np.pad(np.arange(w), border, mode='symmetric')
    rows = np.zeros((h, padded.shape[1]), dtype=padded.dtype)
    np.add.at(rows, rowIdx, padded)
    res = np.zeros((h, w), dtype=padded.dtype)
    np.add.at(res, (slice(None), colIdx), rows)
    return res


def crop(img: Image, border: int) -> Image:
    """ Discard 'border' pixels on every side.
    Args:
        img (Image): image
        border (int): number of pixels removed on every side
    Raises:
        InvalidArgumentError: nothing would remain
    Returns:
        Image: central region
    """
    if border < 0 or 2 * border >= min(img.shape):
        raise InvalidArgumentError(f'border {border} is too large for image of shape {img.shape}')
    if border == 0:
        return np.array(img, copy=True)
    return np.array(img[border:-border, border:-border], copy=True)


def embed(inner: Image, border: int) -> Image:
    """ Zero-pad 'inner' by 'border' on every side (transpose of crop)."""
    if border == 0:
        return np.array(inner, copy=True)
    return np.pad(inner, border, mode='constant')


def _extend(img: Image, r: int, boundary: str) -> Image:
    if boundary == const.BOUNDARY_SYMMETRIC:
        return padSymmetric(img, r)
    return np.pad(img, r, mode='constant')


def _extendAdjoint(extended: Image, r: int, boundary: str) -> Image:
    if boundary == const.BOUNDARY_SYMMETRIC:
        return padSymmetricAdjoint(extended, r)
    return extended[r:extended.shape[0] - r, r:extended.shape[1] - r].copy()


def convolve(img: Image, k: Kernel, boundary: str = const.BOUNDARY_SYMMETRIC) -> Image:
    """ True 2D convolution with the same output size as 'img'.
    Args:
        img (Image): image
        k (Kernel): odd-sized square kernel
        boundary (str, optional): const.BOUNDARY_*. Defaults to symmetric.
    Raises:
        InvalidArgumentError: empty image, even kernel size, unknown boundary rule
    Returns:
        Image: convolved image
    """
    img = checkImage(img)
    k = checkKernel(k)
    _checkBoundary(boundary)
    r = k.shape[0] // 2
    return signal.convolve2d(_extend(img, r, boundary), k, mode='valid')


def convolveAdjoint(img: Image, k: Kernel, boundary: str = const.BOUNDARY_SYMMETRIC) -> Image:
    """ Exact transpose of convolve(., k, boundary).
        For the zero boundary it equals convolve(img, rotate180(k), zero);
        for the symmetric boundary the reflected margin is folded back.
    """
    k = checkKernel(k)
    _checkBoundary(boundary)
    r = k.shape[0] // 2
    full = signal.convolve2d(img, rotate180(k), mode='full')
    return _extendAdjoint(full, r, boundary)


def kernelGradient(img: Image, gradOut: Image, m: int,
                   boundary: str = const.BOUNDARY_SYMMETRIC) -> Kernel:
    """ Gradient of <gradOut, convolve(img, k, boundary)> with respect to the taps of k.
    Args:
        img (Image): convolved image
        gradOut (Image): gradient with respect to the convolution output
        m (int): kernel size
        boundary (str, optional): const.BOUNDARY_*. Defaults to symmetric.
    Returns:
        Kernel: (m, m) gradient
    """
    r = m // 2
    extended = _extend(img, r, boundary)
    return rotate180(signal.correlate2d(extended, gradOut, mode='valid'))


def psnr(a: Image, b: Image, peak: float = const.PSNR_PEAK) -> PsnrResult:
    """ Peak signal-to-noise ratio 10 * log10(peak^2 / MSE).
    Args:
        a (Image): first image
        b (Image): second image
        peak (float, optional): peak intensity. Defaults to 255.
    Raises:
        InvalidArgumentError: dimension mismatch
    Returns:
        PsnrResult: value in dB; identical images give the capped value with exact=True
    """
    a, b = checkImage(a, 'a'), checkImage(b, 'b')
    checkSameShape(a, b)
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return PsnrResult(const.PSNR_CAP, exact=True)
    return PsnrResult(10.0 * math.log10(peak ** 2 / mse))


def addGaussianNoise(img: Image, sigma: float, seed: int) -> Image:
    """ Add i.i.d. zero-mean Gaussian noise without clamping.
    Args:
        img (Image): clean image
        sigma (float): noise standard deviation
        seed (int): seed of the generator
    Raises:
        InvalidArgumentError: negative sigma
    Returns:
        Image: noisy image
    """
    img = checkImage(img)
    if sigma < 0:
        raise InvalidArgumentError(f'sigma must be non-negative, got {sigma}')
    if sigma == 0:
        return np.array(img, dtype=np.float64, copy=True)
    rng = np.random.default_rng(seed)
    return img + sigma * rng.standard_normal(img.shape)


def lagOneAutocorrelation(img: Image) -> float:
    """ Mean of horizontal and vertical lag-1 correlation coefficients."""
    img = checkImage(img)
    coefs = []
    for a, b in ((img[:, :-1], img[:, 1:]), (img[:-1, :], img[1:, :])):
        if a.size < 2:
            continue
        a, b = a.ravel() - a.mean(), b.ravel() - b.mean()
        denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
        coefs.append(float(np.dot(a, b)) / denom if denom > const.EPS else 0.0)
    return sum(coefs) / len(coefs) if coefs else 0.0
