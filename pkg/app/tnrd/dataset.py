"""
Training data: seeded crops of source images with synthesized degradations, and the
in-process JPEG quantization round trip (block DCT, quantize, de-quantize, inverse DCT).
"""
import dataclasses
import logging
import pathlib
import numpy as np
from . import const
from .data_terms import (ProblemKind, QuantBox, bicubicDownsample, blockDct, blockIdct,
                         quantBoxFromJpeg, tiledSteps)
from .exceptions import InvalidArgumentError
from .image_core import Image, addGaussianNoise, checkImage
from .image_io import loadImage
from .training import TrainingSample
from .workers import mapInWorkers

logger = logging.getLogger('tnrd')


@dataclasses.dataclass(frozen=True)
class JpegResult:
    """ Decoded image (input dims), de-quantized coefficients and quantization box of the
        block-aligned canvas the codec ran on.
    """
    decoded: Image
    coeffs: Image
    quality: int

    @property
    def box(self) -> QuantBox:
        return quantBoxFromJpeg(self.coeffs, self.quality)


@dataclasses.dataclass(frozen=True)
class DatasetManifest:
    paths: tuple[pathlib.Path, ...]
    cropSize: int
    cropsPerImage: int
    problem: ProblemKind
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.paths:
            raise InvalidArgumentError('dataset manifest has no images')
        if self.cropSize < 1 or self.cropsPerImage < 1:
            raise InvalidArgumentError(
                f'crop size and crops per image must be >= 1, got {self.cropSize}, {self.cropsPerImage}')

    @property
    def effectiveCropSize(self) -> int:
        """ Crop size rounded down to a multiple of the scale factor or the JPEG block."""
        unit = 1
        if self.problem.kind == const.PROBLEM_SISR:
            unit = self.problem.factor
        elif self.problem.kind == const.PROBLEM_DEBLOCK:
            unit = const.JPEG_BLOCK
        size = self.cropSize - self.cropSize % unit
        if size < unit:
            raise InvalidArgumentError(f'crop size {self.cropSize} is smaller than {unit}')
        return size


def jpegRoundtrip(img: Image, quality: int) -> JpegResult:
    """ Simulated grayscale JPEG compression. Images off the 8-pixel grid are extended by
        edge replication; the decoded image is cropped back to the input dims.
    Args:
        img (Image): image
        quality (int): JPEG quality in [1, 100]
    Returns:
        JpegResult: decoded image and de-quantized coefficients
    """
    img = checkImage(img)
    ProblemKind.deblock(quality)
    b = const.JPEG_BLOCK
    canvas = np.pad(img, ((0, -img.shape[0] % b), (0, -img.shape[1] % b)), mode='edge')
    steps = tiledSteps(canvas.shape, quality)
    coeffs = np.rint(blockDct(canvas) / steps) * steps
    decoded = blockIdct(coeffs)[:img.shape[0], :img.shape[1]]
    return JpegResult(decoded=decoded, coeffs=coeffs, quality=quality)


def degrade(gt: Image, problem: ProblemKind, seed: int) -> TrainingSample:
    """ Synthesize the observation of a ground-truth image for the problem."""
    if problem.kind == const.PROBLEM_DENOISE:
        return TrainingSample(addGaussianNoise(gt, problem.param, seed), gt)
    if problem.kind == const.PROBLEM_SISR:
        return TrainingSample(bicubicDownsample(gt, problem.factor), gt)
    jpeg = jpegRoundtrip(gt, problem.quality)
    box = jpeg.box if jpeg.coeffs.shape == gt.shape else None
    return TrainingSample(jpeg.decoded, gt, box)


def cropImage(img: Image, size: int, count: int, rng: np.random.Generator) -> list[Image]:
    """ 'count' square crops at seeded integer positions."""
    h, w = img.shape
    if h < size or w < size:
        raise InvalidArgumentError(f'image of shape {img.shape} is smaller than crop {size}')
    tops = rng.integers(0, h - size + 1, size=count)
    lefts = rng.integers(0, w - size + 1, size=count)
    return [img[t:t + size, l:l + size].copy() for t, l in zip(tops, lefts)]


def _ingestOne(job: tuple[int, pathlib.Path, DatasetManifest, bool]) -> list[TrainingSample]:
    index, path, manifest, pngSupport = job
    img = loadImage(path, pngSupport)
    rng = np.random.default_rng([manifest.seed, index])
    crops = cropImage(img, manifest.effectiveCropSize, manifest.cropsPerImage, rng)
    noiseSeeds = rng.integers(0, 2 ** 31 - 1, size=len(crops))
    return [degrade(gt, manifest.problem, int(s)) for gt, s in zip(crops, noiseSeeds)]


def ingestDataset(manifest: DatasetManifest, workers: int = 1,
                  pngSupport: bool = True) -> list[TrainingSample]:
    """ Crop and degrade every image of the manifest.
        Crop positions and noise come from generators seeded by (seed, image index),
        so results don't depend on the worker count.
    Raises:
        InvalidArgumentError: an image is smaller than the crop
        ImageFormatError: unreadable image
    Returns:
        list[TrainingSample]: samples in manifest order
    """
    jobs = [(i, p, manifest, pngSupport) for i, p in enumerate(manifest.paths)]
    res = [s for samples in mapInWorkers(_ingestOne, jobs, workers) for s in samples]
    logger.info(f'{len(res)} samples of size {manifest.effectiveCropSize} from '
                f'{len(manifest.paths)} images for {manifest.problem}')
    return res
