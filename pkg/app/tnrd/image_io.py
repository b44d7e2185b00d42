"""
Grayscale image files: binary PGM (P5, 8 or 16 bit) and, when enabled, PNG through Pillow.
Samples are mapped to [0, 255] reals on load and rounded and clamped to 8 bit on save.
"""
import logging
import pathlib
import numpy as np
from PIL import Image as PilImage, UnidentifiedImageError
from . import const
from .exceptions import ImageFormatError
from .image_core import Image, checkImage
from .influence import RbfSpec, evalPhi, evalRho

logger = logging.getLogger('tnrd')

PGM_SUFFIXES = ('.pgm',)
PNG_SUFFIXES = ('.png',)


def _headerTokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """ First 'count' whitespace separated header tokens (comments skipped) and
        the offset of the raster (one whitespace byte after the last token).
    """
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b'#':
            while pos < n and data[pos:pos + 1] not in (b'\n', b'\r'):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b'#':
            pos += 1
        if start == pos:
            raise ImageFormatError('truncated PGM header')
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ImageFormatError('PGM header is not followed by whitespace')
    return tokens, pos + 1


def decodePgm(data: bytes) -> Image:
    """ Parse a binary PGM document.
    Args:
        data (bytes): file content
    Raises:
        ImageFormatError: malformed header, unsupported depth or truncated raster
    Returns:
        Image: samples scaled to [0, 255]
    """
    if data[:2] != b'P5':
        raise ImageFormatError(f'not a binary PGM file (magic {data[:2]!r})')
    tokens, offset = _headerTokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as ex:
        raise ImageFormatError(f'bad PGM header values: {tokens[1:]}') from ex
    if width <= 0 or height <= 0:
        raise ImageFormatError(f'bad PGM dimensions {width}x{height}')
    if not 0 < maxval < 65536:
        raise ImageFormatError(f'unsupported PGM maxval {maxval}')
    dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
    size = width * height * dtype.itemsize
    if len(data) - offset < size:
        raise ImageFormatError(f'truncated PGM raster: {len(data) - offset} of {size} bytes')
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    img = raster.reshape(height, width).astype(np.float64)
    if maxval != 255:
        img *= const.PSNR_PEAK / maxval
    return img


def encodePgm(img: Image) -> bytes:
    """ 8-bit binary PGM of the rounded and clamped samples."""
    img = checkImage(img)
    raster = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    header = f'P5\n{raster.shape[1]} {raster.shape[0]}\n255\n'.encode('ascii')
    return header + raster.tobytes()


def _checkPng(path: pathlib.Path, pngSupport: bool) -> None:
    if not pngSupport:
        raise ImageFormatError(f'PNG support is disabled: {path}')


def loadImage(path: str | pathlib.Path, pngSupport: bool = True) -> Image:
    """ Load a grayscale image.
    Args:
        path (str | pathlib.Path): .pgm file, or .png when PNG support is on
        pngSupport (bool, optional): accept PNG files. Defaults to True.
    Raises:
        ImageFormatError: unknown suffix or malformed file
    Returns:
        Image: samples in [0, 255]
    """
    path = pathlib.Path(path)
    suffix = path.suffix.lower()
    if suffix in PGM_SUFFIXES:
        return decodePgm(path.read_bytes())
    if suffix in PNG_SUFFIXES:
        _checkPng(path, pngSupport)
        try:
            with PilImage.open(path) as pil:
                mode = pil.mode
                if mode in ('I;16', 'I;16B', 'I'):
                    arr = np.asarray(pil, dtype=np.float64)
                    peak = 65535.0 if mode != 'I' else float(max(arr.max(), 1.0))
                    return arr * const.PSNR_PEAK / peak
                return np.asarray(pil.convert('L'), dtype=np.float64)
        except (UnidentifiedImageError, OSError) as ex:
            raise ImageFormatError(f'cannot read PNG {path}: {ex}') from ex
    raise ImageFormatError(f'unsupported image format: {path}')


def saveImage(img: Image, path: str | pathlib.Path, pngSupport: bool = True) -> None:
    """ Save as 8-bit grayscale; format chosen by suffix."""
    path = pathlib.Path(path)
    suffix = path.suffix.lower()
    if suffix in PGM_SUFFIXES:
        path.write_bytes(encodePgm(img))
    elif suffix in PNG_SUFFIXES:
        _checkPng(path, pngSupport)
        raster = np.clip(np.rint(checkImage(img)), 0, 255).astype(np.uint8)
        PilImage.fromarray(raster).save(path)
    else:
        raise ImageFormatError(f'unsupported image format: {path}')
    logger.debug(f'saved {path}')


def listImages(directory: str | pathlib.Path, pngSupport: bool = True) -> list[pathlib.Path]:
    """ Image files of a directory in name order."""
    suffixes = PGM_SUFFIXES + (PNG_SUFFIXES if pngSupport else ())
    directory = pathlib.Path(directory)
    if not directory.is_dir():
        raise ImageFormatError(f'not a directory: {directory}')
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in suffixes)


def filterGrid(kernels: list[Image], gap: int = const.FILTER_GRID_GAP) -> Image:
    """ Kernels tiled in a near-square grid, each stretched to [0, 255], white gaps."""
    if not kernels:
        raise ImageFormatError('no filters to export')
    m = kernels[0].shape[0]
    cols = int(np.ceil(np.sqrt(len(kernels))))
    rows = int(np.ceil(len(kernels) / cols))
    grid = np.full((rows * (m + gap) + gap, cols * (m + gap) + gap), const.PSNR_PEAK)
    for i, k in enumerate(kernels):
        lo, hi = float(k.min()), float(k.max())
        tile = (k - lo) / (hi - lo) * const.PSNR_PEAK if hi > lo else np.zeros_like(k)
        r, c = divmod(i, cols)
        top, left = gap + r * (m + gap), gap + c * (m + gap)
        grid[top:top + m, left:left + m] = tile
    return grid


def penaltyTable(stages: list, rbf: RbfSpec, step: float = const.PENALTY_EXPORT_STEP) -> str:
    """ CSV of z, phi(z) and rho(z) of every influence function sampled over the RBF range."""
    z = np.arange(rbf.min, rbf.max + step / 2, step)
    header = ['z']
    columns = [z]
    for t, s in enumerate(stages):
        for i, w in enumerate(s.influences):
            header += [f'phi_{t + 1}_{i + 1}', f'rho_{t + 1}_{i + 1}']
            columns += [evalPhi(w, rbf, z), evalRho(w, rbf, z)]
    rows = [','.join(header)]
    rows += [','.join(f'{v:.10g}' for v in row) for row in np.stack(columns, axis=1)]
    return '\n'.join(rows) + '\n'

