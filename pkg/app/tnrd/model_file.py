"""
Versioned text model file. Grammar (one record per line, fields separated by spaces):

    TNRD-MODEL <version>
    problem <kind> <param>
    kernel <m>
    filters <N_k>
    stages <T>
    rbf <kind> <min> <step> <count> <gamma>
    pad_border <border>
    stage <t>
    lambda_raw <value>
    omega <i> <m*m - 1 values>          N_k lines
    weights <i> <count values>          N_k lines
    ... (stage block repeated T times)
    end

Floats are written with repr() so loading restores them bit for bit.
"""
import logging
import pathlib
import typing
import numpy as np
from . import const
from .data_terms import ProblemKind
from .diffusion import Model, StageParams
from .exceptions import InvalidArgumentError, ModelFormatError
from .filter_bank import buildDctBasis
from .influence import RbfSpec

logger = logging.getLogger('tnrd')


def _floats(values: typing.Iterable[float]) -> str:
    return ' '.join(repr(float(v)) for v in values)


def dumpModel(model: Model) -> str:
    """ Text document of the model."""
    rbf = model.rbf
    problemParam = repr(float(model.problem.param)) if model.problem.kind == const.PROBLEM_DENOISE \
        else str(int(model.problem.param))
    lines = [
        f'{const.MODEL_FILE_MAGIC} {const.MODEL_FILE_VERSION}',
        f'problem {model.problem.kind} {problemParam}',
        f'kernel {model.m}',
        f'filters {model.numFilters}',
        f'stages {model.numStages}',
        f'rbf {rbf.kind} {_floats((rbf.min, rbf.step))} {rbf.count} {_floats((rbf.gamma,))}',
        f'pad_border {model.padBorder}',
    ]
    for t, s in enumerate(model.stages):
        lines.append(f'stage {t + 1}')
        lines.append(f'lambda_raw {_floats((s.lambdaRaw,))}')
        lines += [f'omega {i + 1} {_floats(omega)}' for i, omega in enumerate(s.filters)]
        lines += [f'weights {i + 1} {_floats(w)}' for i, w in enumerate(s.influences)]
    lines.append('end')
    return '\n'.join(lines) + '\n'


class _Reader:
    """ Sequential access to the records of a model document."""

    def __init__(self, text: str) -> None:
        self.lines = [line.split() for line in text.splitlines() if line.strip()]
        self.pos = 0

    def record(self, key: str, numFields: int | None = None) -> list[str]:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f'unexpected end of model file, expected "{key}"')
        fields = self.lines[self.pos]
        self.pos += 1
        if fields[0] != key:
            raise ModelFormatError(f'line {self.pos}: expected "{key}", got "{fields[0]}"')
        if numFields is not None and len(fields) - 1 != numFields:
            raise ModelFormatError(
                f'line {self.pos}: "{key}" needs {numFields} fields, got {len(fields) - 1}')
        return fields[1:]

    def ints(self, key: str, numFields: int = 1) -> list[int]:
        try:
            return [int(v) for v in self.record(key, numFields)]
        except ValueError as ex:
            raise ModelFormatError(f'line {self.pos}: bad integer in "{key}"') from ex

    def floats(self, fields: list[str]) -> np.ndarray:
        try:
            return np.array([float(v) for v in fields], dtype=np.float64)
        except ValueError as ex:
            raise ModelFormatError(f'line {self.pos}: bad number') from ex

    def indexedRow(self, key: str, index: int, length: int) -> np.ndarray:
        fields = self.record(key, length + 1)
        if fields[0] != str(index):
            raise ModelFormatError(f'line {self.pos}: expected {key} {index}, got {fields[0]}')
        row = self.floats(fields[1:])
        if not np.all(np.isfinite(row)):
            raise ModelFormatError(f'line {self.pos}: non-finite {key} values')
        return row


def parseModel(text: str) -> Model:
    """ Parse a model document.
    Raises:
        ModelFormatError: wrong magic or version, malformed or inconsistent records
    """
    reader = _Reader(text)
    magic = reader.record(const.MODEL_FILE_MAGIC, 1)
    if magic[0] != str(const.MODEL_FILE_VERSION):
        raise ModelFormatError(f'unsupported model file version {magic[0]}')
    try:
        kind, param = reader.record('problem', 2)
        problem = ProblemKind(kind, float(param))
        m, = reader.ints('kernel')
        numFilters, = reader.ints('filters')
        numStages, = reader.ints('stages')
        rbfFields = reader.record('rbf', 5)
        rbf = RbfSpec(rbfFields[0], float(rbfFields[1]), float(rbfFields[2]), int(rbfFields[3]),
                      float(rbfFields[4]))
        padBorder, = reader.ints('pad_border')
        basis = buildDctBasis(m)
    except (InvalidArgumentError, ValueError) as ex:
        raise ModelFormatError(f'line {reader.pos}: {ex}') from ex
    if numFilters < 1 or numStages < 1:
        raise ModelFormatError(f'bad model sizes: {numFilters} filters, {numStages} stages')

    stages = []
    for t in range(1, numStages + 1):
        if reader.ints('stage') != [t]:
            raise ModelFormatError(f'line {reader.pos}: expected stage {t}')
        lambdaRaw = reader.floats(reader.record('lambda_raw', 1))[0]
        if np.isnan(lambdaRaw) or lambdaRaw == np.inf:
            raise ModelFormatError(f'line {reader.pos}: bad lambda_raw {lambdaRaw}')
        filters = np.stack([reader.indexedRow('omega', i, basis.count)
                            for i in range(1, numFilters + 1)])
        influences = np.stack([reader.indexedRow('weights', i, rbf.count)
                               for i in range(1, numFilters + 1)])
        stages.append(StageParams(lambdaRaw, filters, influences))
    reader.record('end', 0)
    if reader.pos != len(reader.lines):
        raise ModelFormatError(f'trailing content after line {reader.pos}')
    try:
        return Model(stages, m, rbf, problem, padBorder)
    except InvalidArgumentError as ex:
        raise ModelFormatError(str(ex)) from ex


def saveModel(model: Model, path: str | pathlib.Path) -> None:
    pathlib.Path(path).write_text(dumpModel(model), encoding='ascii')
    logger.info(f'saved {model.name} to {path}')


def loadModel(path: str | pathlib.Path) -> Model:
    """ Read a model file.
    Raises:
        ModelFormatError: unreadable or malformed file
    """
    try:
        text = pathlib.Path(path).read_text(encoding='ascii')
    except (OSError, UnicodeDecodeError) as ex:
        raise ModelFormatError(f'cannot read model file {path}: {ex}') from ex
    return parseModel(text)
