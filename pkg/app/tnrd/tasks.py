""" Celery tasks for training and evaluating models; the commands run them in-process
    or hand them to a worker.
"""
import logging
import pathlib
import celery
import numpy as np
from . import const
from .conf import tnrdSetting
from .data_terms import ProblemKind
from .dataset import DatasetManifest, degrade, ingestDataset
from .diffusion import inferStages, initialEstimate
from .image_core import checkImage, psnr
from .image_io import listImages, loadImage
from .influence import RbfSpec
from .model_file import loadModel, saveModel
from .training import TrainConfig, initialModel, stageGradientNorms, train, trainingLoss

logger = logging.getLogger('tnrd')


@celery.shared_task
def trainModelTask(cleanedData: dict) -> dict:
    """ Ingests the dataset, trains a plain or randomly initialized model and writes the model file.
    Args:
        cleanedData (dict): cleaned data of TrainConfigForm and DatasetManifestForm
    Returns:
        dict: model path, name, parameter count, sample count, initial and final loss
    """
    pngSupport = tnrdSetting('PNG_SUPPORT')
    problem = ProblemKind(cleanedData['problem'], cleanedData['param'])
    manifest = DatasetManifest(
        paths=tuple(listImages(cleanedData['data'], pngSupport)), cropSize=cleanedData['crop'],
        cropsPerImage=cleanedData['cropsPerImage'], problem=problem, seed=cleanedData['seed'])
    samples = ingestDataset(manifest, cleanedData['workers'], pngSupport)

    config = TrainConfig(
        scheme=cleanedData['scheme'], lbfgsIters=cleanedData['iters'],
        lbfgsMemory=cleanedData['memory'], seed=cleanedData['seed'],
        workers=cleanedData['workers'], groups=tuple(cleanedData['groups']),
        tied=cleanedData['tied'], logEvery=tnrdSetting('PROGRESS_LOG_EVERY'),
        init=cleanedData.get('init') or const.INIT_PLAIN)
    skeleton = initialModel(config, cleanedData['kernel'], cleanedData['filters'],
                            RbfSpec(kind=cleanedData['rbf']), cleanedData['stages'], problem,
                            cleanedData['lam'])
    initialLoss = trainingLoss(skeleton, samples, config.workers)
    if cleanedData.get('reportGradients'):
        for t, norms in enumerate(stageGradientNorms(skeleton, samples, config.workers)):
            logger.info(f'stage {t + 1} gradient norms at initialization: '
                        + ', '.join(f'{k}={v:.3e}' for k, v in norms.items()))

    model = train(samples, skeleton, config)
    finalLoss = trainingLoss(model, samples, config.workers)
    saveModel(model, cleanedData['out'])
    return {'model': str(cleanedData['out']), 'name': model.name,
            'parameters': model.parameterCount(), 'samples': len(samples),
            'initialLoss': initialLoss, 'finalLoss': finalLoss}


def _psnrFields(a: np.ndarray, b: np.ndarray) -> tuple[float, list[str]]:
    res = psnr(a, b)
    return res.value, [f'{res.value:.4f}', str(int(res.exact))]


def _alignToProblem(gt: np.ndarray, problem: ProblemKind) -> np.ndarray:
    if problem.kind != const.PROBLEM_SISR:
        return gt
    h, w = gt.shape
    return gt[:h - h % problem.factor, :w - w % problem.factor]


@celery.shared_task
def evaluateModelTask(cleanedData: dict) -> dict:
    """ PSNR of restored images against ground truth, written as a CSV report.
        Without a restored directory every ground-truth image is degraded for the model's
        problem (seeded), restored by the model and both input and output PSNR are reported.
    Args:
        cleanedData (dict): cleaned data of EvaluateForm
    Returns:
        dict: report path, number of images, average PSNR (and average input PSNR)
    """
    pngSupport = tnrdSetting('PNG_SUPPORT')
    paths = listImages(cleanedData['gtDir'], pngSupport)
    restoredDir = cleanedData.get('restoredDir')
    model = None if restoredDir else loadModel(cleanedData['model'])
    dtype = np.float32 if tnrdSetting('SINGLE_PRECISION_INFERENCE') else np.float64
    perStage = bool(cleanedData.get('perStage'))

    header = ['image']
    if model is not None:
        header += ['input_psnr', 'input_exact']
    header += ['psnr', 'exact']
    if perStage:
        header += [f'stage_{t + 1}_psnr' for t in range(model.numStages)]
    rows, outputs, inputs = [], [], []
    for i, path in enumerate(paths):
        gt = loadImage(path, pngSupport)
        fields = [path.name]
        if model is None:
            restored = loadImage(pathlib.Path(restoredDir) / path.name, pngSupport)
            stages = []
        else:
            gt = _alignToProblem(gt, model.problem)
            sample = degrade(gt, model.problem, cleanedData['seed'] + i)
            stages = inferStages(model, sample.f, sample.box, dtype)
            restored = stages[-1]
            value, inputFields = _psnrFields(initialEstimate(model.problem, sample.f), gt)
            inputs.append(value)
            fields += inputFields
        value, outputFields = _psnrFields(checkImage(restored, 'restored'), gt)
        outputs.append(value)
        fields += outputFields
        if perStage:
            fields += [f'{psnr(u, gt).value:.4f}' for u in stages]
        rows.append(fields)
        logger.info(f'{path.name}: {value:.4f} dB')

    averages = ['average']
    if model is not None:
        averages += [f'{np.mean(inputs):.4f}' if inputs else '', '']
    averages += [f'{np.mean(outputs):.4f}' if outputs else '', '']
    if perStage:
        averages += [f'{np.mean([float(r) for r in col]):.4f}' if col else ''
                     for col in zip(*(row[-model.numStages:] for row in rows))] \
            or [''] * model.numStages
    lines = [','.join(header)] + [','.join(row) for row in rows] + [','.join(averages)]
    pathlib.Path(cleanedData['report']).write_text('\n'.join(lines) + '\n', encoding='utf-8')
    res = {'report': str(cleanedData['report']), 'images': len(rows),
           'average': float(np.mean(outputs)) if outputs else None}
    if model is not None:
        res['inputAverage'] = float(np.mean(inputs)) if inputs else None
    return res
