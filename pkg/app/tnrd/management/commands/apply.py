import typing
import numpy as np
from ...conf import tnrdSetting
from ...diffusion import infer
from ...image_io import loadImage, saveImage
from ...model_file import loadModel
from ._base import TnrdCommand


class Command(TnrdCommand):
    help = 'Restore one image with a trained model.'

    def add_arguments(self, parser) -> None:
        parser.add_argument('--model', required=True)
        parser.add_argument('--in', dest='input', required=True)
        parser.add_argument('--out', required=True)

    def run(self, **options: typing.Any) -> None:
        pngSupport = tnrdSetting('PNG_SUPPORT')
        model = loadModel(options['model'])
        f = loadImage(options['input'], pngSupport)
        dtype = np.float32 if tnrdSetting('SINGLE_PRECISION_INFERENCE') else np.float64
        restored = infer(model, f, dtype=dtype)
        saveImage(restored, options['out'], pngSupport)
        self.stdout.write(f'{model.name} ({model.problem}): {options["input"]} -> {options["out"]}')
